// Copyright 2026 The MSD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MSD_CORE_SEGMENTATION_HPP_
#define MSD_CORE_SEGMENTATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/nn/network.hpp"
#include "core/recording.hpp"
#include "core/tensor.hpp"

namespace msd {

// Per-sample class probabilities and hard labels over one recording.
// Labels are class codes in the network's output space: the four scoring
// classes for CNNs, {0 = non-MSE, 1 = MSE} for the CNN-LSTM. Rows always
// cover every sample; coarser decisions are expanded over their span and
// `resolution_samples` records the decision spacing.
struct PredictionTrack {
  std::string arch_id;
  int n_classes = 0;
  std::int64_t resolution_samples = 1;
  Tensor<float> probs;              // [duration, n_classes]
  std::vector<std::uint8_t> labels; // argmax codes (ties -> lower code)

  std::int64_t duration() const {
    return static_cast<std::int64_t>(labels.size());
  }
  const char* ClassName(int code) const;
};

// Maximal run of one class.
struct Episode {
  std::int64_t start_sample = 0;
  std::int64_t end_sample = 0;  // exclusive
  std::uint8_t code = 0;
  std::string flag;  // "sleep>15s" on over-long MSE runs, else empty
};

// Channel selection + family normalization for one network: [T, C] floats.
Tensor<float> NormalizeForSpec(const Recording& conditioned,
                               const NetworkSpec& spec);

// Reference path: evaluates the network on the replicate-padded window around
// every sample. Windows are batched through the inference forward pass, but
// each window is an independent evaluation.
PredictionTrack PredictDenseNaive(const Network<float>& net,
                                  const Tensor<float>& signal,
                                  ThreadPool* pool);

// Shared-computation path. Each conv/batch-norm/ReLU stage runs once per
// pooling-offset branch over the whole padded signal; every pool splits each
// branch into its two phases, so after P pooling stages the 2^P branches
// hold every window's head input, which is gathered per sample and pushed
// through the dense head in one batch. Agrees with the naive path within
// 1e-5 per probability.
PredictionTrack PredictDenseFast(const Network<float>& net,
                                 const Tensor<float>& signal,
                                 ThreadPool* pool);

// CNN-LSTM: encoder features at the window stride, LSTM over the full window
// sequence, per-window two-class softmax. Each window's decision spans the
// stride centred on it; leading/trailing samples take the nearest window.
PredictionTrack PredictCnnLstm(const Network<float>& net,
                               const Tensor<float>& signal, ThreadPool* pool);

// Selects channels, normalizes and dispatches on family. `naive` forces the
// reference path for CNNs.
PredictionTrack PredictRecording(const Network<float>& net,
                                 const Recording& conditioned, bool naive,
                                 ThreadPool* pool);

// Majority vote over consecutive intervals (default 100 samples = 0.5 s).
// Count ties break towards sleep: MSE > MSEc > ED > W. The coarse track's
// probability rows hold the within-interval label frequencies.
PredictionTrack CoarsenMajority(const PredictionTrack& track,
                                std::int64_t interval_samples);

// Relabels maximal MSE runs shorter than min_seconds as wakefulness. Runs
// longer than max_seconds are kept; they are flagged at episode level.
std::vector<std::uint8_t> ApplyDurationCriteria(
    const std::vector<std::uint8_t>& labels, double rate_hz,
    double min_seconds = 1.0, double max_seconds = 15.0);

// Maximal equal-label runs covering the track exactly.
std::vector<Episode> EpisodesFromLabels(const std::vector<std::uint8_t>& labels);

// Flags MSE episodes longer than max_seconds as "sleep>15s".
void FlagLongSleepEpisodes(std::vector<Episode>& episodes, double rate_hz,
                           double max_seconds = 15.0);

// Text formats: prediction rows are `index,label,p...` (one line per
// decision interval); episodes are `start,end_exclusive,class,flag`.
void SavePredictionFile(const PredictionTrack& track, const std::string& path);
PredictionTrack LoadPredictionFile(const std::string& path);
void SaveEpisodesFile(const std::vector<Episode>& episodes, int n_classes,
                      const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_SEGMENTATION_HPP_
