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

#ifndef MSD_CORE_DATASET_HPP_
#define MSD_CORE_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/recording.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace msd {

// Patient-level split. No recording id appears in two parts.
struct SplitPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

// Deterministic seeded shuffle, then train/test sizes are round(fraction*N)
// and validation receives the remainder (76 ids at 0.70/0.15/0.15 give
// 53/12/11).
SplitPlan SplitByPatient(const std::vector<std::string>& ids, double train_frac,
                         double val_frac, double test_frac, std::uint64_t seed);

enum class WeightScheme { kInverse, kUniform };

// Label histogram over one or more tracks, `n_classes` bins of class codes.
std::vector<std::int64_t> CountLabels(const std::vector<const LabelTrack*>& tracks,
                                      int n_classes);

// Inverse scheme: w(k) proportional to 1/frequency(k), normalized so the mean
// weight over classes is 1. Every class must be present. Uniform scheme: all 1.
std::vector<double> ClassWeightsFromCounts(const std::vector<std::int64_t>& counts,
                                           WeightScheme scheme);

// Copies the window of `window_samples` rows centred at `center` out of a
// [T, C] signal into `out` ([window_samples, n_channels] row-major, restricted
// to `channel_indices`). The window spans
// [center - window/2, center + ceil(window/2)); rows outside the recording
// replicate the first/last sample.
void ExtractWindow(const Tensor<float>& signal, std::int64_t center,
                   std::int64_t window_samples,
                   const std::vector<int>& channel_indices, float* out);

// One recording prepared for sampling: normalized signal with the full
// four-channel montage (O1M2, O2M1, E1M1, E2M1 when present) plus labels.
struct PreparedRecording {
  std::string id;
  Tensor<float> signal;  // [T, n_channels], already normalized
  std::vector<std::string> channel_names;
  LabelTrack labels;
};

struct WindowBatch {
  Tensor<float> inputs;        // [B, window, channels]
  std::vector<int> targets;    // class codes
  std::vector<float> weights;  // class weight of each target
};

// Draws labelled windows without repeating a (recording, center) pair inside
// one training iteration. In 3-channel mode the EEG channel of every element
// is O1M2 or O2M1 with probability 1/2, stacked with the two EOG channels;
// in 1-channel mode it is always the first EEG derivation.
class WindowSampler {
 public:
  WindowSampler(const std::vector<PreparedRecording>* recordings,
                std::int64_t window_samples, int n_channels,
                std::vector<double> class_weights);

  std::int64_t total_windows() const { return total_; }
  std::int64_t remaining() const { return total_ - cursor_; }

  // Restarts the iteration with a fresh permutation of all centers.
  void BeginIteration(Rng& rng);

  // Draws up to `batch_size` elements; a trailing partial batch is allowed
  // only when `allow_partial` is set. Requires BeginIteration first.
  WindowBatch SampleBatch(std::int64_t batch_size, Rng& rng,
                          bool allow_partial = false);

 private:
  const std::vector<PreparedRecording>* recordings_;
  std::int64_t window_samples_;
  int n_channels_;
  std::vector<double> class_weights_;
  std::vector<std::int64_t> offsets_;  // prefix sums of durations
  std::vector<std::int64_t> order_;    // permutation of global sample indices
  std::int64_t total_ = 0;
  std::int64_t cursor_ = 0;
  bool started_ = false;
};

struct SequenceBatch {
  Tensor<float> inputs;        // [B, seq, window, channels]
  std::vector<int> targets;    // B*seq codes, 0 = non-MSE, 1 = MSE
  std::vector<float> weights;
};

// Draws sequences of consecutive 1-s windows advancing by `stride` samples
// for the CNN-LSTM pipeline. Targets are the binarized label at each window
// center. Candidate sequence starts lie on the stride grid and never repeat
// within an iteration.
class SequenceSampler {
 public:
  SequenceSampler(const std::vector<PreparedRecording>* recordings,
                  std::int64_t window_samples, std::int64_t stride,
                  std::int64_t seq_windows, int n_channels,
                  std::vector<double> class_weights);

  std::int64_t total_sequences() const { return total_; }
  std::int64_t remaining() const { return total_ - cursor_; }

  void BeginIteration(Rng& rng);
  SequenceBatch SampleBatch(std::int64_t batch_size, Rng& rng,
                            bool allow_partial = false);

 private:
  const std::vector<PreparedRecording>* recordings_;
  std::int64_t window_samples_;
  std::int64_t stride_;
  std::int64_t seq_windows_;
  int n_channels_;
  std::vector<double> class_weights_;
  std::vector<std::pair<int, std::int64_t>> candidates_;  // (recording, start)
  std::vector<std::int64_t> order_;
  std::int64_t total_ = 0;
  std::int64_t cursor_ = 0;
  bool started_ = false;
};

}  // namespace msd

#endif  // MSD_CORE_DATASET_HPP_
