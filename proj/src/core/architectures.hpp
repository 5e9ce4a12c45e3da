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

#ifndef MSD_CORE_ARCHITECTURES_HPP_
#define MSD_CORE_ARCHITECTURES_HPP_

#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/nn/network.hpp"

namespace msd {

inline constexpr double kRateHz = 200.0;
// CNN-LSTM geometry: 1-s encoder windows advancing by 0.25 s.
inline constexpr std::int64_t kLstmEncoderWindow = 200;
inline constexpr std::int64_t kLstmWindowStride = 50;
// Length of one training sequence, in windows (50 s of context).
inline constexpr std::int64_t kLstmTrainSequenceWindows = 200;

// How many extra 128-filter blocks follow the four base blocks: one more for
// each doubling of the window (2 s -> 3 ... 32 s -> 7). Anything outside the
// supported ladder is an error.
int RepeatCount(int window_seconds);

// Sliding-window CNN: Gaussian noise, base conv blocks of 8/16/32/64 filters,
// RepeatCount() blocks of 128 filters (each block = valid conv3 + batch norm
// + ReLU + pool2), then flatten, dropout 0.5, dense 64, ReLU, softmax 4.
// The block ladder reduces 200*window samples to exactly one temporal step.
// With `embed` an extra zero-padded conv block of 64 filters is appended at
// temporal size 1, and the flatten output becomes the 64-wide feature tap.
NetworkSpec BuildCnn(int window_seconds, int n_channels, bool embed = false);

// Per-window CNN encoder on 1-s windows (base blocks + two 128-filter
// blocks), LSTM over the window sequence, per-step softmax over
// {non-MSE, MSE}.
NetworkSpec BuildCnnLstm();

struct ArchInfo {
  std::string id;
  Family family;
  int window_seconds;  // CNN only
  int n_channels;
  WeightScheme default_weighting;
  bool embed;
};

// The Figure-4 identifiers plus `16s_e`, the embedding-enabled variant.
const std::vector<ArchInfo>& ArchRegistry();
const ArchInfo* FindArch(const std::string& id);
// Comma-separated id list for error messages.
std::string ArchIdList();
// Builds the named architecture or fails listing the valid ids.
NetworkSpec BuildArch(const std::string& id);

// Channel names consumed by a spec at evaluation time: O1M2 (+ the two EOG
// channels in 3-channel mode).
std::vector<std::string> EvalChannels(const NetworkSpec& spec);

}  // namespace msd

#endif  // MSD_CORE_ARCHITECTURES_HPP_
