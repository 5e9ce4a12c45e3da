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

#ifndef MSD_CORE_RECORDING_HPP_
#define MSD_CORE_RECORDING_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace msd {

// Scoring classes. The integer codes are fixed: they define the network
// output ordering and every on-disk label encoding.
enum class Label : std::uint8_t {
  kWake = 0,       // W
  kMse = 1,        // microsleep episode
  kMseCand = 2,    // microsleep episode candidate
  kDrowsy = 3,     // episode of drowsiness
};

inline constexpr int kNumLabels = 4;

const char* LabelName(Label label);
// Returns true and stores the label when `name` is one of W/MSE/MSEc/ED.
bool LabelFromName(const std::string& name, Label* out);

// Standard channel names of the MWT montage.
inline constexpr const char* kChannelO1M2 = "O1M2";
inline constexpr const char* kChannelO2M1 = "O2M1";
inline constexpr const char* kChannelE1M1 = "E1M1";
inline constexpr const char* kChannelE2M1 = "E2M1";

struct Channel {
  std::string name;
  std::vector<double> samples;  // microvolts
};

// Multi-channel recording sampled at a single rate. All channels have equal
// length and unique names.
struct Recording {
  std::string id;
  double rate_hz = 0.0;
  std::vector<Channel> channels;

  std::int64_t duration_samples() const {
    return channels.empty() ? 0
                            : static_cast<std::int64_t>(channels[0].samples.size());
  }
  // Index of the named channel, or -1.
  int ChannelIndex(const std::string& name) const;

  // Throws unless rates/lengths/names satisfy the invariants.
  void Validate() const;
};

// Recording restricted to the named channels, in the requested order.
// Sample data is copied verbatim. Missing names are an error.
Recording SelectChannels(const Recording& rec,
                         const std::vector<std::string>& names);

// Per-sample class sequence aligned with one recording.
struct LabelTrack {
  std::vector<Label> labels;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
};

}  // namespace msd

#endif  // MSD_CORE_RECORDING_HPP_
