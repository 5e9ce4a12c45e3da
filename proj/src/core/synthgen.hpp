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
//
// Synthetic MWT-like recordings for desk-scale end-to-end runs: alpha
// dominant (10 Hz) wake spans, theta-dominant (5 Hz) microsleep spans of
// 1-15 s, and slow high-amplitude EOG waves leading into each episode.
// Not a physiological simulator.

#ifndef MSD_CORE_SYNTHGEN_HPP_
#define MSD_CORE_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <utility>

#include "core/recording.hpp"

namespace msd {

struct SynthConfig {
  double duration_seconds = 300.0;
  double rate_hz = 200.0;
  double mse_fraction = 0.08;  // target fraction of time inside MSE spans
  double mse_min_seconds = 1.0;
  double mse_max_seconds = 15.0;
  double wake_amp_uv = 40.0;   // 10 Hz wake rhythm
  double mse_amp_uv = 50.0;    // 5 Hz episode rhythm
  double noise_uv = 5.0;
  double eog_amp_uv = 60.0;    // 0.3 Hz slow eye movements
  double eog_lead_seconds = 2.0;

  void Validate() const;
};

// Deterministic given (config, seed). Channels: O1M2, O2M1, E1M1, E2M1.
std::pair<Recording, LabelTrack> GenerateSynthetic(const SynthConfig& config,
                                                   std::uint64_t seed,
                                                   const std::string& id);

// Writes `synthNN.edf` + `synthNN.labels` pairs under `dir`.
void GenerateSyntheticCorpus(const std::string& dir, int n_recordings,
                             const SynthConfig& config, std::uint64_t seed);

}  // namespace msd

#endif  // MSD_CORE_SYNTHGEN_HPP_
