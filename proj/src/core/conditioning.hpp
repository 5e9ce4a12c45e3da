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

#ifndef MSD_CORE_CONDITIONING_HPP_
#define MSD_CORE_CONDITIONING_HPP_

#include <vector>

#include "core/recording.hpp"

namespace msd {

// Pass band for the signal-conditioning filter. Edges are part of the pass
// band: only bins strictly below low_hz or strictly above high_hz are
// removed.
struct BandSpec {
  double low_hz = 0.5;
  double high_hz = 45.0;
  double rate_hz = 200.0;

  void Validate() const;
};

// Zero-phase band-pass: forward DFT over the whole signal, out-of-band bins
// set to zero (symmetrically for positive and negative frequencies), inverse
// DFT. No windowing and no padding, so output length equals input length and
// bin frequencies are exact multiples of rate/size. Signals of any length
// >= 2 are accepted. Non-finite samples are an error.
std::vector<double> FourierBandpass(const std::vector<double>& signal,
                                    const BandSpec& band);

// All channels filtered in place with a band fixed to the recording's rate.
Recording BandpassRecording(const Recording& rec, double low_hz, double high_hz);

// CNN input scaling: x -> clamp(x/100, -1, 1).
float NormalizeCnnSample(double microvolts);
// CNN-LSTM input scaling: x -> clamp((x+100)/200, 0, 1).
float NormalizeLstmSample(double microvolts);

std::vector<float> NormalizeCnn(const std::vector<double>& microvolts);
std::vector<float> NormalizeLstm(const std::vector<double>& microvolts);

}  // namespace msd

#endif  // MSD_CORE_CONDITIONING_HPP_
