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
// European Data Format container: 256-byte fixed-width ASCII header,
// 256 further bytes per signal, then data records of 16-bit little-endian
// two's-complement samples scaled to physical units through the per-signal
// digital/physical ranges. Only plain continuous EDF is handled here; EDF+
// annotations and discontinuous records are out of scope.

#ifndef MSD_CORE_EDF_HPP_
#define MSD_CORE_EDF_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/recording.hpp"

namespace msd {

// Parses an EDF byte stream. Every signal becomes one channel in file order.
// Rejects files whose signals carry unequal sampling rates and files whose
// data area is shorter than the header promises.
Recording ParseEdf(const std::vector<std::uint8_t>& bytes);

// Serializes a recording as EDF with 1-second data records. The sampling
// rate must be a positive integer and the duration a whole number of
// records. Quantization uses a symmetric physical range wide enough for the
// data, so a parse round-trip reproduces samples within one digital step.
std::vector<std::uint8_t> WriteEdf(const Recording& rec);

Recording LoadEdfFile(const std::string& path);
void SaveEdfFile(const Recording& rec, const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_EDF_HPP_
