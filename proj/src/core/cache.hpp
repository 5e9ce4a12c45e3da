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
// Conditioned-recording cache (.crec): carries band-passed signals at float32
// precision so the 16-bit EDF quantization is not applied twice. Text
// metadata block followed by raw little-endian float32 samples per channel.

#ifndef MSD_CORE_CACHE_HPP_
#define MSD_CORE_CACHE_HPP_

#include <string>

#include "core/recording.hpp"

namespace msd {

Recording LoadCacheFile(const std::string& path);
void SaveCacheFile(const Recording& rec, const std::string& path);

// True when the file starts with the cache magic. Used to sniff inputs that
// may be either .edf or .crec.
bool IsCacheFile(const std::string& path);

// Loads a recording from EDF or cache, sniffing the format.
Recording LoadRecordingAuto(const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_CACHE_HPP_
