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

#ifndef MSD_CORE_LABELIO_HPP_
#define MSD_CORE_LABELIO_HPP_

#include <cstdint>
#include <string>

#include "core/recording.hpp"

namespace msd {

// Scoring file format: one interval per line,
// `start_sample,end_sample_exclusive,class` with class in {W,MSE,MSEc,ED};
// `#` starts a comment line. Samples covered by no interval are wakefulness.
// Intervals must not overlap and must lie inside [0, duration_samples].
LabelTrack ParseLabels(const std::string& text, std::int64_t duration_samples);

// Inverse of ParseLabels: maximal non-wake runs, one interval per line.
std::string FormatLabels(const LabelTrack& track);

LabelTrack LoadLabelFile(const std::string& path, std::int64_t duration_samples);
void SaveLabelFile(const LabelTrack& track, const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_LABELIO_HPP_
