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

#ifndef MSD_CORE_EVALUATION_HPP_
#define MSD_CORE_EVALUATION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/recording.hpp"

namespace msd {

// Cohen's kappa (p_o - p_e) / (1 - p_e) with chance agreement from the two
// marginal distributions. When p_e is 1 (both sequences constant and equal)
// kappa is 0 by convention: agreement on a single-class recording carries no
// information beyond chance.
double CohenKappa(std::span<const std::uint8_t> a,
                  std::span<const std::uint8_t> b);

// One-vs-rest: both sequences binarized to (== class_code) before kappa.
double PerClassKappa(std::span<const std::uint8_t> pred,
                     std::span<const std::uint8_t> ref,
                     std::uint8_t class_code);

// Agreement metrics over concatenated recordings.
struct KappaReport {
  std::string arch_id;
  int n_classes = 0;
  std::int64_t total_samples = 0;
  double accuracy = 0.0;
  std::vector<double> kappa;                        // per class
  std::vector<double> sensitivity;                  // TP / (TP + FN)
  std::vector<double> specificity;                  // TN / (TN + FP)
  std::vector<std::vector<std::int64_t>> confusion; // [reference][prediction]

  const char* ClassName(int code) const;
};

struct TrackPair {
  std::span<const std::uint8_t> pred;
  std::span<const std::uint8_t> ref;
};

// Concatenates all pairs in order (counts are order-free) and computes the
// per-class kappas, confusion matrix, accuracy and the binarized
// sensitivity/specificity per class. Pair lengths must match.
KappaReport ConcatenatedReport(const std::vector<TrackPair>& pairs,
                               int n_classes, const std::string& arch_id);

// MSE -> 1, everything else -> 0; the reference view used when scoring the
// two-class CNN-LSTM output.
std::vector<std::uint8_t> BinarizeMse(const LabelTrack& track);

std::string FormatKappaReport(const KappaReport& report);
void SaveKappaReportFile(const KappaReport& report, const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_EVALUATION_HPP_
