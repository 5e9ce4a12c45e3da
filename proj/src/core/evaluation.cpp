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

#include "core/evaluation.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace msd {
namespace {

// Kappa from a binary contingency table. n11 counts positions where both
// sequences are "1". Degenerate p_e = 1 (both constant, same side) is 0.
double KappaFromBinaryCounts(std::int64_t n, std::int64_t n11, std::int64_t n00,
                             std::int64_t a1, std::int64_t b1) {
  const double dn = static_cast<double>(n);
  const double p_o = (static_cast<double>(n11) + static_cast<double>(n00)) / dn;
  const double pa1 = static_cast<double>(a1) / dn;
  const double pb1 = static_cast<double>(b1) / dn;
  const double p_e = pa1 * pb1 + (1.0 - pa1) * (1.0 - pb1);
  if (p_e >= 1.0) return 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace

double CohenKappa(std::span<const std::uint8_t> a,
                  std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) FailArgument("kappa needs equal-length sequences");
  if (a.empty()) FailArgument("kappa of empty sequences");
  std::array<std::int64_t, 256> count_a{}, count_b{};
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++count_a[a[i]];
    ++count_b[b[i]];
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (int k = 0; k < 256; ++k)
    p_e += (static_cast<double>(count_a[k]) / n) *
           (static_cast<double>(count_b[k]) / n);
  if (p_e >= 1.0) return 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double PerClassKappa(std::span<const std::uint8_t> pred,
                     std::span<const std::uint8_t> ref,
                     std::uint8_t class_code) {
  if (pred.size() != ref.size())
    FailArgument("kappa needs equal-length sequences");
  if (pred.empty()) FailArgument("kappa of empty sequences");
  std::int64_t n11 = 0, n00 = 0, p1 = 0, r1 = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == class_code;
    const bool r = ref[i] == class_code;
    p1 += p;
    r1 += r;
    n11 += p && r;
    n00 += !p && !r;
  }
  return KappaFromBinaryCounts(static_cast<std::int64_t>(pred.size()), n11, n00,
                               p1, r1);
}

KappaReport ConcatenatedReport(const std::vector<TrackPair>& pairs,
                               int n_classes, const std::string& arch_id) {
  if (pairs.empty()) FailArgument("no prediction/reference pairs");
  KappaReport report;
  report.arch_id = arch_id;
  report.n_classes = n_classes;
  report.confusion.assign(static_cast<std::size_t>(n_classes),
                          std::vector<std::int64_t>(
                              static_cast<std::size_t>(n_classes), 0));

  for (const TrackPair& pair : pairs) {
    if (pair.pred.size() != pair.ref.size())
      FailArgument("prediction/reference length mismatch");
    for (std::size_t i = 0; i < pair.pred.size(); ++i) {
      const int p = pair.pred[i];
      const int r = pair.ref[i];
      if (p >= n_classes || r >= n_classes)
        FailArgument("class code outside the report's class set");
      ++report.confusion[static_cast<std::size_t>(r)][static_cast<std::size_t>(p)];
      ++report.total_samples;
    }
  }

  std::int64_t trace = 0;
  for (int k = 0; k < n_classes; ++k)
    trace += report.confusion[static_cast<std::size_t>(k)]
                             [static_cast<std::size_t>(k)];
  report.accuracy =
      static_cast<double>(trace) / static_cast<double>(report.total_samples);

  for (int k = 0; k < n_classes; ++k) {
    std::int64_t tp = report.confusion[k][k];
    std::int64_t ref_k = 0, pred_k = 0;
    for (int j = 0; j < n_classes; ++j) {
      ref_k += report.confusion[k][j];
      pred_k += report.confusion[j][k];
    }
    const std::int64_t fn = ref_k - tp;
    const std::int64_t fp = pred_k - tp;
    const std::int64_t tn = report.total_samples - tp - fn - fp;
    report.kappa.push_back(KappaFromBinaryCounts(report.total_samples, tp, tn,
                                                 pred_k, ref_k));
    // Empty denominators are vacuously perfect.
    report.sensitivity.push_back(
        tp + fn == 0 ? 1.0
                     : static_cast<double>(tp) / static_cast<double>(tp + fn));
    report.specificity.push_back(
        tn + fp == 0 ? 1.0
                     : static_cast<double>(tn) / static_cast<double>(tn + fp));
  }
  return report;
}

std::vector<std::uint8_t> BinarizeMse(const LabelTrack& track) {
  std::vector<std::uint8_t> out(track.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = track.labels[i] == Label::kMse ? 1 : 0;
  return out;
}

const char* KappaReport::ClassName(int code) const {
  if (n_classes == 2) return code == 1 ? "MSE" : "W";
  return LabelName(static_cast<Label>(code));
}

std::string FormatKappaReport(const KappaReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "# msd kappa report v1\n";
  out << "# total=" << report.total_samples << "\n";

  out << "arch";
  for (int k = 0; k < report.n_classes; ++k) out << ',' << report.ClassName(k);
  out << '\n' << report.arch_id;
  for (int k = 0; k < report.n_classes; ++k) {
    std::snprintf(buf, sizeof buf, "%.6f", report.kappa[k]);
    out << ',' << buf;
  }
  out << '\n';

  std::snprintf(buf, sizeof buf, "%.6f", report.accuracy);
  out << "accuracy," << buf << '\n';
  out << "# confusion: rows=reference, cols=prediction\n";
  for (int r = 0; r < report.n_classes; ++r) {
    out << "confusion," << report.ClassName(r);
    for (int p = 0; p < report.n_classes; ++p)
      out << ',' << report.confusion[r][p];
    out << '\n';
  }
  out << "class,kappa,sensitivity,specificity\n";
  for (int k = 0; k < report.n_classes; ++k) {
    out << report.ClassName(k);
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", report.kappa[k],
                  report.sensitivity[k], report.specificity[k]);
    out << buf << '\n';
  }
  return out.str();
}

void SaveKappaReportFile(const KappaReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  out << FormatKappaReport(report);
  if (!out) FailIo("short write to '" + path + "'");
}

}  // namespace msd
