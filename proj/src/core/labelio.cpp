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

#include "core/labelio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace msd {
namespace {

std::string Strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::int64_t ParseIndex(const std::string& text, int line_no) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    FailFormat("label file line " + std::to_string(line_no) +
               ": bad sample index '" + text + "'");
  return value;
}

}  // namespace

LabelTrack ParseLabels(const std::string& text, std::int64_t duration_samples) {
  if (duration_samples < 0) FailArgument("negative duration");
  LabelTrack track;
  track.labels.assign(static_cast<std::size_t>(duration_samples), Label::kWake);
  std::vector<bool> covered(static_cast<std::size_t>(duration_samples), false);

  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string body = Strip(line);
    if (body.empty() || body[0] == '#') continue;

    const auto c1 = body.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : body.find(',', c1 + 1);
    if (c2 == std::string::npos)
      FailFormat("label file line " + std::to_string(line_no) +
                 ": expected start,end,class");
    const std::int64_t start = ParseIndex(Strip(body.substr(0, c1)), line_no);
    const std::int64_t end =
        ParseIndex(Strip(body.substr(c1 + 1, c2 - c1 - 1)), line_no);
    const std::string class_name = Strip(body.substr(c2 + 1));

    Label label;
    if (!LabelFromName(class_name, &label))
      FailFormat("label file line " + std::to_string(line_no) +
                 ": unknown class '" + class_name + "'");
    if (start < 0 || start >= end || end > duration_samples)
      FailFormat("label file line " + std::to_string(line_no) +
                 ": interval [" + std::to_string(start) + "," +
                 std::to_string(end) + ") out of range");
    for (std::int64_t i = start; i < end; ++i) {
      if (covered[static_cast<std::size_t>(i)])
        FailFormat("label file line " + std::to_string(line_no) +
                   ": interval overlaps an earlier one at sample " +
                   std::to_string(i));
      covered[static_cast<std::size_t>(i)] = true;
      track.labels[static_cast<std::size_t>(i)] = label;
    }
  }
  return track;
}

std::string FormatLabels(const LabelTrack& track) {
  std::ostringstream out;
  const std::int64_t n = track.size();
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t j = i;
    while (j < n && track.labels[j] == track.labels[i]) ++j;
    if (track.labels[i] != Label::kWake)
      out << i << ',' << j << ',' << LabelName(track.labels[i]) << '\n';
    i = j;
  }
  return out.str();
}

LabelTrack LoadLabelFile(const std::string& path,
                         std::int64_t duration_samples) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FailIo("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseLabels(buffer.str(), duration_samples);
}

void SaveLabelFile(const LabelTrack& track, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  out << FormatLabels(track);
  if (!out) FailIo("short write to '" + path + "'");
}

}  // namespace msd
