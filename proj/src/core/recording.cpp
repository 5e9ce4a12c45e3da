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

#include "core/recording.hpp"

#include <unordered_set>

#include "core/error.hpp"

namespace msd {

const char* LabelName(Label label) {
  switch (label) {
    case Label::kWake: return "W";
    case Label::kMse: return "MSE";
    case Label::kMseCand: return "MSEc";
    case Label::kDrowsy: return "ED";
  }
  return "?";
}

bool LabelFromName(const std::string& name, Label* out) {
  if (name == "W") { *out = Label::kWake; return true; }
  if (name == "MSE") { *out = Label::kMse; return true; }
  if (name == "MSEc") { *out = Label::kMseCand; return true; }
  if (name == "ED") { *out = Label::kDrowsy; return true; }
  return false;
}

int Recording::ChannelIndex(const std::string& name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].name == name) return static_cast<int>(i);
  return -1;
}

void Recording::Validate() const {
  if (rate_hz <= 0.0) FailFormat("recording '" + id + "': non-positive rate");
  std::unordered_set<std::string> seen;
  for (const Channel& channel : channels) {
    if (!seen.insert(channel.name).second)
      FailFormat("recording '" + id + "': duplicate channel '" + channel.name +
                 "'");
    if (static_cast<std::int64_t>(channel.samples.size()) != duration_samples())
      FailFormat("recording '" + id + "': channels differ in length");
  }
}

Recording SelectChannels(const Recording& rec,
                         const std::vector<std::string>& names) {
  Recording out;
  out.id = rec.id;
  out.rate_hz = rec.rate_hz;
  out.channels.reserve(names.size());
  for (const std::string& name : names) {
    const int idx = rec.ChannelIndex(name);
    if (idx < 0)
      FailArgument("recording '" + rec.id + "' has no channel '" + name + "'");
    out.channels.push_back(rec.channels[static_cast<std::size_t>(idx)]);
  }
  return out;
}

}  // namespace msd
