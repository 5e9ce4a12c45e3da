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

#include "core/cache.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/edf.hpp"
#include "core/error.hpp"

namespace msd {
namespace {

constexpr char kMagic[] = "MSDCREC 1\n";

static_assert(std::endian::native == std::endian::little,
              "cache I/O assumes a little-endian host");

std::string ReadLine(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) FailFormat("'" + path + "': truncated metadata");
  return line;
}

}  // namespace

Recording LoadCacheFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FailIo("cannot open '" + path + "'");

  std::string magic(sizeof kMagic - 1, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!in || magic != kMagic) FailFormat("'" + path + "': not a .crec cache");

  Recording rec;
  rec.id = ReadLine(in, path);
  rec.rate_hz = std::strtod(ReadLine(in, path).c_str(), nullptr);
  const long n_channels = std::strtol(ReadLine(in, path).c_str(), nullptr, 10);
  const long long duration =
      std::strtoll(ReadLine(in, path).c_str(), nullptr, 10);
  if (n_channels <= 0 || duration < 0 || rec.rate_hz <= 0)
    FailFormat("'" + path + "': bad cache metadata");

  rec.channels.resize(static_cast<std::size_t>(n_channels));
  for (auto& channel : rec.channels) channel.name = ReadLine(in, path);

  std::vector<float> buffer(static_cast<std::size_t>(duration));
  for (auto& channel : rec.channels) {
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!in) FailFormat("'" + path + "': truncated sample data");
    channel.samples.assign(buffer.begin(), buffer.end());
  }
  rec.Validate();
  return rec;
}

void SaveCacheFile(const Recording& rec, const std::string& path) {
  rec.Validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");

  char rate[32];
  std::snprintf(rate, sizeof rate, "%.17g", rec.rate_hz);
  out << kMagic << rec.id << '\n'
      << rate << '\n'
      << rec.channels.size() << '\n'
      << rec.duration_samples() << '\n';
  for (const auto& channel : rec.channels) out << channel.name << '\n';

  std::vector<float> buffer;
  for (const auto& channel : rec.channels) {
    buffer.assign(channel.samples.begin(), channel.samples.end());
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  }
  if (!out) FailIo("short write to '" + path + "'");
}

bool IsCacheFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::string magic(sizeof kMagic - 1, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  return in && magic == kMagic;
}

Recording LoadRecordingAuto(const std::string& path) {
  if (IsCacheFile(path)) return LoadCacheFile(path);
  return LoadEdfFile(path);
}

}  // namespace msd
