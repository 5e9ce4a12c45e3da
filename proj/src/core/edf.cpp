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

#include "core/edf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"

namespace msd {
namespace {

constexpr int kBaseHeaderBytes = 256;
constexpr int kPerSignalHeaderBytes = 256;

std::string Trimmed(const std::string& field) {
  const std::size_t begin = field.find_first_not_of(' ');
  if (begin == std::string::npos) return "";
  const std::size_t end = field.find_last_not_of(' ');
  return field.substr(begin, end - begin + 1);
}

struct HeaderCursor {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  std::string Take(std::size_t n) {
    if (pos + n > bytes.size()) FailFormat("EDF header truncated");
    std::string out(reinterpret_cast<const char*>(bytes.data()) + pos, n);
    for (char c : out)
      if (c != 0 && (c < 32 || c > 126))
        FailFormat("EDF header contains non-ASCII bytes");
    pos += n;
    return out;
  }
};

double ParseNumberField(const std::string& field, const char* what) {
  const std::string text = Trimmed(field);
  if (text.empty()) FailFormat(std::string("EDF header: empty ") + what);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    FailFormat(std::string("EDF header: bad ") + what + " field '" + text +
               "'");
  return value;
}

long ParseIntField(const std::string& field, const char* what) {
  const double value = ParseNumberField(field, what);
  const long rounded = std::lround(value);
  if (static_cast<double>(rounded) != value)
    FailFormat(std::string("EDF header: non-integer ") + what);
  return rounded;
}

// Fixed-width ASCII write; pads with spaces on the right.
void PutField(std::string& header, const std::string& text, std::size_t width) {
  if (text.size() > width) FailInternal("EDF field overflows its width");
  header += text;
  header.append(width - text.size(), ' ');
}

std::string FormatNumber(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

}  // namespace

Recording ParseEdf(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kBaseHeaderBytes) FailFormat("EDF shorter than a header");
  HeaderCursor cur{bytes};

  const std::string version = Trimmed(cur.Take(8));
  if (version != "0") FailFormat("unsupported EDF version '" + version + "'");
  cur.Take(80);  // patient identification
  const std::string recording_id = Trimmed(cur.Take(80));
  cur.Take(8);   // start date
  cur.Take(8);   // start time
  const long header_bytes = ParseIntField(cur.Take(8), "header byte count");
  const std::string reserved = Trimmed(cur.Take(44));
  if (reserved.rfind("EDF+D", 0) == 0)
    FailFormat("discontinuous EDF+ files are not supported");
  const long n_records = ParseIntField(cur.Take(8), "record count");
  const double record_seconds =
      ParseNumberField(cur.Take(8), "record duration");
  const long n_signals = ParseIntField(cur.Take(4), "signal count");

  if (n_signals <= 0) FailFormat("EDF declares no signals");
  if (record_seconds <= 0.0) FailFormat("EDF record duration must be > 0");
  if (header_bytes != kBaseHeaderBytes + n_signals * kPerSignalHeaderBytes)
    FailFormat("EDF header byte count does not match 256*(signals+1)");
  if (bytes.size() < static_cast<std::size_t>(header_bytes))
    FailFormat("EDF header truncated");

  std::vector<std::string> labels(n_signals);
  std::vector<double> phys_min(n_signals), phys_max(n_signals);
  std::vector<double> dig_min(n_signals), dig_max(n_signals);
  std::vector<long> samples_per_record(n_signals);

  for (long i = 0; i < n_signals; ++i) labels[i] = Trimmed(cur.Take(16));
  for (long i = 0; i < n_signals; ++i) cur.Take(80);  // transducer
  for (long i = 0; i < n_signals; ++i) cur.Take(8);   // physical dimension
  for (long i = 0; i < n_signals; ++i)
    phys_min[i] = ParseNumberField(cur.Take(8), "physical minimum");
  for (long i = 0; i < n_signals; ++i)
    phys_max[i] = ParseNumberField(cur.Take(8), "physical maximum");
  for (long i = 0; i < n_signals; ++i)
    dig_min[i] = ParseIntField(cur.Take(8), "digital minimum");
  for (long i = 0; i < n_signals; ++i)
    dig_max[i] = ParseIntField(cur.Take(8), "digital maximum");
  for (long i = 0; i < n_signals; ++i) cur.Take(80);  // prefiltering
  for (long i = 0; i < n_signals; ++i)
    samples_per_record[i] = ParseIntField(cur.Take(8), "samples per record");
  for (long i = 0; i < n_signals; ++i) cur.Take(32);  // reserved

  long record_samples = 0;
  for (long i = 0; i < n_signals; ++i) {
    if (samples_per_record[i] <= 0)
      FailFormat("EDF signal '" + labels[i] + "' has no samples per record");
    if (dig_max[i] <= dig_min[i])
      FailFormat("EDF signal '" + labels[i] + "' has an empty digital range");
    if (samples_per_record[i] != samples_per_record[0])
      FailFormat(
          "EDF signals carry different sampling rates; resampling is not "
          "supported");
    record_samples += samples_per_record[i];
  }

  const std::size_t record_bytes = static_cast<std::size_t>(record_samples) * 2;
  const std::size_t data_bytes = bytes.size() - static_cast<std::size_t>(header_bytes);
  long records = n_records;
  if (records < 0) {
    if (record_bytes == 0 || data_bytes % record_bytes != 0)
      FailFormat("EDF data area is not a whole number of records");
    records = static_cast<long>(data_bytes / record_bytes);
  } else if (data_bytes < static_cast<std::size_t>(records) * record_bytes) {
    FailFormat("EDF data records truncated");
  }

  Recording rec;
  rec.id = recording_id;
  rec.rate_hz = static_cast<double>(samples_per_record[0]) / record_seconds;
  rec.channels.resize(static_cast<std::size_t>(n_signals));
  for (long i = 0; i < n_signals; ++i) {
    rec.channels[i].name = labels[i];
    rec.channels[i].samples.resize(static_cast<std::size_t>(records) *
                                   samples_per_record[i]);
  }

  const std::uint8_t* p = bytes.data() + header_bytes;
  for (long r = 0; r < records; ++r) {
    for (long i = 0; i < n_signals; ++i) {
      const double gain =
          (phys_max[i] - phys_min[i]) / (dig_max[i] - dig_min[i]);
      double* out =
          rec.channels[i].samples.data() + r * samples_per_record[i];
      for (long s = 0; s < samples_per_record[i]; ++s) {
        const std::uint16_t raw =
            static_cast<std::uint16_t>(p[0] | (p[1] << 8));
        const std::int16_t digital = static_cast<std::int16_t>(raw);
        out[s] = (digital - dig_min[i]) * gain + phys_min[i];
        p += 2;
      }
    }
  }

  rec.Validate();
  return rec;
}

std::vector<std::uint8_t> WriteEdf(const Recording& rec) {
  rec.Validate();
  if (rec.channels.empty()) FailArgument("cannot write EDF with no channels");
  const double rate = rec.rate_hz;
  if (rate != std::floor(rate) || rate <= 0)
    FailArgument("EDF writer requires an integer sampling rate");
  const long spr = static_cast<long>(rate);  // 1-second records
  const std::int64_t duration = rec.duration_samples();
  if (duration % spr != 0)
    FailArgument("EDF writer requires a whole number of 1-second records");
  const long records = static_cast<long>(duration / spr);
  const long ns = static_cast<long>(rec.channels.size());

  // Symmetric physical range per channel, wide enough that nothing clips.
  std::vector<double> phys_range(ns);
  for (long i = 0; i < ns; ++i) {
    double peak = 1.0;
    for (double v : rec.channels[i].samples) peak = std::max(peak, std::fabs(v));
    phys_range[i] = std::ceil(peak);
  }

  std::string header;
  header.reserve(kBaseHeaderBytes + ns * kPerSignalHeaderBytes);
  PutField(header, "0", 8);
  PutField(header, "X X X X", 80);
  PutField(header, rec.id, 80);
  PutField(header, "01.01.00", 8);
  PutField(header, "00.00.00", 8);
  PutField(header, FormatNumber(kBaseHeaderBytes + ns * kPerSignalHeaderBytes),
           8);
  PutField(header, "", 44);
  PutField(header, FormatNumber(records), 8);
  PutField(header, "1", 8);
  PutField(header, FormatNumber(ns), 4);

  for (long i = 0; i < ns; ++i) PutField(header, rec.channels[i].name, 16);
  for (long i = 0; i < ns; ++i) PutField(header, "", 80);
  for (long i = 0; i < ns; ++i) PutField(header, "uV", 8);
  for (long i = 0; i < ns; ++i) PutField(header, FormatNumber(-phys_range[i]), 8);
  for (long i = 0; i < ns; ++i) PutField(header, FormatNumber(phys_range[i]), 8);
  for (long i = 0; i < ns; ++i) PutField(header, "-32768", 8);
  for (long i = 0; i < ns; ++i) PutField(header, "32767", 8);
  for (long i = 0; i < ns; ++i) PutField(header, "", 80);
  for (long i = 0; i < ns; ++i) PutField(header, FormatNumber(spr), 8);
  for (long i = 0; i < ns; ++i) PutField(header, "", 32);

  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() +
                static_cast<std::size_t>(records) * ns * spr * 2);
  for (long r = 0; r < records; ++r) {
    for (long i = 0; i < ns; ++i) {
      const double gain = (2.0 * phys_range[i]) / 65535.0;
      const double* in = rec.channels[i].samples.data() + r * spr;
      for (long s = 0; s < spr; ++s) {
        const double scaled = (in[s] + phys_range[i]) / gain - 32768.0;
        long digital = std::lround(scaled);
        digital = std::clamp(digital, -32768L, 32767L);
        const std::uint16_t raw =
            static_cast<std::uint16_t>(static_cast<std::int16_t>(digital));
        bytes.push_back(static_cast<std::uint8_t>(raw & 0xff));
        bytes.push_back(static_cast<std::uint8_t>(raw >> 8));
      }
    }
  }
  return bytes;
}

Recording LoadEdfFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FailIo("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  Recording rec = ParseEdf(bytes);
  rec.id = std::filesystem::path(path).stem().string();
  return rec;
}

void SaveEdfFile(const Recording& rec, const std::string& path) {
  const std::vector<std::uint8_t> bytes = WriteEdf(rec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) FailIo("short write to '" + path + "'");
}

}  // namespace msd
