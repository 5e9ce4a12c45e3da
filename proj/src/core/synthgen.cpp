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

#include "core/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "core/edf.hpp"
#include "core/error.hpp"
#include "core/labelio.hpp"
#include "core/rng.hpp"

namespace msd {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Span {
  std::int64_t start;
  std::int64_t end;
};

}  // namespace

void SynthConfig::Validate() const {
  if (duration_seconds <= 0 || rate_hz <= 0)
    FailArgument("synthetic recording needs positive duration and rate");
  if (mse_fraction <= 0 || mse_fraction >= 1)
    FailArgument("MSE fraction must be inside (0, 1)");
  if (mse_min_seconds <= 0 || mse_min_seconds > mse_max_seconds)
    FailArgument("bad MSE duration band");
  if (mse_max_seconds >= duration_seconds)
    FailArgument("recording too short for the requested MSE durations");
}

std::pair<Recording, LabelTrack> GenerateSynthetic(const SynthConfig& config,
                                                   std::uint64_t seed,
                                                   const std::string& id) {
  config.Validate();
  Rng rng(seed);
  const double rate = config.rate_hz;
  const auto duration =
      static_cast<std::int64_t>(std::llround(config.duration_seconds * rate));

  // Alternate wake gaps and episodes. The mean gap is solved from the target
  // fraction: E[mse] / (E[mse] + E[gap]) = fraction.
  const double expected_mse =
      0.5 * (config.mse_min_seconds + config.mse_max_seconds);
  const double expected_gap =
      expected_mse * (1.0 - config.mse_fraction) / config.mse_fraction;
  std::vector<Span> episodes;
  double cursor_s = 0.0;
  bool first = true;
  for (;;) {
    // The first gap starts the renewal process mid-cycle so short recordings
    // still see episodes.
    const double gap = first ? expected_gap * rng.NextUniform()
                             : expected_gap * (0.5 + rng.NextUniform());
    first = false;
    const double dur = config.mse_min_seconds +
                       (config.mse_max_seconds - config.mse_min_seconds) *
                           rng.NextUniform();
    const double start_s = cursor_s + gap;
    if (start_s + dur >= config.duration_seconds) break;
    episodes.push_back(
        {static_cast<std::int64_t>(std::llround(start_s * rate)),
         static_cast<std::int64_t>(std::llround((start_s + dur) * rate))});
    cursor_s = start_s + dur;
  }

  LabelTrack labels;
  labels.labels.assign(static_cast<std::size_t>(duration), Label::kWake);
  for (const Span& span : episodes)
    for (std::int64_t t = span.start; t < span.end; ++t)
      labels.labels[static_cast<std::size_t>(t)] = Label::kMse;

  Recording rec;
  rec.id = id;
  rec.rate_hz = rate;
  rec.channels.resize(4);
  rec.channels[0].name = kChannelO1M2;
  rec.channels[1].name = kChannelO2M1;
  rec.channels[2].name = kChannelE1M1;
  rec.channels[3].name = kChannelE2M1;
  for (auto& channel : rec.channels)
    channel.samples.assign(static_cast<std::size_t>(duration), 0.0);

  // EEG: a shared rhythm per state with independent per-channel noise. The
  // phase re-draws at every state change.
  double phase = rng.NextUniform() * kTwoPi;
  bool was_mse = false;
  for (std::int64_t t = 0; t < duration; ++t) {
    const bool is_mse = labels.labels[static_cast<std::size_t>(t)] == Label::kMse;
    if (is_mse != was_mse) {
      phase = rng.NextUniform() * kTwoPi;
      was_mse = is_mse;
    }
    const double hz = is_mse ? 5.0 : 10.0;
    const double amp = is_mse ? config.mse_amp_uv : config.wake_amp_uv;
    const double wave = amp * std::sin(kTwoPi * hz * (t / rate) + phase);
    rec.channels[0].samples[t] = wave + config.noise_uv * rng.NextNormal();
    rec.channels[1].samples[t] =
        0.9 * wave + config.noise_uv * rng.NextNormal();
  }

  // EOG: low-amplitude noise plus slow 0.3 Hz waves during and just before
  // each episode, with opposite polarity on the two channels.
  for (std::int64_t t = 0; t < duration; ++t) {
    rec.channels[2].samples[t] = 0.5 * config.noise_uv * rng.NextNormal();
    rec.channels[3].samples[t] = 0.5 * config.noise_uv * rng.NextNormal();
  }
  const auto lead =
      static_cast<std::int64_t>(std::llround(config.eog_lead_seconds * rate));
  for (const Span& span : episodes) {
    const std::int64_t begin = std::max<std::int64_t>(0, span.start - lead);
    for (std::int64_t t = begin; t < span.end; ++t) {
      const double wave =
          config.eog_amp_uv *
          std::sin(kTwoPi * 0.3 * ((t - begin) / rate));
      rec.channels[2].samples[t] += wave;
      rec.channels[3].samples[t] -= 0.9 * wave;
    }
  }
  return {std::move(rec), std::move(labels)};
}

void GenerateSyntheticCorpus(const std::string& dir, int n_recordings,
                             const SynthConfig& config, std::uint64_t seed) {
  if (n_recordings <= 0) FailArgument("corpus needs at least one recording");
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (int i = 0; i < n_recordings; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth%02d", i);
    auto [rec, labels] =
        GenerateSynthetic(config, seed + static_cast<std::uint64_t>(i), name);
    SaveEdfFile(rec, (fs::path(dir) / (std::string(name) + ".edf")).string());
    SaveLabelFile(labels,
                  (fs::path(dir) / (std::string(name) + ".labels")).string());
  }
}

}  // namespace msd
