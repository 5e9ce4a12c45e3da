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

#include "core/segmentation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/architectures.hpp"
#include "core/conditioning.hpp"
#include "core/dataset.hpp"
#include "core/error.hpp"

namespace msd {
namespace {

std::uint8_t ArgmaxRow(const float* row, int k) {
  int best = 0;
  for (int i = 1; i < k; ++i)
    if (row[i] > row[best]) best = i;  // ties keep the lower code
  return static_cast<std::uint8_t>(best);
}

void FillLabelsFromProbs(PredictionTrack& track) {
  const std::int64_t n = track.probs.dim(0);
  track.labels.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    track.labels[static_cast<std::size_t>(i)] =
        ArgmaxRow(track.probs.data() + i * track.n_classes, track.n_classes);
}

const char* TwoClassName(int code) { return code == 1 ? "MSE" : "W"; }

}  // namespace

const char* PredictionTrack::ClassName(int code) const {
  if (n_classes == 2) return TwoClassName(code);
  return LabelName(static_cast<Label>(code));
}

Tensor<float> NormalizeForSpec(const Recording& conditioned,
                               const NetworkSpec& spec) {
  const Recording selected = SelectChannels(conditioned, EvalChannels(spec));
  const std::int64_t duration = selected.duration_samples();
  const auto channels = static_cast<std::int64_t>(selected.channels.size());
  Tensor<float> signal({duration, channels});
  for (std::int64_t c = 0; c < channels; ++c) {
    const std::vector<double>& samples =
        selected.channels[static_cast<std::size_t>(c)].samples;
    for (std::int64_t t = 0; t < duration; ++t)
      signal.At(t, c) = spec.family == Family::kCnnLstm
                            ? NormalizeLstmSample(samples[t])
                            : NormalizeCnnSample(samples[t]);
  }
  return signal;
}

// ---------------------------------------------------------------------------
// Naive dense prediction.

PredictionTrack PredictDenseNaive(const Network<float>& net,
                                  const Tensor<float>& signal,
                                  ThreadPool* pool) {
  const NetworkSpec& spec = net.spec();
  if (spec.family != Family::kCnn)
    FailArgument("dense sliding-window prediction is CNN-only");
  const std::int64_t duration = signal.dim(0);
  const std::int64_t channels = signal.dim(1);
  if (channels != spec.n_channels)
    FailArgument("signal channel count does not match the network");

  PredictionTrack track;
  track.arch_id = spec.arch_id;
  track.n_classes = spec.n_classes;
  track.resolution_samples = 1;
  track.probs.Resize({duration, spec.n_classes});

  std::vector<int> plan(static_cast<std::size_t>(channels));
  for (std::int64_t c = 0; c < channels; ++c) plan[c] = static_cast<int>(c);

  constexpr std::int64_t kChunk = 256;
  Tensor<float> windows;
  for (std::int64_t begin = 0; begin < duration; begin += kChunk) {
    const std::int64_t count = std::min(kChunk, duration - begin);
    windows.Resize({count, spec.window_samples, channels});
    for (std::int64_t i = 0; i < count; ++i)
      ExtractWindow(signal, begin + i, spec.window_samples, plan,
                    windows.data() + i * spec.window_samples * channels);
    const Tensor<float> probs =
        net.Forward(windows, RunMode::kInfer, nullptr, pool, nullptr);
    std::copy(probs.data(), probs.data() + probs.numel(),
              track.probs.data() + begin * spec.n_classes);
  }
  FillLabelsFromProbs(track);
  return track;
}

// ---------------------------------------------------------------------------
// Shared-computation dense prediction.
//
// A window starting at padded offset s reaches, after p pooling stages, the
// branch whose phase history is s mod 2^p, at element (s - s mod 2^p) / 2^p.
// Convolutions leave that index map unchanged, so running every stage once
// per branch over the full padded signal reproduces each window's head input
// exactly; the per-sample results are interleaved back by residue.

namespace {

struct BranchState {
  std::vector<Tensor<float>> data;  // each [1, len, channels]
  std::vector<std::int64_t> base;   // padded offset of element 0
  std::int64_t stride = 1;          // 2^pools
};

template <typename Fn>
void ForEachBranch(BranchState& branches, ThreadPool* pool, const Fn& fn) {
  const auto n = static_cast<std::int64_t>(branches.data.size());
  // Few big branches run their kernels with the pool; many small branches
  // are spread across the pool instead.
  if (pool == nullptr || n < 4) {
    for (std::int64_t b = 0; b < n; ++b) fn(b, pool);
  } else {
    ParallelFor(*pool, n, [&](int, std::int64_t begin, std::int64_t end) {
      for (std::int64_t b = begin; b < end; ++b) fn(b, nullptr);
    });
  }
}

// Phase-φ pool: out[j] = max(in[2j+φ], in[2j+φ+1]), matching the strict
// greater-than winner rule of the per-window pool.
Tensor<float> PoolPhase(const Tensor<float>& in, int phase) {
  const std::int64_t t_in = in.dim(1), channels = in.dim(2);
  const std::int64_t t_out = (t_in - phase) / 2;
  Tensor<float> out({1, t_out, channels});
  for (std::int64_t j = 0; j < t_out; ++j) {
    const float* first = in.data() + (2 * j + phase) * channels;
    const float* second = first + channels;
    float* orow = out.data() + j * channels;
    for (std::int64_t c = 0; c < channels; ++c)
      orow[c] = second[c] > first[c] ? second[c] : first[c];
  }
  return out;
}

// Zero-padded conv evaluated where the per-window temporal size is 1: within
// a window both neighbours of the single sample are padding, so only the
// middle kernel tap contributes. Branch neighbours belong to other windows
// and must not leak in.
Tensor<float> MiddleTapConv(const Tensor<float>& in, const Tensor<float>& kernel,
                            const Tensor<float>& bias) {
  const std::int64_t t = in.dim(1), c_in = in.dim(2), c_out = kernel.dim(2);
  Tensor<float> out({1, t, c_out});
  const float* middle = kernel.data() + c_in * c_out;  // tap d=1
  for (std::int64_t row = 0; row < t; ++row) {
    const float* irow = in.data() + row * c_in;
    float* orow = out.data() + row * c_out;
    for (std::int64_t co = 0; co < c_out; ++co) orow[co] = bias[co];
    for (std::int64_t ci = 0; ci < c_in; ++ci) {
      const float x = irow[ci];
      const float* krow = middle + ci * c_out;
      for (std::int64_t co = 0; co < c_out; ++co) orow[co] += x * krow[co];
    }
  }
  return out;
}

}  // namespace

PredictionTrack PredictDenseFast(const Network<float>& net,
                                 const Tensor<float>& signal,
                                 ThreadPool* pool) {
  const NetworkSpec& spec = net.spec();
  if (spec.family != Family::kCnn)
    FailArgument("dense sliding-window prediction is CNN-only");
  const std::int64_t duration = signal.dim(0);
  const std::int64_t channels = signal.dim(1);
  if (channels != spec.n_channels)
    FailArgument("signal channel count does not match the network");
  const std::int64_t window = spec.window_samples;

  // Replicate-padded signal: window of sample c starts at padded offset c.
  const std::int64_t pad_left = window / 2;
  BranchState branches;
  {
    Tensor<float> padded({1, duration + window - 1, channels});
    for (std::int64_t t = 0; t < padded.dim(1); ++t) {
      const std::int64_t src =
          std::clamp<std::int64_t>(t - pad_left, 0, duration - 1);
      std::copy(signal.data() + src * channels,
                signal.data() + (src + 1) * channels,
                padded.data() + t * channels);
    }
    branches.data.push_back(std::move(padded));
    branches.base.push_back(0);
  }

  const auto& params = net.params();
  const auto& layers = spec.layers;
  std::size_t head_begin = layers.size();
  int param_cursor = 0;
  std::vector<int> first_param(layers.size(), -1);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    switch (layers[i].kind) {
      case LayerKind::kConv1d:
      case LayerKind::kDense:
      case LayerKind::kSoftmax:
        first_param[i] = param_cursor;
        param_cursor += 2;
        break;
      case LayerKind::kBatchNorm:
        first_param[i] = param_cursor;
        param_cursor += 4;
        break;
      case LayerKind::kLstm:
        first_param[i] = param_cursor;
        param_cursor += 3;
        break;
      default:
        break;
    }
  }

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    if (layer.kind == LayerKind::kFlatten) {
      head_begin = i + 1;
      break;
    }
    const int base = first_param[i];
    switch (layer.kind) {
      case LayerKind::kGaussianNoise:
        break;  // inference identity
      case LayerKind::kConv1d:
        if (layer.same_pad) {
          if (net.shapes()[i].temporal != 1)
            FailInternal("zero-padded conv supported only at temporal size 1");
          ForEachBranch(branches, pool, [&](std::int64_t b, ThreadPool*) {
            branches.data[b] = MiddleTapConv(branches.data[b],
                                             params[base].value,
                                             params[base + 1].value);
          });
        } else {
          ForEachBranch(branches, pool, [&](std::int64_t b, ThreadPool* inner) {
            if (branches.data[b].dim(1) < 3)
              FailInternal("branch shorter than the conv filter");
            Tensor<float> out;
            nn::Conv1dForward(branches.data[b], params[base].value,
                              params[base + 1].value, false, inner, out);
            branches.data[b] = std::move(out);
          });
        }
        break;
      case LayerKind::kBatchNorm:
        ForEachBranch(branches, pool, [&](std::int64_t b, ThreadPool* inner) {
          Tensor<float> out;
          nn::BatchNormForwardInfer(
              branches.data[b], params[base].value, params[base + 1].value,
              static_cast<float>(kBatchNormEps), params[base + 2].value,
              params[base + 3].value, inner, out);
          branches.data[b] = std::move(out);
        });
        break;
      case LayerKind::kRelu:
        ForEachBranch(branches, pool, [&](std::int64_t b, ThreadPool* inner) {
          Tensor<float> out;
          nn::ReluForward(branches.data[b], inner, out);
          branches.data[b] = std::move(out);
        });
        break;
      case LayerKind::kMaxPool: {
        BranchState next;
        next.stride = branches.stride * 2;
        next.data.resize(branches.data.size() * 2);
        next.base.resize(branches.base.size() * 2);
        const auto n = static_cast<std::int64_t>(branches.data.size());
        ForEachBranch(branches, pool, [&](std::int64_t b, ThreadPool*) {
          next.data[2 * b] = PoolPhase(branches.data[b], 0);
          next.base[2 * b] = branches.base[b];
          next.data[2 * b + 1] = PoolPhase(branches.data[b], 1);
          next.base[2 * b + 1] = branches.base[b] + branches.stride;
        });
        (void)n;
        branches = std::move(next);
        break;
      }
      default:
        FailInternal("unexpected layer before flatten");
    }
  }
  if (head_begin == layers.size()) FailInternal("network has no flatten layer");

  // Interleave: sample c lives in the branch with base c mod stride at
  // element c / stride.
  const std::int64_t stride = branches.stride;
  std::vector<std::int64_t> by_residue(static_cast<std::size_t>(stride), -1);
  for (std::size_t b = 0; b < branches.base.size(); ++b) {
    const std::int64_t residue = branches.base[b];
    if (residue < 0 || residue >= stride || by_residue[residue] != -1)
      FailInternal("branch residue bookkeeping broke");
    by_residue[static_cast<std::size_t>(residue)] = static_cast<std::int64_t>(b);
  }
  const std::int64_t feat = branches.data[0].dim(2);
  Tensor<float> features({duration, feat});
  auto gather = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t c = begin; c < end; ++c) {
      const std::int64_t b = by_residue[static_cast<std::size_t>(c % stride)];
      const std::int64_t g = c / stride;
      const Tensor<float>& branch = branches.data[static_cast<std::size_t>(b)];
      if (g >= branch.dim(1)) FailInternal("branch too short for gather");
      std::copy(branch.data() + g * feat, branch.data() + (g + 1) * feat,
                features.data() + c * feat);
    }
  };
  if (pool)
    ParallelFor(*pool, duration, gather);
  else
    gather(0, 0, duration);

  // Dense head per sample.
  Tensor<float> cur = std::move(features);
  for (std::size_t i = head_begin; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    const int base = first_param[i];
    Tensor<float> out;
    switch (layer.kind) {
      case LayerKind::kDropout:
        continue;  // inference identity
      case LayerKind::kDense:
        nn::DenseForward(cur, params[base].value, params[base + 1].value, pool,
                         out);
        break;
      case LayerKind::kRelu:
        nn::ReluForward(cur, pool, out);
        break;
      case LayerKind::kSoftmax: {
        Tensor<float> logits;
        nn::DenseForward(cur, params[base].value, params[base + 1].value, pool,
                         logits);
        nn::SoftmaxForward(logits, pool, out);
        break;
      }
      default:
        FailInternal("unexpected layer in the dense head");
    }
    cur = std::move(out);
  }

  PredictionTrack track;
  track.arch_id = spec.arch_id;
  track.n_classes = spec.n_classes;
  track.resolution_samples = 1;
  track.probs = std::move(cur);
  FillLabelsFromProbs(track);
  return track;
}

// ---------------------------------------------------------------------------
// CNN-LSTM sequence prediction.

PredictionTrack PredictCnnLstm(const Network<float>& net,
                               const Tensor<float>& signal, ThreadPool* pool) {
  const NetworkSpec& spec = net.spec();
  if (spec.family != Family::kCnnLstm)
    FailArgument("sequence prediction needs a CNN-LSTM network");
  const std::int64_t duration = signal.dim(0);
  const std::int64_t channels = signal.dim(1);
  const std::int64_t window = spec.window_samples;
  const std::int64_t stride = spec.window_stride;
  if (channels != spec.n_channels)
    FailArgument("signal channel count does not match the network");
  if (duration < window)
    FailArgument("recording shorter than one encoder window");

  const std::int64_t n_windows = (duration - window) / stride + 1;
  Tensor<float> input({1, n_windows, window, channels});
  for (std::int64_t w = 0; w < n_windows; ++w)
    std::copy(signal.data() + w * stride * channels,
              signal.data() + (w * stride + window) * channels,
              input.data() + w * window * channels);

  const Tensor<float> window_probs =
      net.Forward(input, RunMode::kInfer, nullptr, pool, nullptr);

  PredictionTrack track;
  track.arch_id = spec.arch_id;
  track.n_classes = spec.n_classes;
  track.resolution_samples = stride;
  track.probs.Resize({duration, spec.n_classes});
  track.labels.resize(static_cast<std::size_t>(duration));
  const std::int64_t half = stride / 2;
  for (std::int64_t w = 0; w < n_windows; ++w) {
    const std::int64_t center = w * stride + window / 2;
    const std::int64_t begin = w == 0 ? 0 : center - half;
    const std::int64_t end = w == n_windows - 1 ? duration : center + half;
    const float* row = window_probs.data() + w * spec.n_classes;
    const std::uint8_t code = ArgmaxRow(row, spec.n_classes);
    for (std::int64_t t = begin; t < end; ++t) {
      std::copy(row, row + spec.n_classes,
                track.probs.data() + t * spec.n_classes);
      track.labels[static_cast<std::size_t>(t)] = code;
    }
  }
  return track;
}

PredictionTrack PredictRecording(const Network<float>& net,
                                 const Recording& conditioned, bool naive,
                                 ThreadPool* pool) {
  const Tensor<float> signal = NormalizeForSpec(conditioned, net.spec());
  if (net.spec().family == Family::kCnnLstm)
    return PredictCnnLstm(net, signal, pool);
  return naive ? PredictDenseNaive(net, signal, pool)
               : PredictDenseFast(net, signal, pool);
}

// ---------------------------------------------------------------------------
// Post-processing.

PredictionTrack CoarsenMajority(const PredictionTrack& track,
                                std::int64_t interval_samples) {
  if (interval_samples < 1) FailArgument("interval must be >= 1 sample");
  const std::int64_t duration = track.duration();
  const int k = track.n_classes;

  PredictionTrack out;
  out.arch_id = track.arch_id;
  out.n_classes = k;
  out.resolution_samples = interval_samples;
  out.probs.Resize({duration, k});
  out.labels.resize(static_cast<std::size_t>(duration));

  // Tie rank prefers sleep: MSE, then the borderline classes, wake last.
  const auto rank = [k](int code) { return code == 0 ? k : code; };

  std::vector<std::int64_t> counts(static_cast<std::size_t>(k));
  std::vector<double> mean(static_cast<std::size_t>(k));
  for (std::int64_t begin = 0; begin < duration; begin += interval_samples) {
    const std::int64_t end = std::min(duration, begin + interval_samples);
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::int64_t t = begin; t < end; ++t) {
      ++counts[track.labels[static_cast<std::size_t>(t)]];
      for (int c = 0; c < k; ++c) mean[c] += track.probs[t * k + c];
    }
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (counts[c] > counts[best] ||
          (counts[c] == counts[best] && rank(c) < rank(best)))
        best = c;
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (std::int64_t t = begin; t < end; ++t) {
      out.labels[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(best);
      for (int c = 0; c < k; ++c)
        out.probs[t * k + c] = static_cast<float>(mean[c] * inv);
    }
  }
  return out;
}

std::vector<std::uint8_t> ApplyDurationCriteria(
    const std::vector<std::uint8_t>& labels, double rate_hz, double min_seconds,
    double max_seconds) {
  if (rate_hz <= 0) FailArgument("rate must be positive");
  (void)max_seconds;  // over-long runs are kept; flagging is episode-level
  const auto min_samples =
      static_cast<std::int64_t>(std::lround(min_seconds * rate_hz));
  std::vector<std::uint8_t> out = labels;
  const auto n = static_cast<std::int64_t>(labels.size());
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t j = i;
    while (j < n && labels[j] == labels[i]) ++j;
    if (labels[i] == static_cast<std::uint8_t>(Label::kMse) &&
        j - i < min_samples)
      std::fill(out.begin() + i, out.begin() + j,
                static_cast<std::uint8_t>(Label::kWake));
    i = j;
  }
  return out;
}

std::vector<Episode> EpisodesFromLabels(
    const std::vector<std::uint8_t>& labels) {
  std::vector<Episode> episodes;
  const auto n = static_cast<std::int64_t>(labels.size());
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t j = i;
    while (j < n && labels[j] == labels[i]) ++j;
    episodes.push_back({i, j, labels[i], ""});
    i = j;
  }
  return episodes;
}

void FlagLongSleepEpisodes(std::vector<Episode>& episodes, double rate_hz,
                           double max_seconds) {
  const auto max_samples =
      static_cast<std::int64_t>(std::lround(max_seconds * rate_hz));
  for (Episode& episode : episodes)
    if (episode.code == static_cast<std::uint8_t>(Label::kMse) &&
        episode.end_sample - episode.start_sample > max_samples)
      episode.flag = "sleep>15s";
}

// ---------------------------------------------------------------------------
// Files.

void SavePredictionFile(const PredictionTrack& track, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  out << "# msd prediction v1\n";
  out << "# arch=" << track.arch_id << "\n";
  out << "# classes=" << track.n_classes << "\n";
  out << "# resolution=" << track.resolution_samples << "\n";
  out << "# duration=" << track.duration() << "\n";
  out << "index,label";
  for (int c = 0; c < track.n_classes; ++c) out << ",p" << track.ClassName(c);
  out << "\n";
  char buf[32];
  for (std::int64_t i = 0; i < track.duration();
       i += track.resolution_samples) {
    out << i << ',' << track.ClassName(track.labels[static_cast<std::size_t>(i)]);
    for (int c = 0; c < track.n_classes; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g",
                    static_cast<double>(track.probs[i * track.n_classes + c]));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) FailIo("short write to '" + path + "'");
}

PredictionTrack LoadPredictionFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FailIo("cannot open '" + path + "'");
  PredictionTrack track;
  std::int64_t duration = -1;
  std::string line;
  bool saw_header = false;

  while (std::getline(in, line)) {
    if (line.rfind("# msd prediction", 0) == 0) {
      saw_header = true;
      continue;
    }
    if (line.rfind("# arch=", 0) == 0) {
      track.arch_id = line.substr(7);
      continue;
    }
    if (line.rfind("# classes=", 0) == 0) {
      track.n_classes = std::stoi(line.substr(10));
      continue;
    }
    if (line.rfind("# resolution=", 0) == 0) {
      track.resolution_samples = std::stoll(line.substr(13));
      continue;
    }
    if (line.rfind("# duration=", 0) == 0) {
      duration = std::stoll(line.substr(11));
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("index,", 0) == 0)
      continue;
    if (!saw_header || track.n_classes <= 0 || duration < 0)
      FailFormat("'" + path + "': missing prediction header");
    if (track.probs.numel() == 0) {
      track.probs.Resize({duration, track.n_classes});
      track.labels.assign(static_cast<std::size_t>(duration), 0);
    }

    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    const std::int64_t index = std::stoll(field);
    std::getline(row, field, ',');
    int code = -1;
    if (track.n_classes == 2) {
      code = field == "MSE" ? 1 : (field == "W" ? 0 : -1);
    } else {
      Label label;
      if (LabelFromName(field, &label)) code = static_cast<int>(label);
    }
    if (code < 0) FailFormat("'" + path + "': unknown class '" + field + "'");
    std::vector<float> probs(static_cast<std::size_t>(track.n_classes));
    for (int c = 0; c < track.n_classes; ++c) {
      if (!std::getline(row, field, ','))
        FailFormat("'" + path + "': short probability row");
      probs[static_cast<std::size_t>(c)] = std::strtof(field.c_str(), nullptr);
    }
    const std::int64_t end =
        std::min(duration, index + track.resolution_samples);
    if (index < 0 || index >= duration)
      FailFormat("'" + path + "': row index out of range");
    for (std::int64_t t = index; t < end; ++t) {
      track.labels[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(code);
      for (int c = 0; c < track.n_classes; ++c)
        track.probs[t * track.n_classes + c] = probs[static_cast<std::size_t>(c)];
    }
  }
  if (track.probs.numel() == 0)
    FailFormat("'" + path + "': no prediction rows");
  return track;
}

void SaveEpisodesFile(const std::vector<Episode>& episodes, int n_classes,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  out << "# msd episodes v1\n";
  out << "start_sample,end_sample_exclusive,class,flag\n";
  for (const Episode& episode : episodes) {
    const char* name = n_classes == 2
                           ? TwoClassName(episode.code)
                           : LabelName(static_cast<Label>(episode.code));
    out << episode.start_sample << ',' << episode.end_sample << ',' << name
        << ',' << episode.flag << '\n';
  }
  if (!out) FailIo("short write to '" + path + "'");
}

}  // namespace msd
