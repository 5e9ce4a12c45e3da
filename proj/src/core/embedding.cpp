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

#include "core/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/segmentation.hpp"

namespace msd {

FeatureSet ExtractFeatures(const Network<float>& net,
                           const Recording& conditioned,
                           const LabelTrack* labels, std::int64_t stride,
                           ThreadPool* pool) {
  const NetworkSpec& spec = net.spec();
  if (spec.feature_layer < 0)
    FailArgument("network '" + spec.arch_id + "' has no feature layer; "
                 "use the embedding-enabled architecture");
  if (stride < 1) FailArgument("feature stride must be >= 1");

  const Tensor<float> signal = NormalizeForSpec(conditioned, spec);
  const std::int64_t duration = signal.dim(0);
  if (labels != nullptr && labels->size() != duration)
    FailArgument("label track length does not match the recording");

  const std::int64_t n = (duration + stride - 1) / stride;
  FeatureSet set;
  set.labels.resize(static_cast<std::size_t>(n), Label::kWake);
  set.sample_indices.resize(static_cast<std::size_t>(n));

  std::vector<int> plan(static_cast<std::size_t>(spec.n_channels));
  for (int c = 0; c < spec.n_channels; ++c) plan[static_cast<std::size_t>(c)] = c;

  constexpr std::int64_t kChunk = 64;
  Tensor<float> windows;
  for (std::int64_t begin = 0; begin < n; begin += kChunk) {
    const std::int64_t count = std::min(kChunk, n - begin);
    windows.Resize({count, spec.window_samples, spec.n_channels});
    for (std::int64_t i = 0; i < count; ++i) {
      const std::int64_t center = (begin + i) * stride;
      set.sample_indices[static_cast<std::size_t>(begin + i)] = center;
      if (labels != nullptr)
        set.labels[static_cast<std::size_t>(begin + i)] =
            labels->labels[static_cast<std::size_t>(center)];
      ExtractWindow(signal, center, spec.window_samples, plan,
                    windows.data() + i * spec.window_samples * spec.n_channels);
    }
    const Tensor<float> features = net.ForwardFeatures(windows, pool);
    if (set.vectors.numel() == 0) set.vectors.Resize({n, features.dim(1)});
    std::copy(features.data(), features.data() + features.numel(),
              set.vectors.data() + begin * features.dim(1));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Exact t-SNE (all-pairs affinities, adaptive-gain gradient descent).

namespace {

// Entropy (nats) and normalized row for a given precision beta.
double RowEntropy(const double* dists, std::int64_t n, std::int64_t row,
                  double beta, double* out) {
  double sum = 0.0;
  for (std::int64_t j = 0; j < n; ++j)
    out[j] = j == row ? 0.0 : std::exp(-dists[j] * beta);
  for (std::int64_t j = 0; j < n; ++j) sum += out[j];
  if (sum <= 0.0) sum = 1e-300;
  double entropy = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    out[j] /= sum;
    if (out[j] > 1e-300) entropy -= out[j] * std::log(out[j]);
  }
  return entropy;
}

}  // namespace

void GaussianAffinityRow(const Tensor<double>& sq_dists, std::int64_t row,
                         double perplexity, double* out_row) {
  const std::int64_t n = sq_dists.dim(0);
  const double target = std::log(perplexity);
  const double* dists = sq_dists.data() + row * n;
  double beta = 1.0, beta_min = 0.0, beta_max = 0.0;
  bool has_min = false, has_max = false;
  for (int it = 0; it < 200; ++it) {
    const double entropy = RowEntropy(dists, n, row, beta, out_row);
    const double diff = entropy - target;
    if (std::fabs(diff) < 1e-6) break;
    if (diff > 0) {  // too flat, sharpen
      beta_min = beta;
      has_min = true;
      beta = has_max ? 0.5 * (beta + beta_max) : beta * 2.0;
    } else {
      beta_max = beta;
      has_max = true;
      beta = has_min ? 0.5 * (beta + beta_min) : beta * 0.5;
    }
  }
}

TsneResult Tsne(const Tensor<float>& features, const TsneConfig& config,
                std::uint64_t seed, ThreadPool* pool) {
  const std::int64_t n = features.dim(0);
  const std::int64_t dim = features.dim(1);
  if (n < 4) FailArgument("t-SNE needs at least 4 points");
  if (config.perplexity >= static_cast<double>(n))
    FailArgument("perplexity must be smaller than the point count");
  if (config.perplexity < 1.0) FailArgument("perplexity must be >= 1");

  // Pairwise squared distances.
  Tensor<double> sq({n, n});
  auto dist_rows = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        const float* a = features.data() + i * dim;
        const float* b = features.data() + j * dim;
        for (std::int64_t d = 0; d < dim; ++d) {
          const double delta = static_cast<double>(a[d]) - b[d];
          acc += delta * delta;
        }
        sq.At(i, j) = acc;
      }
    }
  };
  if (pool)
    ParallelFor(*pool, n, dist_rows);
  else
    dist_rows(0, 0, n);

  // Conditional affinities with bisected bandwidths, then symmetrize.
  Tensor<double> p({n, n});
  auto affinity_rows = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      GaussianAffinityRow(sq, i, config.perplexity, p.data() + i * n);
  };
  if (pool)
    ParallelFor(*pool, n, affinity_rows);
  else
    affinity_rows(0, 0, n);
  Tensor<double> pj({n, n});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      pj.At(i, j) =
          std::max((p.At(i, j) + p.At(j, i)) / (2.0 * static_cast<double>(n)),
                   1e-12);

  Rng rng(seed);
  Tensor<double> y({n, 2});
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] = rng.NextNormal(0.0, 1e-4);

  Tensor<double> increment({n, 2});
  Tensor<double> gains({n, 2});
  gains.Fill(1.0);
  Tensor<double> qnum({n, n});
  Tensor<double> grad({n, 2});

  const auto compute_q = [&]() -> double {
    std::vector<double> slot_sums(kParallelSlots, 0.0);
    auto rows = [&](int slot, std::int64_t begin, std::int64_t end) {
      double local = 0.0;
      for (std::int64_t i = begin; i < end; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
          if (i == j) {
            qnum.At(i, j) = 0.0;
            continue;
          }
          const double dx = y.At(i, 0) - y.At(j, 0);
          const double dy = y.At(i, 1) - y.At(j, 1);
          const double value = 1.0 / (1.0 + dx * dx + dy * dy);
          qnum.At(i, j) = value;
          local += value;
        }
      }
      slot_sums[slot] += local;
    };
    if (pool)
      ParallelFor(*pool, n, rows);
    else
      rows(0, 0, n);
    double sum = 0.0;
    for (double s : slot_sums) sum += s;
    return sum;
  };

  const auto kl_divergence = [&](double q_sum) {
    double kl = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(qnum.At(i, j) / q_sum, 1e-12);
        kl += pj.At(i, j) * std::log(pj.At(i, j) / q);
      }
    return kl;
  };

  TsneResult result;
  result.kl_initial = kl_divergence(compute_q());

  for (int iter = 0; iter < config.iterations; ++iter) {
    const bool exaggerate = iter < config.exaggeration_iterations;
    const double p_scale = exaggerate ? config.early_exaggeration : 1.0;
    const double q_sum = compute_q();

    auto grad_rows = [&](int, std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i) {
        double gx = 0.0, gy = 0.0;
        for (std::int64_t j = 0; j < n; ++j) {
          if (i == j) continue;
          const double q = qnum.At(i, j) / q_sum;
          const double mult =
              (p_scale * pj.At(i, j) - q) * qnum.At(i, j);
          gx += mult * (y.At(i, 0) - y.At(j, 0));
          gy += mult * (y.At(i, 1) - y.At(j, 1));
        }
        grad.At(i, 0) = 4.0 * gx;
        grad.At(i, 1) = 4.0 * gy;
      }
    };
    if (pool)
      ParallelFor(*pool, n, grad_rows);
    else
      grad_rows(0, 0, n);

    const double momentum = iter < config.momentum_switch_iteration
                                ? config.initial_momentum
                                : config.final_momentum;
    double mean_x = 0.0, mean_y = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_sign =
            (grad.At(i, d) > 0.0) == (increment.At(i, d) > 0.0);
        gains.At(i, d) =
            std::max(config.min_gain,
                     same_sign ? gains.At(i, d) * 0.8 : gains.At(i, d) + 0.2);
        increment.At(i, d) = momentum * increment.At(i, d) -
                             config.learning_rate * gains.At(i, d) *
                                 grad.At(i, d);
        y.At(i, d) += increment.At(i, d);
      }
      mean_x += y.At(i, 0);
      mean_y += y.At(i, 1);
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      y.At(i, 0) -= mean_x;
      y.At(i, 1) -= mean_y;
    }
  }

  result.kl_final = kl_divergence(compute_q());
  result.coords = std::move(y);
  return result;
}

void SaveEmbeddingFile(const TsneResult& result, const FeatureSet& features,
                       const std::string& arch_id, const std::string& path) {
  const std::int64_t n = result.coords.dim(0);
  if (n != static_cast<std::int64_t>(features.labels.size()))
    FailArgument("embedding and feature set sizes differ");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  char buf[96];
  out << "# msd embedding v1\n";
  out << "# arch=" << arch_id << "\n";
  std::snprintf(buf, sizeof buf, "# kl_initial=%.12g kl_final=%.12g\n",
                result.kl_initial, result.kl_final);
  out << buf;
  out << "x,y,label,sample_index\n";
  for (std::int64_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", result.coords.At(i, 0),
                  result.coords.At(i, 1));
    out << buf << ',' << LabelName(features.labels[static_cast<std::size_t>(i)])
        << ',' << features.sample_indices[static_cast<std::size_t>(i)] << '\n';
  }
  if (!out) FailIo("short write to '" + path + "'");
}

}  // namespace msd
