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
//
// Layer kernels for the fixed vocabulary used by the segmenter networks:
// Conv1D (length-3 taps, stride 1, cross-correlation), BatchNorm, ReLU,
// MaxPool(2), Dense, Softmax, Dropout, additive Gaussian noise and an LSTM.
// Everything is templated on the scalar type: training and inference run in
// float, gradient-check tests instantiate the identical code in double.
//
// Activations are [batch, time, channels] row-major with channels innermost.
// Reductions that cross the batch (weight gradients, batch statistics) are
// accumulated in kParallelSlots fixed partial buffers and folded in slot
// order, so results do not depend on the worker-thread count.

#ifndef MSD_CORE_NN_LAYERS_HPP_
#define MSD_CORE_NN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace msd::nn {

using msd::Tensor;

// ---------------------------------------------------------------------------
// Conv1D. kernel is [3, C_in, C_out], bias [C_out]. Valid boundary shrinks
// time by 2; same_pad keeps the length with zero padding of one sample per
// side (used only by the embedding head, where time is 1).

template <typename T>
void Conv1dForward(const Tensor<T>& in, const Tensor<T>& kernel,
                   const Tensor<T>& bias, bool same_pad, ThreadPool* pool,
                   Tensor<T>& out) {
  const std::int64_t batch = in.dim(0), t_in = in.dim(1), c_in = in.dim(2);
  const std::int64_t c_out = kernel.dim(2);
  const std::int64_t pad = same_pad ? 1 : 0;
  const std::int64_t t_out = same_pad ? t_in : t_in - 2;
  if (t_out < 1) FailArgument("conv1d input shorter than the filter");
  if (kernel.dim(0) != 3 || kernel.dim(1) != c_in)
    FailInternal("conv1d kernel shape mismatch");
  out.Resize({batch, t_out, c_out});

  auto run_rows = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const std::int64_t b = row / t_out, t = row % t_out;
      const T* in_b = in.data() + b * t_in * c_in;
      T* __restrict__ orow = out.data() + row * c_out;
      for (std::int64_t co = 0; co < c_out; ++co) orow[co] = bias[co];
      for (std::int64_t d = 0; d < 3; ++d) {
        const std::int64_t ti = t + d - pad;
        if (ti < 0 || ti >= t_in) continue;
        const T* irow = in_b + ti * c_in;
        const T* kplane = kernel.data() + d * c_in * c_out;
        for (std::int64_t ci = 0; ci < c_in; ++ci) {
          const T x = irow[ci];
          const T* __restrict__ krow = kplane + ci * c_out;
          for (std::int64_t co = 0; co < c_out; ++co) orow[co] += x * krow[co];
        }
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch * t_out, run_rows);
  else
    run_rows(0, 0, batch * t_out);
}

template <typename T>
void Conv1dBackward(const Tensor<T>& in, const Tensor<T>& kernel,
                    const Tensor<T>& d_out, bool same_pad, ThreadPool* pool,
                    Tensor<T>& d_in, Tensor<T>& d_kernel, Tensor<T>& d_bias) {
  const std::int64_t batch = in.dim(0), t_in = in.dim(1), c_in = in.dim(2);
  const std::int64_t t_out = d_out.dim(1), c_out = d_out.dim(2);
  const std::int64_t pad = same_pad ? 1 : 0;
  d_in.Resize({batch, t_in, c_in});
  d_kernel.Resize({3, c_in, c_out});
  d_bias.Resize({c_out});

  // Input gradient, gather form: every (b, t_in) row is independent.
  auto input_rows = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const std::int64_t b = row / t_in, ti = row % t_in;
      T* drow = d_in.data() + row * c_in;
      for (std::int64_t d = 0; d < 3; ++d) {
        const std::int64_t t = ti - d + pad;
        if (t < 0 || t >= t_out) continue;
        const T* __restrict__ grow = d_out.data() + (b * t_out + t) * c_out;
        const T* kplane = kernel.data() + d * c_in * c_out;
        for (std::int64_t ci = 0; ci < c_in; ++ci) {
          const T* __restrict__ krow = kplane + ci * c_out;
          T acc = 0;
          for (std::int64_t co = 0; co < c_out; ++co) acc += krow[co] * grow[co];
          drow[ci] += acc;
        }
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch * t_in, input_rows);
  else
    input_rows(0, 0, batch * t_in);

  // Weight gradient, per-slot partials over output rows.
  const std::int64_t kernel_size = 3 * c_in * c_out;
  std::vector<std::vector<T>> slot_kernel(kParallelSlots);
  std::vector<std::vector<T>> slot_bias(kParallelSlots);
  auto weight_rows = [&](int slot, std::int64_t begin, std::int64_t end) {
    auto& dk = slot_kernel[slot];
    auto& db = slot_bias[slot];
    dk.assign(static_cast<std::size_t>(kernel_size), T{0});
    db.assign(static_cast<std::size_t>(c_out), T{0});
    for (std::int64_t row = begin; row < end; ++row) {
      const std::int64_t b = row / t_out, t = row % t_out;
      const T* __restrict__ grow = d_out.data() + row * c_out;
      for (std::int64_t co = 0; co < c_out; ++co) db[co] += grow[co];
      const T* in_b = in.data() + b * t_in * c_in;
      for (std::int64_t d = 0; d < 3; ++d) {
        const std::int64_t ti = t + d - pad;
        if (ti < 0 || ti >= t_in) continue;
        const T* irow = in_b + ti * c_in;
        T* kplane = dk.data() + d * c_in * c_out;
        for (std::int64_t ci = 0; ci < c_in; ++ci) {
          const T x = irow[ci];
          T* __restrict__ krow = kplane + ci * c_out;
          for (std::int64_t co = 0; co < c_out; ++co) krow[co] += x * grow[co];
        }
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch * t_out, weight_rows);
  else {
    const std::int64_t n = batch * t_out;
    const std::int64_t chunk = (n + kParallelSlots - 1) / kParallelSlots;
    for (int slot = 0; slot < kParallelSlots; ++slot) {
      const std::int64_t begin = slot * chunk;
      const std::int64_t end = std::min(n, begin + chunk);
      if (begin < end) weight_rows(slot, begin, end);
    }
  }
  for (int slot = 0; slot < kParallelSlots; ++slot) {
    if (slot_kernel[slot].empty()) continue;
    for (std::int64_t i = 0; i < kernel_size; ++i)
      d_kernel[i] += slot_kernel[slot][static_cast<std::size_t>(i)];
    for (std::int64_t co = 0; co < c_out; ++co)
      d_bias[co] += slot_bias[slot][static_cast<std::size_t>(co)];
  }
}

// ---------------------------------------------------------------------------
// BatchNorm over the batch-and-time axes, one statistic per channel.

template <typename T>
struct BatchNormCache {
  std::vector<T> mean;     // per channel
  std::vector<T> inv_std;  // 1/sqrt(var + eps)
};

template <typename T>
void BatchNormForwardTrain(const Tensor<T>& in, const Tensor<T>& gamma,
                           const Tensor<T>& beta, T eps, T momentum,
                           Tensor<T>& running_mean, Tensor<T>& running_var,
                           ThreadPool* pool, BatchNormCache<T>& cache,
                           Tensor<T>& out) {
  const std::int64_t rows = in.dim(0) * in.dim(1), channels = in.dim(2);
  out.Resize(in.shape());
  cache.mean.assign(static_cast<std::size_t>(channels), T{0});
  cache.inv_std.assign(static_cast<std::size_t>(channels), T{0});

  std::vector<std::vector<T>> slot_sum(kParallelSlots), slot_sq(kParallelSlots);
  auto stat_rows = [&](int slot, std::int64_t begin, std::int64_t end) {
    auto& sum = slot_sum[slot];
    auto& sq = slot_sq[slot];
    sum.assign(static_cast<std::size_t>(channels), T{0});
    sq.assign(static_cast<std::size_t>(channels), T{0});
    for (std::int64_t row = begin; row < end; ++row) {
      const T* irow = in.data() + row * channels;
      for (std::int64_t c = 0; c < channels; ++c) {
        sum[c] += irow[c];
        sq[c] += irow[c] * irow[c];
      }
    }
  };
  if (pool)
    ParallelFor(*pool, rows, stat_rows);
  else
    stat_rows(0, 0, rows);

  std::vector<T> var(static_cast<std::size_t>(channels), T{0});
  for (int slot = 0; slot < kParallelSlots; ++slot) {
    if (slot_sum[slot].empty()) continue;
    for (std::int64_t c = 0; c < channels; ++c) {
      cache.mean[c] += slot_sum[slot][static_cast<std::size_t>(c)];
      var[c] += slot_sq[slot][static_cast<std::size_t>(c)];
    }
  }
  const T inv_n = T{1} / static_cast<T>(rows);
  for (std::int64_t c = 0; c < channels; ++c) {
    cache.mean[c] *= inv_n;
    var[c] = var[c] * inv_n - cache.mean[c] * cache.mean[c];
    if (var[c] < 0) var[c] = 0;  // rounding guard
    cache.inv_std[c] = T{1} / std::sqrt(var[c] + eps);
    running_mean[c] = momentum * running_mean[c] + (T{1} - momentum) * cache.mean[c];
    running_var[c] = momentum * running_var[c] + (T{1} - momentum) * var[c];
  }

  auto norm_rows = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const T* irow = in.data() + row * channels;
      T* orow = out.data() + row * channels;
      for (std::int64_t c = 0; c < channels; ++c)
        orow[c] = gamma[c] * (irow[c] - cache.mean[c]) * cache.inv_std[c] + beta[c];
    }
  };
  if (pool)
    ParallelFor(*pool, rows, norm_rows);
  else
    norm_rows(0, 0, rows);
}

template <typename T>
void BatchNormForwardInfer(const Tensor<T>& in, const Tensor<T>& gamma,
                           const Tensor<T>& beta, T eps,
                           const Tensor<T>& running_mean,
                           const Tensor<T>& running_var, ThreadPool* pool,
                           Tensor<T>& out) {
  const std::int64_t rows = in.dim(0) * in.dim(1), channels = in.dim(2);
  out.Resize(in.shape());
  std::vector<T> scale(static_cast<std::size_t>(channels));
  std::vector<T> shift(static_cast<std::size_t>(channels));
  for (std::int64_t c = 0; c < channels; ++c) {
    scale[c] = gamma[c] / std::sqrt(running_var[c] + eps);
    shift[c] = beta[c] - running_mean[c] * scale[c];
  }
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const T* irow = in.data() + row * channels;
      T* orow = out.data() + row * channels;
      for (std::int64_t c = 0; c < channels; ++c)
        orow[c] = scale[c] * irow[c] + shift[c];
    }
  };
  if (pool)
    ParallelFor(*pool, rows, run);
  else
    run(0, 0, rows);
}

template <typename T>
void BatchNormBackward(const Tensor<T>& in, const Tensor<T>& gamma,
                       const BatchNormCache<T>& cache, const Tensor<T>& d_out,
                       ThreadPool* pool, Tensor<T>& d_in, Tensor<T>& d_gamma,
                       Tensor<T>& d_beta) {
  const std::int64_t rows = in.dim(0) * in.dim(1), channels = in.dim(2);
  d_in.Resize(in.shape());
  d_gamma.Resize({channels});
  d_beta.Resize({channels});

  std::vector<std::vector<T>> slot_dg(kParallelSlots), slot_db(kParallelSlots);
  auto stat_rows = [&](int slot, std::int64_t begin, std::int64_t end) {
    auto& dg = slot_dg[slot];
    auto& db = slot_db[slot];
    dg.assign(static_cast<std::size_t>(channels), T{0});
    db.assign(static_cast<std::size_t>(channels), T{0});
    for (std::int64_t row = begin; row < end; ++row) {
      const T* irow = in.data() + row * channels;
      const T* grow = d_out.data() + row * channels;
      for (std::int64_t c = 0; c < channels; ++c) {
        const T xhat = (irow[c] - cache.mean[c]) * cache.inv_std[c];
        dg[c] += grow[c] * xhat;
        db[c] += grow[c];
      }
    }
  };
  if (pool)
    ParallelFor(*pool, rows, stat_rows);
  else
    stat_rows(0, 0, rows);
  for (int slot = 0; slot < kParallelSlots; ++slot) {
    if (slot_dg[slot].empty()) continue;
    for (std::int64_t c = 0; c < channels; ++c) {
      d_gamma[c] += slot_dg[slot][static_cast<std::size_t>(c)];
      d_beta[c] += slot_db[slot][static_cast<std::size_t>(c)];
    }
  }

  const T inv_n = T{1} / static_cast<T>(rows);
  auto dx_rows = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const T* irow = in.data() + row * channels;
      const T* grow = d_out.data() + row * channels;
      T* drow = d_in.data() + row * channels;
      for (std::int64_t c = 0; c < channels; ++c) {
        const T xhat = (irow[c] - cache.mean[c]) * cache.inv_std[c];
        drow[c] = gamma[c] * cache.inv_std[c] *
                  (grow[c] - inv_n * d_beta[c] - xhat * inv_n * d_gamma[c]);
      }
    }
  };
  if (pool)
    ParallelFor(*pool, rows, dx_rows);
  else
    dx_rows(0, 0, rows);
}

// ---------------------------------------------------------------------------
// ReLU / MaxPool.

template <typename T>
void ReluForward(const Tensor<T>& in, ThreadPool* pool, Tensor<T>& out) {
  out.Resize(in.shape());
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      out[i] = in[i] > T{0} ? in[i] : T{0};
  };
  if (pool)
    ParallelFor(*pool, in.numel(), run);
  else
    run(0, 0, in.numel());
}

template <typename T>
void ReluBackward(const Tensor<T>& out, const Tensor<T>& d_out,
                  ThreadPool* pool, Tensor<T>& d_in) {
  d_in.Resize(out.shape());
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      d_in[i] = out[i] > T{0} ? d_out[i] : T{0};
  };
  if (pool)
    ParallelFor(*pool, out.numel(), run);
  else
    run(0, 0, out.numel());
}

// Non-overlapping pairs; an odd trailing element is dropped. `argmax` keeps
// which pair member won (ties go to the first) for the backward pass.
template <typename T>
void MaxPoolForward(const Tensor<T>& in, ThreadPool* pool, Tensor<T>& out,
                    Tensor<std::uint8_t>& argmax) {
  const std::int64_t batch = in.dim(0), t_in = in.dim(1), channels = in.dim(2);
  if (t_in < 2) FailArgument("max-pool input shorter than the pool");
  const std::int64_t t_out = t_in / 2;
  out.Resize({batch, t_out, channels});
  argmax.Resize({batch, t_out, channels});
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const std::int64_t b = row / t_out, t = row % t_out;
      const T* first = in.data() + (b * t_in + 2 * t) * channels;
      const T* second = first + channels;
      T* orow = out.data() + row * channels;
      std::uint8_t* arow = argmax.data() + row * channels;
      for (std::int64_t c = 0; c < channels; ++c) {
        const bool take_second = second[c] > first[c];
        orow[c] = take_second ? second[c] : first[c];
        arow[c] = take_second ? 1 : 0;
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch * t_out, run);
  else
    run(0, 0, batch * t_out);
}

template <typename T>
void MaxPoolBackward(const Tensor<std::uint8_t>& argmax,
                     const Tensor<T>& d_out, std::int64_t t_in,
                     ThreadPool* pool, Tensor<T>& d_in) {
  const std::int64_t batch = d_out.dim(0), t_out = d_out.dim(1),
                     channels = d_out.dim(2);
  d_in.Resize({batch, t_in, channels});
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t row = begin; row < end; ++row) {
      const std::int64_t b = row / t_out, t = row % t_out;
      const T* grow = d_out.data() + row * channels;
      const std::uint8_t* arow = argmax.data() + row * channels;
      T* base = d_in.data() + (b * t_in + 2 * t) * channels;
      for (std::int64_t c = 0; c < channels; ++c)
        base[arow[c] * channels + c] += grow[c];
    }
  };
  // Rows touch disjoint d_in pairs, so the parallel form is race free.
  if (pool)
    ParallelFor(*pool, batch * t_out, run);
  else
    run(0, 0, batch * t_out);
}

// ---------------------------------------------------------------------------
// Dense: out[b, u] = bias[u] + sum_f in[b, f] * weight[f, u].

template <typename T>
void DenseForward(const Tensor<T>& in, const Tensor<T>& weight,
                  const Tensor<T>& bias, ThreadPool* pool, Tensor<T>& out) {
  const std::int64_t batch = in.dim(0), f_in = in.dim(1), units = weight.dim(1);
  if (weight.dim(0) != f_in) FailInternal("dense weight shape mismatch");
  out.Resize({batch, units});
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const T* irow = in.data() + b * f_in;
      T* __restrict__ orow = out.data() + b * units;
      for (std::int64_t u = 0; u < units; ++u) orow[u] = bias[u];
      for (std::int64_t f = 0; f < f_in; ++f) {
        const T x = irow[f];
        const T* __restrict__ wrow = weight.data() + f * units;
        for (std::int64_t u = 0; u < units; ++u) orow[u] += x * wrow[u];
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch, run);
  else
    run(0, 0, batch);
}

template <typename T>
void DenseBackward(const Tensor<T>& in, const Tensor<T>& weight,
                   const Tensor<T>& d_out, ThreadPool* pool, Tensor<T>& d_in,
                   Tensor<T>& d_weight, Tensor<T>& d_bias) {
  const std::int64_t batch = in.dim(0), f_in = in.dim(1), units = weight.dim(1);
  d_in.Resize({batch, f_in});
  d_weight.Resize({f_in, units});
  d_bias.Resize({units});

  std::vector<std::vector<T>> slot_dw(kParallelSlots), slot_db(kParallelSlots);
  auto run = [&](int slot, std::int64_t begin, std::int64_t end) {
    auto& dw = slot_dw[slot];
    auto& db = slot_db[slot];
    dw.assign(static_cast<std::size_t>(f_in * units), T{0});
    db.assign(static_cast<std::size_t>(units), T{0});
    for (std::int64_t b = begin; b < end; ++b) {
      const T* irow = in.data() + b * f_in;
      const T* grow = d_out.data() + b * units;
      T* drow = d_in.data() + b * f_in;
      for (std::int64_t u = 0; u < units; ++u) db[u] += grow[u];
      for (std::int64_t f = 0; f < f_in; ++f) {
        const T* __restrict__ wrow = weight.data() + f * units;
        T* __restrict__ dwrow = dw.data() + f * units;
        T acc = 0;
        const T x = irow[f];
        for (std::int64_t u = 0; u < units; ++u) {
          acc += wrow[u] * grow[u];
          dwrow[u] += x * grow[u];
        }
        drow[f] = acc;
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch, run);
  else
    run(0, 0, batch);
  for (int slot = 0; slot < kParallelSlots; ++slot) {
    if (slot_dw[slot].empty()) continue;
    for (std::int64_t i = 0; i < f_in * units; ++i)
      d_weight[i] += slot_dw[slot][static_cast<std::size_t>(i)];
    for (std::int64_t u = 0; u < units; ++u)
      d_bias[u] += slot_db[slot][static_cast<std::size_t>(u)];
  }
}

// ---------------------------------------------------------------------------
// Softmax rows with max subtraction.

template <typename T>
void SoftmaxForward(const Tensor<T>& logits, ThreadPool* pool, Tensor<T>& probs) {
  const std::int64_t batch = logits.dim(0), k = logits.dim(1);
  probs.Resize({batch, k});
  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const T* z = logits.data() + b * k;
      T* p = probs.data() + b * k;
      T zmax = z[0];
      for (std::int64_t i = 1; i < k; ++i) zmax = std::max(zmax, z[i]);
      T sum = 0;
      for (std::int64_t i = 0; i < k; ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
      }
      const T inv = T{1} / sum;
      for (std::int64_t i = 0; i < k; ++i) p[i] *= inv;
    }
  };
  if (pool)
    ParallelFor(*pool, batch, run);
  else
    run(0, 0, batch);
}

// Mean over rows of -w(target) * log(max(p_target, 1e-12)).
template <typename T>
T WeightedCrossEntropy(const Tensor<T>& probs, std::span<const int> targets,
                       std::span<const float> weights) {
  const std::int64_t batch = probs.dim(0), k = probs.dim(1);
  if (static_cast<std::int64_t>(targets.size()) != batch ||
      static_cast<std::int64_t>(weights.size()) != batch)
    FailArgument("loss targets/weights must match the batch");
  T loss = 0;
  for (std::int64_t b = 0; b < batch; ++b) {
    const int t = targets[static_cast<std::size_t>(b)];
    if (t < 0 || t >= k) FailArgument("target class out of range");
    const T p = std::max(probs[b * k + t], static_cast<T>(1e-12));
    loss -= static_cast<T>(weights[static_cast<std::size_t>(b)]) * std::log(p);
  }
  return loss / static_cast<T>(batch);
}

// Gradient of the weighted cross entropy with respect to the softmax logits:
// w * (p - onehot) / batch.
template <typename T>
void SoftmaxCrossEntropyGrad(const Tensor<T>& probs,
                             std::span<const int> targets,
                             std::span<const float> weights,
                             Tensor<T>& d_logits) {
  const std::int64_t batch = probs.dim(0), k = probs.dim(1);
  d_logits.Resize({batch, k});
  const T inv_batch = T{1} / static_cast<T>(batch);
  for (std::int64_t b = 0; b < batch; ++b) {
    const T w = static_cast<T>(weights[static_cast<std::size_t>(b)]) * inv_batch;
    const int t = targets[static_cast<std::size_t>(b)];
    for (std::int64_t i = 0; i < k; ++i) {
      const T onehot = (i == t) ? T{1} : T{0};
      d_logits[b * k + i] = w * (probs[b * k + i] - onehot);
    }
  }
}

// ---------------------------------------------------------------------------
// Dropout / Gaussian noise. Masks and noise are drawn sequentially from the
// rng so a batch is reproducible from the seed alone.

template <typename T>
void DropoutForwardTrain(const Tensor<T>& in, double q, Rng& rng,
                         Tensor<std::uint8_t>& mask, Tensor<T>& out) {
  if (q < 0.0 || q >= 1.0) FailArgument("dropout rate must be in [0, 1)");
  out.Resize(in.shape());
  mask.Resize(in.shape());
  const T scale = static_cast<T>(1.0 / (1.0 - q));
  for (std::int64_t i = 0; i < in.numel(); ++i) {
    const bool keep = rng.NextUniform() >= q;
    mask[i] = keep ? 1 : 0;
    out[i] = keep ? in[i] * scale : T{0};
  }
}

template <typename T>
void DropoutBackward(const Tensor<std::uint8_t>& mask, double q,
                     const Tensor<T>& d_out, Tensor<T>& d_in) {
  d_in.Resize(d_out.shape());
  const T scale = static_cast<T>(1.0 / (1.0 - q));
  for (std::int64_t i = 0; i < d_out.numel(); ++i)
    d_in[i] = mask[i] ? d_out[i] * scale : T{0};
}

template <typename T>
void GaussianNoiseForwardTrain(const Tensor<T>& in, double stddev, Rng& rng,
                               Tensor<T>& out) {
  if (stddev < 0.0) FailArgument("noise std must be >= 0");
  out.Resize(in.shape());
  for (std::int64_t i = 0; i < in.numel(); ++i)
    out[i] = in[i] + static_cast<T>(rng.NextNormal(0.0, stddev));
}

// ---------------------------------------------------------------------------
// LSTM over [batch, steps, features] with hidden size n. Weights are
// wx [features, 4n], wh [n, 4n], bias [4n]; the gate order along the 4n axis
// is input, forget, candidate, output. Initial hidden and cell state are 0.

template <typename T>
struct LstmCache {
  Tensor<T> gates;   // [B, S, 4n] post-activation
  Tensor<T> cell;    // [B, S, n]
  Tensor<T> tanh_c;  // [B, S, n]
};

template <typename T>
void LstmForward(const Tensor<T>& in, const Tensor<T>& wx, const Tensor<T>& wh,
                 const Tensor<T>& bias, ThreadPool* pool, LstmCache<T>* cache,
                 Tensor<T>& out) {
  const std::int64_t batch = in.dim(0), steps = in.dim(1), f_in = in.dim(2);
  const std::int64_t hidden = wh.dim(0);
  if (wx.dim(0) != f_in || wx.dim(1) != 4 * hidden || wh.dim(1) != 4 * hidden)
    FailInternal("lstm weight shape mismatch");
  out.Resize({batch, steps, hidden});
  if (cache) {
    cache->gates.Resize({batch, steps, 4 * hidden});
    cache->cell.Resize({batch, steps, hidden});
    cache->tanh_c.Resize({batch, steps, hidden});
  }

  auto run = [&](int, std::int64_t begin, std::int64_t end) {
    std::vector<T> z(static_cast<std::size_t>(4 * hidden));
    std::vector<T> c(static_cast<std::size_t>(hidden), T{0});
    for (std::int64_t b = begin; b < end; ++b) {
      std::fill(c.begin(), c.end(), T{0});
      const T* h_prev = nullptr;
      for (std::int64_t s = 0; s < steps; ++s) {
        for (std::int64_t j = 0; j < 4 * hidden; ++j) z[j] = bias[j];
        const T* xrow = in.data() + (b * steps + s) * f_in;
        T* __restrict__ zp = z.data();
        for (std::int64_t f = 0; f < f_in; ++f) {
          const T x = xrow[f];
          const T* __restrict__ wrow = wx.data() + f * 4 * hidden;
          for (std::int64_t j = 0; j < 4 * hidden; ++j) zp[j] += x * wrow[j];
        }
        if (h_prev) {
          for (std::int64_t hidx = 0; hidx < hidden; ++hidx) {
            const T h = h_prev[hidx];
            const T* __restrict__ wrow = wh.data() + hidx * 4 * hidden;
            for (std::int64_t j = 0; j < 4 * hidden; ++j) zp[j] += h * wrow[j];
          }
        }
        T* hrow = out.data() + (b * steps + s) * hidden;
        T* grow = cache ? cache->gates.data() + (b * steps + s) * 4 * hidden
                        : nullptr;
        for (std::int64_t j = 0; j < hidden; ++j) {
          const T gi = T{1} / (T{1} + std::exp(-z[j]));
          const T gf = T{1} / (T{1} + std::exp(-z[hidden + j]));
          const T gg = std::tanh(z[2 * hidden + j]);
          const T go = T{1} / (T{1} + std::exp(-z[3 * hidden + j]));
          c[static_cast<std::size_t>(j)] =
              gf * c[static_cast<std::size_t>(j)] + gi * gg;
          const T tc = std::tanh(c[static_cast<std::size_t>(j)]);
          hrow[j] = go * tc;
          if (cache) {
            grow[j] = gi;
            grow[hidden + j] = gf;
            grow[2 * hidden + j] = gg;
            grow[3 * hidden + j] = go;
            cache->cell.data()[(b * steps + s) * hidden + j] =
                c[static_cast<std::size_t>(j)];
            cache->tanh_c.data()[(b * steps + s) * hidden + j] = tc;
          }
        }
        h_prev = hrow;
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch, run);
  else
    run(0, 0, batch);
}

template <typename T>
void LstmBackward(const Tensor<T>& in, const Tensor<T>& wx, const Tensor<T>& wh,
                  const Tensor<T>& out, const LstmCache<T>& cache,
                  const Tensor<T>& d_out, ThreadPool* pool, Tensor<T>& d_in,
                  Tensor<T>& d_wx, Tensor<T>& d_wh, Tensor<T>& d_bias) {
  const std::int64_t batch = in.dim(0), steps = in.dim(1), f_in = in.dim(2);
  const std::int64_t hidden = wh.dim(0);
  d_in.Resize({batch, steps, f_in});
  d_wx.Resize({f_in, 4 * hidden});
  d_wh.Resize({hidden, 4 * hidden});
  d_bias.Resize({4 * hidden});

  std::vector<std::vector<T>> slot_dwx(kParallelSlots),
      slot_dwh(kParallelSlots), slot_db(kParallelSlots);
  auto run = [&](int slot, std::int64_t begin, std::int64_t end) {
    auto& dwx = slot_dwx[slot];
    auto& dwh = slot_dwh[slot];
    auto& db = slot_db[slot];
    dwx.assign(static_cast<std::size_t>(f_in * 4 * hidden), T{0});
    dwh.assign(static_cast<std::size_t>(hidden * 4 * hidden), T{0});
    db.assign(static_cast<std::size_t>(4 * hidden), T{0});
    std::vector<T> dh(static_cast<std::size_t>(hidden));
    std::vector<T> dc(static_cast<std::size_t>(hidden));
    std::vector<T> dz(static_cast<std::size_t>(4 * hidden));
    for (std::int64_t b = begin; b < end; ++b) {
      std::fill(dh.begin(), dh.end(), T{0});
      std::fill(dc.begin(), dc.end(), T{0});
      for (std::int64_t s = steps - 1; s >= 0; --s) {
        const std::int64_t row = b * steps + s;
        const T* grow = cache.gates.data() + row * 4 * hidden;
        const T* crow = cache.cell.data() + row * hidden;
        const T* tcrow = cache.tanh_c.data() + row * hidden;
        const T* gout = d_out.data() + row * hidden;
        const T* c_prev = s > 0 ? cache.cell.data() + (row - 1) * hidden : nullptr;
        for (std::int64_t j = 0; j < hidden; ++j) {
          const T gi = grow[j], gf = grow[hidden + j], gg = grow[2 * hidden + j],
                  go = grow[3 * hidden + j];
          const T dh_total = gout[j] + dh[static_cast<std::size_t>(j)];
          const T d_o = dh_total * tcrow[j];
          T d_c = dh_total * go * (T{1} - tcrow[j] * tcrow[j]) +
                  dc[static_cast<std::size_t>(j)];
          const T cp = c_prev ? c_prev[j] : T{0};
          const T d_i = d_c * gg;
          const T d_g = d_c * gi;
          const T d_f = d_c * cp;
          dc[static_cast<std::size_t>(j)] = d_c * gf;
          dz[static_cast<std::size_t>(j)] = d_i * gi * (T{1} - gi);
          dz[static_cast<std::size_t>(hidden + j)] = d_f * gf * (T{1} - gf);
          dz[static_cast<std::size_t>(2 * hidden + j)] = d_g * (T{1} - gg * gg);
          dz[static_cast<std::size_t>(3 * hidden + j)] = d_o * go * (T{1} - go);
          (void)crow;
        }
        for (std::int64_t j = 0; j < 4 * hidden; ++j) db[j] += dz[j];
        const T* xrow = in.data() + row * f_in;
        T* dxrow = d_in.data() + row * f_in;
        for (std::int64_t f = 0; f < f_in; ++f) {
          const T* wrow = wx.data() + f * 4 * hidden;
          T* dwrow = dwx.data() + f * 4 * hidden;
          T acc = 0;
          const T x = xrow[f];
          for (std::int64_t j = 0; j < 4 * hidden; ++j) {
            acc += wrow[j] * dz[j];
            dwrow[j] += x * dz[j];
          }
          dxrow[f] = acc;
        }
        if (s > 0) {
          const T* h_prev = out.data() + (row - 1) * hidden;
          for (std::int64_t hidx = 0; hidx < hidden; ++hidx) {
            const T* wrow = wh.data() + hidx * 4 * hidden;
            T* dwrow = dwh.data() + hidx * 4 * hidden;
            T acc = 0;
            const T h = h_prev[hidx];
            for (std::int64_t j = 0; j < 4 * hidden; ++j) {
              acc += wrow[j] * dz[j];
              dwrow[j] += h * dz[j];
            }
            dh[static_cast<std::size_t>(hidx)] = acc;
          }
        }
      }
    }
  };
  if (pool)
    ParallelFor(*pool, batch, run);
  else
    run(0, 0, batch);
  for (int slot = 0; slot < kParallelSlots; ++slot) {
    if (slot_db[slot].empty()) continue;
    for (std::int64_t i = 0; i < f_in * 4 * hidden; ++i)
      d_wx[i] += slot_dwx[slot][static_cast<std::size_t>(i)];
    for (std::int64_t i = 0; i < hidden * 4 * hidden; ++i)
      d_wh[i] += slot_dwh[slot][static_cast<std::size_t>(i)];
    for (std::int64_t i = 0; i < 4 * hidden; ++i)
      d_bias[i] += slot_db[slot][static_cast<std::size_t>(i)];
  }
}

}  // namespace msd::nn

#endif  // MSD_CORE_NN_LAYERS_HPP_
