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
// Nadam: the Adam update with Nesterov momentum and the warming momentum
// schedule mu_t = beta1 * (1 - 0.5 * 0.96^(t * 0.004)). With step counter t
// (starting at 1), schedule product M_t = prod_{i<=t} mu_i and gradient g:
//
//   m_t = beta1 * m_{t-1} + (1 - beta1) * g
//   v_t = beta2 * v_{t-1} + (1 - beta2) * g^2
//   g_hat = g / (1 - M_t)
//   m_hat = m_t / (1 - M_t * mu_{t+1})
//   v_hat = v_t / (1 - beta2^t)
//   m_bar = (1 - mu_t) * g_hat + mu_{t+1} * m_hat
//   theta <- theta - lr * m_bar / (sqrt(v_hat) + eps)

#ifndef MSD_CORE_NN_OPTIMIZER_HPP_
#define MSD_CORE_NN_OPTIMIZER_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/error.hpp"
#include "core/nn/network.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace msd {

// Zero-mean normal entries with variance 2 / (fan_in + fan_out).
template <typename T>
void GlorotNormalFill(Tensor<T>& tensor, std::int64_t fan_in,
                      std::int64_t fan_out, Rng& rng) {
  if (fan_in <= 0 || fan_out <= 0) FailArgument("fans must be positive");
  const double stddev =
      std::sqrt(2.0 / (static_cast<double>(fan_in) + static_cast<double>(fan_out)));
  for (std::int64_t i = 0; i < tensor.numel(); ++i)
    tensor[i] = static_cast<T>(rng.NextNormal(0.0, stddev));
}

template <typename T>
double GlobalGradNorm(const std::vector<Tensor<T>>& grads) {
  double sum = 0.0;
  for (const auto& g : grads)
    for (std::int64_t i = 0; i < g.numel(); ++i)
      sum += static_cast<double>(g[i]) * static_cast<double>(g[i]);
  return std::sqrt(sum);
}

// Rescales all gradients so the global L2 norm is at most max_norm. Never
// increases the norm and never changes the direction.
template <typename T>
void ClipGradNorm(std::vector<Tensor<T>>& grads, double max_norm) {
  const double norm = GlobalGradNorm(grads);
  if (norm <= max_norm || norm == 0.0) return;
  const T scale = static_cast<T>(max_norm / norm);
  for (auto& g : grads)
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] *= scale;
}

struct NadamConfig {
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  double schedule_decay = 0.004;
};

template <typename T>
class Nadam {
 public:
  explicit Nadam(NadamConfig config = {}) : config_(config) {}

  const NadamConfig& config() const { return config_; }
  std::int64_t step_count() const { return t_; }

  // Applies one update to every trainable parameter. Gradients must be
  // aligned with the parameter list.
  void Step(std::vector<NamedTensor<T>>& params,
            const std::vector<Tensor<T>>& grads) {
    if (grads.size() != params.size())
      FailArgument("gradient list does not match the parameter list");
    if (moment1_.empty()) {
      moment1_.resize(params.size());
      moment2_.resize(params.size());
      for (std::size_t p = 0; p < params.size(); ++p) {
        moment1_[p].Resize(params[p].value.shape());
        moment2_[p].Resize(params[p].value.shape());
      }
    }

    ++t_;
    const double mu_t =
        config_.beta1 *
        (1.0 - 0.5 * std::pow(0.96, static_cast<double>(t_) *
                                        config_.schedule_decay));
    const double mu_next =
        config_.beta1 *
        (1.0 - 0.5 * std::pow(0.96, static_cast<double>(t_ + 1) *
                                        config_.schedule_decay));
    const double schedule_now = schedule_ * mu_t;
    const double schedule_next = schedule_ * mu_t * mu_next;
    schedule_ = schedule_now;

    const T one_minus_b1 = static_cast<T>(1.0 - config_.beta1);
    const T b1 = static_cast<T>(config_.beta1);
    const T one_minus_b2 = static_cast<T>(1.0 - config_.beta2);
    const T b2 = static_cast<T>(config_.beta2);
    const T g_scale = static_cast<T>(1.0 / (1.0 - schedule_now));
    const T m_scale = static_cast<T>(1.0 / (1.0 - schedule_next));
    const T v_scale = static_cast<T>(
        1.0 / (1.0 - std::pow(config_.beta2, static_cast<double>(t_))));
    const T w_g = static_cast<T>(1.0 - mu_t);
    const T w_m = static_cast<T>(mu_next);
    const T lr = static_cast<T>(config_.learning_rate);
    const T eps = static_cast<T>(config_.epsilon);

    for (std::size_t p = 0; p < params.size(); ++p) {
      if (!params[p].trainable) continue;
      if (!grads[p].SameShape(params[p].value))
        FailArgument("gradient shape mismatch for " + params[p].name);
      Tensor<T>& m = moment1_[p];
      Tensor<T>& v = moment2_[p];
      Tensor<T>& theta = params[p].value;
      const Tensor<T>& g = grads[p];
      for (std::int64_t i = 0; i < theta.numel(); ++i) {
        m[i] = b1 * m[i] + one_minus_b1 * g[i];
        v[i] = b2 * v[i] + one_minus_b2 * g[i] * g[i];
        const T m_bar = w_g * (g[i] * g_scale) + w_m * (m[i] * m_scale);
        theta[i] -= lr * m_bar / (std::sqrt(v[i] * v_scale) + eps);
      }
    }
  }

 private:
  NadamConfig config_;
  std::vector<Tensor<T>> moment1_;
  std::vector<Tensor<T>> moment2_;
  std::int64_t t_ = 0;
  double schedule_ = 1.0;
};

}  // namespace msd

#endif  // MSD_CORE_NN_OPTIMIZER_HPP_
