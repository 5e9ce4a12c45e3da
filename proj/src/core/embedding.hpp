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

#ifndef MSD_CORE_EMBEDDING_HPP_
#define MSD_CORE_EMBEDDING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/nn/network.hpp"
#include "core/recording.hpp"
#include "core/tensor.hpp"

namespace msd {

// Hidden 64-dimensional representations sampled along a recording.
struct FeatureSet {
  Tensor<float> vectors;                    // [N, feature_dim]
  std::vector<Label> labels;                // expert label at each center
  std::vector<std::int64_t> sample_indices; // window centers
};

// Evaluates the embedding-enabled network at every stride-th sample center
// (edge-replicated windows) and taps the feature layer. `labels` may be null;
// centers then carry wakefulness.
FeatureSet ExtractFeatures(const Network<float>& net,
                           const Recording& conditioned,
                           const LabelTrack* labels, std::int64_t stride,
                           ThreadPool* pool);

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 500.0;
  double early_exaggeration = 4.0;
  int exaggeration_iterations = 100;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  double min_gain = 0.01;
};

struct TsneResult {
  Tensor<double> coords;  // [N, 2]
  double kl_initial = 0.0;
  double kl_final = 0.0;
};

// Exact (all-pairs) t-SNE: Gaussian input affinities with per-point
// bandwidths bisected to the target perplexity, symmetrized; Student-t output
// affinities; gradient descent on the KL divergence with adaptive gains,
// momentum 0.5 -> 0.8 and x4 early exaggeration. Deterministic given seed.
TsneResult Tsne(const Tensor<float>& features, const TsneConfig& config,
                std::uint64_t seed, ThreadPool* pool);

// Per-point conditional Gaussian affinity row (diagonal 0) whose entropy
// matches log(perplexity); exposed for the affinity invariants.
void GaussianAffinityRow(const Tensor<double>& sq_dists, std::int64_t row,
                         double perplexity, double* out_row);

// `x,y,label,sample_index` rows plus metadata comments (including the KL
// endpoints of the descent).
void SaveEmbeddingFile(const TsneResult& result, const FeatureSet& features,
                       const std::string& arch_id, const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_EMBEDDING_HPP_
