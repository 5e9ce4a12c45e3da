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

#ifndef MSD_CORE_NN_NETWORK_HPP_
#define MSD_CORE_NN_NETWORK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/nn/layers.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace msd {

enum class LayerKind {
  kGaussianNoise,
  kConv1d,
  kBatchNorm,
  kRelu,
  kMaxPool,
  kFlatten,
  kDropout,
  kDense,
  kSoftmax,  // dense + softmax activation
  kLstm,
};

struct LayerSpec {
  LayerKind kind;
  int units = 0;        // conv filters, dense/softmax units, lstm hidden size
  double rate = 0.0;    // dropout fraction
  double stddev = 0.0;  // gaussian noise std, in normalized input units
  bool same_pad = false;  // conv only; zero padding of one sample per side

  static LayerSpec GaussianNoise(double stddev);
  static LayerSpec Conv1d(int filters, bool same_pad = false);
  static LayerSpec BatchNorm();
  static LayerSpec Relu();
  static LayerSpec MaxPool();
  static LayerSpec Flatten();
  static LayerSpec Dropout(double rate);
  static LayerSpec Dense(int units);
  static LayerSpec Softmax(int units);
  static LayerSpec Lstm(int hidden);
};

enum class Family { kCnn, kCnnLstm };

struct NetworkSpec {
  std::string arch_id;
  Family family = Family::kCnn;
  std::int64_t window_samples = 0;
  int n_channels = 0;
  int n_classes = 0;
  std::int64_t window_stride = 0;  // CNN-LSTM window advance in samples
  int feature_layer = -1;          // flatten index tapped by the embedding
  std::vector<LayerSpec> layers;
};

// Temporal/channel extent after each layer (flattened layers report
// temporal 1 and the vector length as channels).
struct ShapeStep {
  std::int64_t temporal = 0;
  std::int64_t channels = 0;
};

// Symbolic size propagation through the layer list. Throws when a layer is
// infeasible (e.g. valid conv on fewer than 3 samples).
std::vector<ShapeStep> PropagateShapes(const NetworkSpec& spec);

// Batch-norm constants shared by every network of the family.
inline constexpr double kBatchNormEps = 1e-3;
inline constexpr double kBatchNormMomentum = 0.99;

enum class RunMode { kTrain, kInfer };

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> value;
  bool trainable = true;
};

// Stored intermediates of one training forward pass.
template <typename T>
struct Trace {
  Tensor<T> input;
  std::vector<Tensor<T>> outputs;
  std::vector<Tensor<std::uint8_t>> masks;   // dropout / pool winners
  std::vector<nn::BatchNormCache<T>> bn;
  std::vector<nn::LstmCache<T>> lstm;
  std::int64_t outer_batch = 0;  // CNN-LSTM sequence count
  std::int64_t seq_steps = 0;
  bool valid = false;
};

// A network instance: spec plus parameters. Forward in training mode stores
// a Trace and updates batch-norm running statistics; inference mode is a
// pure function of (params, input).
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<ShapeStep>& shapes() const { return shapes_; }
  std::vector<NamedTensor<T>>& params() { return params_; }
  const std::vector<NamedTensor<T>>& params() const { return params_; }
  std::int64_t trainable_count() const;

  // Glorot-normal weights, zero biases (LSTM forget-gate bias 1), identity
  // batch-norm. Draws in declaration order, so a seed pins every tensor.
  void InitParams(Rng& rng);

  // CNN family: input [B, window, channels] -> probs [B, classes].
  // CNN-LSTM family: input [B, seq, window, channels] -> probs [B*seq, classes].
  // Training mode needs an rng (noise, dropout) and fills `trace`.
  Tensor<T> Forward(const Tensor<T>& input, RunMode mode, Rng* rng,
                    ThreadPool* pool, Trace<T>* trace) const;
  Tensor<T> Forward(const Tensor<T>& input, RunMode mode, Rng* rng,
                    ThreadPool* pool, Trace<T>* trace);

  // Inference pass returning the embedding tap (flatten output of
  // spec().feature_layer) instead of class probabilities.
  Tensor<T> ForwardFeatures(const Tensor<T>& input, ThreadPool* pool) const;

  // Gradients of the weighted cross entropy with respect to every parameter,
  // aligned with params(). Requires the trace of a matching forward pass.
  std::vector<Tensor<T>> Backward(const Trace<T>& trace,
                                  std::span<const int> targets,
                                  std::span<const float> weights,
                                  ThreadPool* pool) const;

 private:
  Tensor<T> Run(const Tensor<T>& input, RunMode mode, Rng* rng,
                ThreadPool* pool, Trace<T>* trace, bool update_stats,
                int stop_after_layer) const;

  NetworkSpec spec_;
  std::vector<ShapeStep> shapes_;
  std::vector<NamedTensor<T>> params_;
  std::vector<int> first_param_;  // per layer, index into params_ or -1
};

// Checkpoint container: text metadata block (format version, spec, tensor
// shapes) followed by the raw little-endian float32 tensors in declaration
// order.
std::vector<std::uint8_t> SaveParams(const Network<float>& network);
Network<float> LoadNetwork(const std::vector<std::uint8_t>& bytes);
// Loads into an existing network; the stored spec and shapes must match.
void LoadParamsInto(Network<float>& network,
                    const std::vector<std::uint8_t>& bytes);

Network<float> LoadNetworkFile(const std::string& path);
void SaveNetworkFile(const Network<float>& network, const std::string& path);

}  // namespace msd

#endif  // MSD_CORE_NN_NETWORK_HPP_
