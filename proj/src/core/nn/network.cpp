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

#include "core/nn/network.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/nn/optimizer.hpp"

namespace msd {

LayerSpec LayerSpec::GaussianNoise(double stddev) {
  return {LayerKind::kGaussianNoise, 0, 0.0, stddev, false};
}
LayerSpec LayerSpec::Conv1d(int filters, bool same_pad) {
  return {LayerKind::kConv1d, filters, 0.0, 0.0, same_pad};
}
LayerSpec LayerSpec::BatchNorm() { return {LayerKind::kBatchNorm}; }
LayerSpec LayerSpec::Relu() { return {LayerKind::kRelu}; }
LayerSpec LayerSpec::MaxPool() { return {LayerKind::kMaxPool}; }
LayerSpec LayerSpec::Flatten() { return {LayerKind::kFlatten}; }
LayerSpec LayerSpec::Dropout(double rate) {
  return {LayerKind::kDropout, 0, rate, 0.0, false};
}
LayerSpec LayerSpec::Dense(int units) {
  return {LayerKind::kDense, units, 0.0, 0.0, false};
}
LayerSpec LayerSpec::Softmax(int units) {
  return {LayerKind::kSoftmax, units, 0.0, 0.0, false};
}
LayerSpec LayerSpec::Lstm(int hidden) {
  return {LayerKind::kLstm, hidden, 0.0, 0.0, false};
}

namespace {

const char* LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kGaussianNoise: return "gaussian_noise";
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kBatchNorm: return "batch_norm";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool: return "max_pool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSoftmax: return "softmax";
    case LayerKind::kLstm: return "lstm";
  }
  return "?";
}

}  // namespace

std::vector<ShapeStep> PropagateShapes(const NetworkSpec& spec) {
  if (spec.window_samples <= 0 || spec.n_channels <= 0)
    FailArgument("network spec needs a positive input shape");
  std::vector<ShapeStep> steps;
  steps.reserve(spec.layers.size());
  std::int64_t temporal = spec.window_samples;
  std::int64_t channels = spec.n_channels;
  bool flattened = false;

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    switch (layer.kind) {
      case LayerKind::kGaussianNoise:
      case LayerKind::kBatchNorm:
      case LayerKind::kRelu:
      case LayerKind::kDropout:
        break;
      case LayerKind::kConv1d:
        if (flattened) FailArgument("conv1d after flatten");
        if (!layer.same_pad) {
          if (temporal < 3)
            FailArgument("layer " + std::to_string(i) +
                         ": valid conv1d on fewer than 3 samples");
          temporal -= 2;
        }
        channels = layer.units;
        break;
      case LayerKind::kMaxPool:
        if (flattened || temporal < 2)
          FailArgument("layer " + std::to_string(i) + ": max-pool infeasible");
        temporal /= 2;
        break;
      case LayerKind::kFlatten:
        channels = temporal * channels;
        temporal = 1;
        flattened = true;
        break;
      case LayerKind::kDense:
      case LayerKind::kSoftmax:
        if (!flattened && !(temporal == 1))
          FailArgument("dense layer before flatten");
        channels = layer.units;
        break;
      case LayerKind::kLstm:
        if (!flattened) FailArgument("lstm needs flattened features");
        channels = layer.units;
        break;
    }
    steps.push_back({temporal, channels});
  }
  return steps;
}

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  shapes_ = PropagateShapes(spec_);
  if (spec_.layers.empty() || spec_.layers.back().kind != LayerKind::kSoftmax)
    FailArgument("networks must end with a softmax layer");

  std::int64_t channels = spec_.n_channels;
  first_param_.assign(spec_.layers.size(), -1);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& layer = spec_.layers[i];
    const std::string prefix =
        "l" + std::to_string(i) + "." + LayerKindName(layer.kind) + ".";
    const auto base = static_cast<int>(params_.size());
    switch (layer.kind) {
      case LayerKind::kConv1d:
        first_param_[i] = base;
        params_.push_back({prefix + "kernel",
                           Tensor<T>({3, channels, layer.units}), true});
        params_.push_back({prefix + "bias", Tensor<T>({layer.units}), true});
        break;
      case LayerKind::kBatchNorm:
        first_param_[i] = base;
        params_.push_back({prefix + "gamma", Tensor<T>({channels}), true});
        params_.push_back({prefix + "beta", Tensor<T>({channels}), true});
        params_.push_back({prefix + "running_mean", Tensor<T>({channels}), false});
        params_.push_back({prefix + "running_var", Tensor<T>({channels}), false});
        break;
      case LayerKind::kDense:
      case LayerKind::kSoftmax:
        first_param_[i] = base;
        params_.push_back({prefix + "weight",
                           Tensor<T>({channels, layer.units}), true});
        params_.push_back({prefix + "bias", Tensor<T>({layer.units}), true});
        break;
      case LayerKind::kLstm:
        first_param_[i] = base;
        params_.push_back({prefix + "wx",
                           Tensor<T>({channels, 4 * layer.units}), true});
        params_.push_back({prefix + "wh",
                           Tensor<T>({layer.units, 4 * layer.units}), true});
        params_.push_back({prefix + "bias", Tensor<T>({4 * layer.units}), true});
        break;
      default:
        break;
    }
    channels = shapes_[i].channels;
  }
}

template <typename T>
std::int64_t Network<T>::trainable_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_)
    if (p.trainable) n += p.value.numel();
  return n;
}

template <typename T>
void Network<T>::InitParams(Rng& rng) {
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& layer = spec_.layers[i];
    const int base = first_param_[i];
    if (base < 0) continue;
    switch (layer.kind) {
      case LayerKind::kConv1d: {
        Tensor<T>& kernel = params_[base].value;
        GlorotNormalFill(kernel, 3 * kernel.dim(1), 3 * kernel.dim(2), rng);
        params_[base + 1].value.Fill(T{0});
        break;
      }
      case LayerKind::kBatchNorm:
        params_[base].value.Fill(T{1});      // gamma
        params_[base + 1].value.Fill(T{0});  // beta
        params_[base + 2].value.Fill(T{0});  // running mean
        params_[base + 3].value.Fill(T{1});  // running var
        break;
      case LayerKind::kDense:
      case LayerKind::kSoftmax: {
        Tensor<T>& weight = params_[base].value;
        GlorotNormalFill(weight, weight.dim(0), weight.dim(1), rng);
        params_[base + 1].value.Fill(T{0});
        break;
      }
      case LayerKind::kLstm: {
        Tensor<T>& wx = params_[base].value;
        Tensor<T>& wh = params_[base + 1].value;
        const std::int64_t hidden = wh.dim(0);
        GlorotNormalFill(wx, wx.dim(0), hidden, rng);
        GlorotNormalFill(wh, hidden, hidden, rng);
        Tensor<T>& bias = params_[base + 2].value;
        bias.Fill(T{0});
        for (std::int64_t j = 0; j < hidden; ++j) bias[hidden + j] = T{1};
        break;
      }
      default:
        break;
    }
  }
}

template <typename T>
Tensor<T> Network<T>::Run(const Tensor<T>& input, RunMode mode, Rng* rng,
                          ThreadPool* pool, Trace<T>* trace, bool update_stats,
                          int stop_after_layer) const {
  if (mode == RunMode::kTrain && rng == nullptr)
    FailArgument("training forward needs an rng");

  Tensor<T> cur = input;
  std::int64_t outer = 0, seq = 0;
  if (spec_.family == Family::kCnnLstm) {
    if (input.shape().size() != 4)
      FailArgument("CNN-LSTM input must be [batch, seq, window, channels]");
    outer = input.dim(0);
    seq = input.dim(1);
    cur.ReshapeInPlace({outer * seq, input.dim(2), input.dim(3)});
  } else if (input.shape().size() != 3) {
    FailArgument("CNN input must be [batch, window, channels]");
  }
  if (cur.dim(1) != spec_.window_samples || cur.dim(2) != spec_.n_channels)
    FailArgument("input window/channel shape does not match the network");

  if (trace) {
    trace->input = cur;
    trace->outputs.assign(spec_.layers.size(), Tensor<T>());
    trace->masks.assign(spec_.layers.size(), Tensor<std::uint8_t>());
    trace->bn.assign(spec_.layers.size(), nn::BatchNormCache<T>());
    trace->lstm.assign(spec_.layers.size(), nn::LstmCache<T>());
    trace->outer_batch = outer;
    trace->seq_steps = seq;
    trace->valid = false;
  }

  auto* self = const_cast<Network<T>*>(this);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& layer = spec_.layers[i];
    const int base = first_param_[i];
    Tensor<T> out;
    switch (layer.kind) {
      case LayerKind::kGaussianNoise:
        if (mode == RunMode::kTrain && layer.stddev > 0.0)
          nn::GaussianNoiseForwardTrain(cur, layer.stddev, *rng, out);
        else
          out = cur;
        break;
      case LayerKind::kConv1d:
        nn::Conv1dForward(cur, params_[base].value, params_[base + 1].value,
                          layer.same_pad, pool, out);
        break;
      case LayerKind::kBatchNorm:
        if (mode == RunMode::kTrain) {
          nn::BatchNormCache<T> cache;
          // Running statistics advance only on real optimization passes.
          Tensor<T> rmean = params_[base + 2].value;
          Tensor<T> rvar = params_[base + 3].value;
          nn::BatchNormForwardTrain(
              cur, params_[base].value, params_[base + 1].value,
              static_cast<T>(kBatchNormEps), static_cast<T>(kBatchNormMomentum),
              rmean, rvar, pool, cache, out);
          if (update_stats) {
            self->params_[base + 2].value = std::move(rmean);
            self->params_[base + 3].value = std::move(rvar);
          }
          if (trace) trace->bn[i] = std::move(cache);
        } else {
          nn::BatchNormForwardInfer(cur, params_[base].value,
                                    params_[base + 1].value,
                                    static_cast<T>(kBatchNormEps),
                                    params_[base + 2].value,
                                    params_[base + 3].value, pool, out);
        }
        break;
      case LayerKind::kRelu:
        nn::ReluForward(cur, pool, out);
        break;
      case LayerKind::kMaxPool: {
        Tensor<std::uint8_t> argmax;
        nn::MaxPoolForward(cur, pool, out, argmax);
        if (trace) trace->masks[i] = std::move(argmax);
        break;
      }
      case LayerKind::kFlatten:
        out = cur;
        out.ReshapeInPlace({out.dim(0), out.dim(1) * out.dim(2)});
        break;
      case LayerKind::kDropout:
        if (mode == RunMode::kTrain && layer.rate > 0.0) {
          Tensor<std::uint8_t> mask;
          nn::DropoutForwardTrain(cur, layer.rate, *rng, mask, out);
          if (trace) trace->masks[i] = std::move(mask);
        } else {
          out = cur;
        }
        break;
      case LayerKind::kDense:
        nn::DenseForward(cur, params_[base].value, params_[base + 1].value,
                         pool, out);
        break;
      case LayerKind::kSoftmax: {
        Tensor<T> logits;
        nn::DenseForward(cur, params_[base].value, params_[base + 1].value,
                         pool, logits);
        nn::SoftmaxForward(logits, pool, out);
        break;
      }
      case LayerKind::kLstm: {
        Tensor<T> steps = cur;
        if (spec_.family != Family::kCnnLstm)
          FailArgument("lstm layer outside the CNN-LSTM family");
        steps.ReshapeInPlace({outer, seq, cur.dim(1)});
        nn::LstmCache<T> cache;
        Tensor<T> hidden;
        nn::LstmForward(steps, params_[base].value, params_[base + 1].value,
                        params_[base + 2].value, pool,
                        trace ? &cache : nullptr, hidden);
        if (trace) trace->lstm[i] = std::move(cache);
        out = std::move(hidden);
        out.ReshapeInPlace({outer * seq, layer.units});
        break;
      }
    }
    if (trace) trace->outputs[i] = out;
    cur = std::move(out);
    if (static_cast<int>(i) == stop_after_layer) return cur;
  }
  if (trace) trace->valid = true;
  return cur;
}

template <typename T>
Tensor<T> Network<T>::Forward(const Tensor<T>& input, RunMode mode, Rng* rng,
                              ThreadPool* pool, Trace<T>* trace) const {
  if (mode == RunMode::kTrain)
    FailState("training forward needs a mutable network");
  return Run(input, mode, rng, pool, trace, false, -1);
}

template <typename T>
Tensor<T> Network<T>::Forward(const Tensor<T>& input, RunMode mode, Rng* rng,
                              ThreadPool* pool, Trace<T>* trace) {
  return Run(input, mode, rng, pool, trace, mode == RunMode::kTrain, -1);
}

template <typename T>
Tensor<T> Network<T>::ForwardFeatures(const Tensor<T>& input,
                                      ThreadPool* pool) const {
  if (spec_.feature_layer < 0)
    FailArgument("network has no embedding feature layer");
  return Run(input, RunMode::kInfer, nullptr, pool, nullptr, false,
             spec_.feature_layer);
}

template <typename T>
std::vector<Tensor<T>> Network<T>::Backward(const Trace<T>& trace,
                                            std::span<const int> targets,
                                            std::span<const float> weights,
                                            ThreadPool* pool) const {
  if (!trace.valid) FailState("backward without a matching forward pass");
  std::vector<Tensor<T>> grads(params_.size());
  for (std::size_t p = 0; p < params_.size(); ++p)
    grads[p].Resize(params_[p].value.shape());

  const auto layer_input = [&](std::size_t i) -> const Tensor<T>& {
    return i == 0 ? trace.input : trace.outputs[i - 1];
  };

  Tensor<T> d;
  {
    const Tensor<T>& probs = trace.outputs.back();
    nn::SoftmaxCrossEntropyGrad(probs, targets, weights, d);
  }

  for (std::int64_t li = static_cast<std::int64_t>(spec_.layers.size()) - 1;
       li >= 0; --li) {
    const auto i = static_cast<std::size_t>(li);
    const LayerSpec& layer = spec_.layers[i];
    const int base = first_param_[i];
    Tensor<T> d_prev;
    switch (layer.kind) {
      case LayerKind::kGaussianNoise:
        d_prev = std::move(d);
        break;
      case LayerKind::kConv1d:
        nn::Conv1dBackward(layer_input(i), params_[base].value, d,
                           layer.same_pad, pool, d_prev, grads[base],
                           grads[base + 1]);
        break;
      case LayerKind::kBatchNorm:
        nn::BatchNormBackward(layer_input(i), params_[base].value, trace.bn[i],
                              d, pool, d_prev, grads[base], grads[base + 1]);
        break;
      case LayerKind::kRelu:
        nn::ReluBackward(trace.outputs[i], d, pool, d_prev);
        break;
      case LayerKind::kMaxPool:
        nn::MaxPoolBackward(trace.masks[i], d, layer_input(i).dim(1), pool,
                            d_prev);
        break;
      case LayerKind::kFlatten:
        d_prev = std::move(d);
        d_prev.ReshapeInPlace(layer_input(i).shape());
        break;
      case LayerKind::kDropout:
        if (trace.masks[i].numel() > 0)
          nn::DropoutBackward(trace.masks[i], layer.rate, d, d_prev);
        else
          d_prev = std::move(d);
        break;
      case LayerKind::kDense:
      case LayerKind::kSoftmax:
        // For softmax, `d` already holds the loss gradient at the logits.
        nn::DenseBackward(layer_input(i), params_[base].value, d, pool, d_prev,
                          grads[base], grads[base + 1]);
        break;
      case LayerKind::kLstm: {
        Tensor<T> d_steps = std::move(d);
        d_steps.ReshapeInPlace({trace.outer_batch, trace.seq_steps,
                                static_cast<std::int64_t>(layer.units)});
        Tensor<T> in_steps = layer_input(i);
        in_steps.ReshapeInPlace(
            {trace.outer_batch, trace.seq_steps, in_steps.dim(1)});
        Tensor<T> out_steps = trace.outputs[i];
        out_steps.ReshapeInPlace({trace.outer_batch, trace.seq_steps,
                                  static_cast<std::int64_t>(layer.units)});
        nn::LstmBackward(in_steps, params_[base].value, params_[base + 1].value,
                         out_steps, trace.lstm[i], d_steps, pool, d_prev,
                         grads[base], grads[base + 1], grads[base + 2]);
        d_prev.ReshapeInPlace(layer_input(i).shape());
        break;
      }
    }
    d = std::move(d_prev);
  }
  return grads;
}

template class Network<float>;
template class Network<double>;

// ---------------------------------------------------------------------------
// Checkpoint container.

namespace {

constexpr char kNetMagic[] = "MSDNET 1";

std::string FamilyName(Family family) {
  return family == Family::kCnn ? "cnn" : "cnn_lstm";
}

std::string LayerLine(const LayerSpec& layer) {
  std::ostringstream out;
  out << LayerKindName(layer.kind);
  switch (layer.kind) {
    case LayerKind::kGaussianNoise: out << ' ' << layer.stddev; break;
    case LayerKind::kConv1d:
      out << ' ' << layer.units << ' ' << (layer.same_pad ? 1 : 0);
      break;
    case LayerKind::kDropout: out << ' ' << layer.rate; break;
    case LayerKind::kDense:
    case LayerKind::kSoftmax:
    case LayerKind::kLstm: out << ' ' << layer.units; break;
    default: break;
  }
  return out.str();
}

LayerSpec ParseLayerLine(const std::string& line) {
  std::istringstream in(line);
  std::string kind;
  in >> kind;
  LayerSpec layer{};
  if (kind == "gaussian_noise") {
    layer.kind = LayerKind::kGaussianNoise;
    in >> layer.stddev;
  } else if (kind == "conv1d") {
    layer.kind = LayerKind::kConv1d;
    int same = 0;
    in >> layer.units >> same;
    layer.same_pad = same != 0;
  } else if (kind == "batch_norm") {
    layer.kind = LayerKind::kBatchNorm;
  } else if (kind == "relu") {
    layer.kind = LayerKind::kRelu;
  } else if (kind == "max_pool") {
    layer.kind = LayerKind::kMaxPool;
  } else if (kind == "flatten") {
    layer.kind = LayerKind::kFlatten;
  } else if (kind == "dropout") {
    layer.kind = LayerKind::kDropout;
    in >> layer.rate;
  } else if (kind == "dense") {
    layer.kind = LayerKind::kDense;
    in >> layer.units;
  } else if (kind == "softmax") {
    layer.kind = LayerKind::kSoftmax;
    in >> layer.units;
  } else if (kind == "lstm") {
    layer.kind = LayerKind::kLstm;
    in >> layer.units;
  } else {
    FailFormat("checkpoint: unknown layer '" + kind + "'");
  }
  if (in.fail()) FailFormat("checkpoint: bad layer line '" + line + "'");
  return layer;
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

}  // namespace

std::vector<std::uint8_t> SaveParams(const Network<float>& network) {
  const NetworkSpec& spec = network.spec();
  std::ostringstream meta;
  meta << kNetMagic << '\n';
  meta << "arch " << spec.arch_id << '\n';
  meta << "family " << FamilyName(spec.family) << '\n';
  meta << "window " << spec.window_samples << '\n';
  meta << "channels " << spec.n_channels << '\n';
  meta << "classes " << spec.n_classes << '\n';
  meta << "stride " << spec.window_stride << '\n';
  meta << "feature_layer " << spec.feature_layer << '\n';
  meta << "layers " << spec.layers.size() << '\n';
  for (const LayerSpec& layer : spec.layers) meta << LayerLine(layer) << '\n';
  meta << "tensors " << network.params().size() << '\n';
  for (const auto& p : network.params()) {
    meta << p.name << ' ' << p.value.shape().size();
    for (std::int64_t d : p.value.shape()) meta << ' ' << d;
    meta << ' ' << (p.trainable ? 1 : 0) << '\n';
  }
  meta << "data\n";

  const std::string head = meta.str();
  std::vector<std::uint8_t> bytes(head.begin(), head.end());
  for (const auto& p : network.params()) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(p.value.data());
    bytes.insert(bytes.end(), raw, raw + p.value.numel() * sizeof(float));
  }
  return bytes;
}

namespace {

Network<float> LoadNetworkImpl(const std::vector<std::uint8_t>& bytes,
                               const NetworkSpec* expected) {
  const std::string text(reinterpret_cast<const char*>(bytes.data()),
                         std::min<std::size_t>(bytes.size(), 1 << 20));
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kNetMagic)
    FailFormat("checkpoint: bad magic or unsupported version");

  NetworkSpec spec;
  auto expect_key = [&](const char* key) -> std::string {
    if (!std::getline(in, line)) FailFormat("checkpoint: truncated metadata");
    const std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0)
      FailFormat(std::string("checkpoint: expected '") + key + "' line");
    return line.substr(prefix.size());
  };
  spec.arch_id = expect_key("arch");
  const std::string family = expect_key("family");
  if (family == "cnn")
    spec.family = Family::kCnn;
  else if (family == "cnn_lstm")
    spec.family = Family::kCnnLstm;
  else
    FailFormat("checkpoint: unknown family '" + family + "'");
  spec.window_samples = std::stoll(expect_key("window"));
  spec.n_channels = std::stoi(expect_key("channels"));
  spec.n_classes = std::stoi(expect_key("classes"));
  spec.window_stride = std::stoll(expect_key("stride"));
  spec.feature_layer = std::stoi(expect_key("feature_layer"));
  const long n_layers = std::stol(expect_key("layers"));
  for (long i = 0; i < n_layers; ++i) {
    if (!std::getline(in, line)) FailFormat("checkpoint: truncated layer list");
    spec.layers.push_back(ParseLayerLine(line));
  }

  if (expected != nullptr) {
    if (expected->family != spec.family ||
        expected->window_samples != spec.window_samples ||
        expected->n_channels != spec.n_channels ||
        expected->n_classes != spec.n_classes ||
        expected->layers.size() != spec.layers.size())
      FailFormat("checkpoint does not match the expected architecture");
  }

  Network<float> network(spec);
  const long n_tensors = std::stol(expect_key("tensors"));
  if (n_tensors != static_cast<long>(network.params().size()))
    FailFormat("checkpoint: tensor count does not match the architecture");
  std::size_t total_floats = 0;
  for (long t = 0; t < n_tensors; ++t) {
    if (!std::getline(in, line)) FailFormat("checkpoint: truncated tensor list");
    std::istringstream tl(line);
    std::string name;
    std::size_t ndims = 0;
    tl >> name >> ndims;
    std::vector<std::int64_t> dims(ndims);
    for (auto& d : dims) tl >> d;
    int trainable = 0;
    tl >> trainable;
    if (tl.fail()) FailFormat("checkpoint: bad tensor line '" + line + "'");
    auto& param = network.params()[static_cast<std::size_t>(t)];
    if (param.name != name || param.value.shape() != dims)
      FailFormat("checkpoint: tensor '" + name +
                 "' does not match the architecture shape");
    total_floats += static_cast<std::size_t>(param.value.numel());
  }
  if (!std::getline(in, line) || line != "data")
    FailFormat("checkpoint: missing data marker");

  const auto offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() < offset + total_floats * sizeof(float))
    FailFormat("checkpoint: truncated tensor data");
  const std::uint8_t* raw = bytes.data() + offset;
  for (auto& param : network.params()) {
    std::memcpy(param.value.data(), raw,
                static_cast<std::size_t>(param.value.numel()) * sizeof(float));
    raw += param.value.numel() * sizeof(float);
  }
  return network;
}

}  // namespace

Network<float> LoadNetwork(const std::vector<std::uint8_t>& bytes) {
  return LoadNetworkImpl(bytes, nullptr);
}

void LoadParamsInto(Network<float>& network,
                    const std::vector<std::uint8_t>& bytes) {
  Network<float> loaded = LoadNetworkImpl(bytes, &network.spec());
  for (std::size_t p = 0; p < network.params().size(); ++p)
    network.params()[p].value = std::move(loaded.params()[p].value);
}

Network<float> LoadNetworkFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FailIo("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return LoadNetwork(bytes);
}

void SaveNetworkFile(const Network<float>& network, const std::string& path) {
  const std::vector<std::uint8_t> bytes = SaveParams(network);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) FailIo("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) FailIo("short write to '" + path + "'");
}

}  // namespace msd
