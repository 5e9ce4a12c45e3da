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

#include "core/architectures.hpp"

#include "core/error.hpp"

namespace msd {
namespace {

constexpr int kBaseFilters[] = {8, 16, 32, 64};
constexpr int kRepeatFilters = 128;
constexpr double kInputNoiseStd = 0.0005;
constexpr double kDropoutRate = 0.5;
constexpr int kDenseHead = 64;
constexpr int kLstmHidden = 128;
constexpr int kEmbedFilters = 64;

void AppendBlock(NetworkSpec& spec, int filters) {
  spec.layers.push_back(LayerSpec::Conv1d(filters));
  spec.layers.push_back(LayerSpec::BatchNorm());
  spec.layers.push_back(LayerSpec::Relu());
  spec.layers.push_back(LayerSpec::MaxPool());
}

}  // namespace

int RepeatCount(int window_seconds) {
  switch (window_seconds) {
    case 2: return 3;
    case 4: return 4;
    case 8: return 5;
    case 16: return 6;
    case 32: return 7;
  }
  FailArgument("unsupported window length " + std::to_string(window_seconds) +
               " s (supported: 2, 4, 8, 16, 32)");
}

NetworkSpec BuildCnn(int window_seconds, int n_channels, bool embed) {
  if (n_channels != 1 && n_channels != 3)
    FailArgument("CNNs take 1 or 3 input channels");
  NetworkSpec spec;
  spec.family = Family::kCnn;
  spec.window_samples = static_cast<std::int64_t>(kRateHz) * window_seconds;
  spec.n_channels = n_channels;
  spec.n_classes = kNumLabels;

  spec.layers.push_back(LayerSpec::GaussianNoise(kInputNoiseStd));
  for (int filters : kBaseFilters) AppendBlock(spec, filters);
  const int repeats = RepeatCount(window_seconds);
  for (int r = 0; r < repeats; ++r) AppendBlock(spec, kRepeatFilters);
  if (embed) {
    // Feature-reduction block appended at temporal size 1; the zero-padded
    // conv leaves the length unchanged.
    spec.layers.push_back(LayerSpec::Conv1d(kEmbedFilters, /*same_pad=*/true));
    spec.layers.push_back(LayerSpec::BatchNorm());
    spec.layers.push_back(LayerSpec::Relu());
  }
  if (embed) spec.feature_layer = static_cast<int>(spec.layers.size());
  spec.layers.push_back(LayerSpec::Flatten());
  spec.layers.push_back(LayerSpec::Dropout(kDropoutRate));
  spec.layers.push_back(LayerSpec::Dense(kDenseHead));
  spec.layers.push_back(LayerSpec::Relu());
  spec.layers.push_back(LayerSpec::Softmax(kNumLabels));

  // The block map n -> floor((n-2)/2) must land on exactly one temporal step
  // before the head; anything else is a construction bug.
  const std::vector<ShapeStep> steps = PropagateShapes(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind == LayerKind::kFlatten &&
        steps[i - 1].temporal != 1)
      FailInternal("window ladder did not reduce to temporal size 1");
  }
  return spec;
}

NetworkSpec BuildCnnLstm() {
  NetworkSpec spec;
  spec.family = Family::kCnnLstm;
  spec.window_samples = kLstmEncoderWindow;
  spec.window_stride = kLstmWindowStride;
  spec.n_channels = 3;
  spec.n_classes = 2;  // MSE against everything else

  spec.layers.push_back(LayerSpec::GaussianNoise(kInputNoiseStd));
  for (int filters : kBaseFilters) AppendBlock(spec, filters);
  AppendBlock(spec, kRepeatFilters);
  AppendBlock(spec, kRepeatFilters);
  spec.layers.push_back(LayerSpec::Flatten());
  spec.layers.push_back(LayerSpec::Lstm(kLstmHidden));
  spec.layers.push_back(LayerSpec::Softmax(2));

  const std::vector<ShapeStep> steps = PropagateShapes(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind == LayerKind::kFlatten &&
        steps[i - 1].temporal != 1)
      FailInternal("encoder ladder did not reduce to temporal size 1");
  }
  return spec;
}

const std::vector<ArchInfo>& ArchRegistry() {
  static const std::vector<ArchInfo> registry = {
      {"2s", Family::kCnn, 2, 3, WeightScheme::kInverse, false},
      {"4s", Family::kCnn, 4, 3, WeightScheme::kInverse, false},
      {"8s", Family::kCnn, 8, 3, WeightScheme::kInverse, false},
      {"16s", Family::kCnn, 16, 3, WeightScheme::kInverse, false},
      {"32s", Family::kCnn, 32, 3, WeightScheme::kInverse, false},
      {"16s_u", Family::kCnn, 16, 3, WeightScheme::kUniform, false},
      {"16s_1c", Family::kCnn, 16, 1, WeightScheme::kInverse, false},
      {"cnn_lstm", Family::kCnnLstm, 0, 3, WeightScheme::kInverse, false},
      {"16s_e", Family::kCnn, 16, 3, WeightScheme::kInverse, true},
  };
  return registry;
}

const ArchInfo* FindArch(const std::string& id) {
  for (const ArchInfo& info : ArchRegistry())
    if (info.id == id) return &info;
  return nullptr;
}

std::string ArchIdList() {
  std::string out;
  for (const ArchInfo& info : ArchRegistry()) {
    if (!out.empty()) out += ", ";
    out += info.id;
  }
  return out;
}

NetworkSpec BuildArch(const std::string& id) {
  const ArchInfo* info = FindArch(id);
  if (info == nullptr)
    FailArgument("unknown architecture '" + id + "' (valid: " + ArchIdList() +
                 ")");
  NetworkSpec spec = info->family == Family::kCnnLstm
                         ? BuildCnnLstm()
                         : BuildCnn(info->window_seconds, info->n_channels,
                                    info->embed);
  spec.arch_id = info->id;
  return spec;
}

std::vector<std::string> EvalChannels(const NetworkSpec& spec) {
  if (spec.n_channels == 1) return {kChannelO1M2};
  return {kChannelO1M2, kChannelE1M1, kChannelE2M1};
}

}  // namespace msd
