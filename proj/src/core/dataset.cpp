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

#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace msd {

SplitPlan SplitByPatient(const std::vector<std::string>& ids, double train_frac,
                         double val_frac, double test_frac,
                         std::uint64_t seed) {
  if (ids.empty()) FailArgument("cannot split an empty id list");
  if (std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    FailArgument("split fractions must sum to 1");
  if (train_frac < 0 || val_frac < 0 || test_frac < 0)
    FailArgument("split fractions must be non-negative");

  std::vector<std::string> shuffled = ids;
  Rng rng(seed);
  rng.Shuffle(shuffled);

  const auto n = static_cast<std::int64_t>(ids.size());
  std::int64_t n_train = std::lround(train_frac * static_cast<double>(n));
  n_train = std::clamp<std::int64_t>(n_train, 0, n);
  std::int64_t n_test = std::lround(test_frac * static_cast<double>(n));
  n_test = std::clamp<std::int64_t>(n_test, 0, n - n_train);
  const std::int64_t n_val = n - n_train - n_test;

  SplitPlan plan;
  plan.train_ids.assign(shuffled.begin(), shuffled.begin() + n_train);
  plan.val_ids.assign(shuffled.begin() + n_train,
                      shuffled.begin() + n_train + n_val);
  plan.test_ids.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return plan;
}

std::vector<std::int64_t> CountLabels(
    const std::vector<const LabelTrack*>& tracks, int n_classes) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (const LabelTrack* track : tracks)
    for (Label label : track->labels) {
      const auto code = static_cast<std::size_t>(label);
      if (code >= counts.size()) FailInternal("label code out of range");
      ++counts[code];
    }
  return counts;
}

std::vector<double> ClassWeightsFromCounts(
    const std::vector<std::int64_t>& counts, WeightScheme scheme) {
  if (counts.empty()) FailArgument("no classes");
  std::vector<double> weights(counts.size(), 1.0);
  if (scheme == WeightScheme::kUniform) return weights;

  const std::int64_t total = std::accumulate(counts.begin(), counts.end(),
                                             std::int64_t{0});
  if (total == 0) FailArgument("no labelled samples");
  double inv_sum = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0)
      FailArgument(std::string("inverse weighting needs every class present; "
                               "class ") +
                   std::to_string(k) + " is absent");
    weights[k] = static_cast<double>(total) / static_cast<double>(counts[k]);
    inv_sum += weights[k];
  }
  const double mean = inv_sum / static_cast<double>(counts.size());
  for (double& w : weights) w /= mean;
  return weights;
}

void ExtractWindow(const Tensor<float>& signal, std::int64_t center,
                   std::int64_t window_samples,
                   const std::vector<int>& channel_indices, float* out) {
  const std::int64_t duration = signal.dim(0);
  if (center < 0 || center >= duration) FailArgument("window center out of range");
  const std::int64_t begin = center - window_samples / 2;
  const std::int64_t channels = static_cast<std::int64_t>(channel_indices.size());
  for (std::int64_t i = 0; i < window_samples; ++i) {
    const std::int64_t src = std::clamp<std::int64_t>(begin + i, 0, duration - 1);
    for (std::int64_t c = 0; c < channels; ++c)
      out[i * channels + c] = signal.At(src, channel_indices[c]);
  }
}

namespace {

// Channel index plan for one drawn element. In three-channel mode the EEG
// slot alternates between the two derivations; EOG slots are fixed.
std::vector<int> DrawChannelPlan(int n_channels, Rng& rng) {
  if (n_channels == 1) return {0};
  const int eeg = rng.NextBool() ? 1 : 0;
  return {eeg, 2, 3};
}

void CheckChannelLayout(const std::vector<PreparedRecording>& recordings,
                        int n_channels) {
  if (n_channels != 1 && n_channels != 3)
    FailArgument("samplers support 1 or 3 input channels");
  for (const auto& rec : recordings) {
    const std::int64_t have = rec.signal.dim(1);
    if (n_channels == 3 && have < 4)
      FailArgument("recording '" + rec.id +
                   "': 3-channel sampling needs the 4-channel montage");
    if (n_channels == 1 && have < 1)
      FailArgument("recording '" + rec.id + "': no channels");
    if (rec.labels.size() != rec.signal.dim(0))
      FailArgument("recording '" + rec.id + "': label track length mismatch");
  }
}

}  // namespace

WindowSampler::WindowSampler(const std::vector<PreparedRecording>* recordings,
                             std::int64_t window_samples, int n_channels,
                             std::vector<double> class_weights)
    : recordings_(recordings),
      window_samples_(window_samples),
      n_channels_(n_channels),
      class_weights_(std::move(class_weights)) {
  if (recordings_->empty()) FailArgument("sampler needs at least one recording");
  CheckChannelLayout(*recordings_, n_channels);
  offsets_.push_back(0);
  for (const auto& rec : *recordings_)
    offsets_.push_back(offsets_.back() + rec.signal.dim(0));
  total_ = offsets_.back();
  if (total_ == 0) FailArgument("sampler has no labelled samples");
}

void WindowSampler::BeginIteration(Rng& rng) {
  order_.resize(static_cast<std::size_t>(total_));
  std::iota(order_.begin(), order_.end(), std::int64_t{0});
  rng.Shuffle(order_);
  cursor_ = 0;
  started_ = true;
}

WindowBatch WindowSampler::SampleBatch(std::int64_t batch_size, Rng& rng,
                                       bool allow_partial) {
  if (!started_) FailState("BeginIteration must run before SampleBatch");
  if (batch_size <= 0) FailArgument("batch size must be positive");
  const std::int64_t available = remaining();
  if (available == 0 || (!allow_partial && available < batch_size))
    FailArgument("not enough unvisited windows left in this iteration");
  const std::int64_t b = std::min(batch_size, available);

  WindowBatch batch;
  batch.inputs.Resize({b, window_samples_, n_channels_});
  batch.targets.resize(static_cast<std::size_t>(b));
  batch.weights.resize(static_cast<std::size_t>(b));

  for (std::int64_t i = 0; i < b; ++i) {
    const std::int64_t global = order_[static_cast<std::size_t>(cursor_++)];
    const auto rec_it =
        std::upper_bound(offsets_.begin(), offsets_.end(), global) - 1;
    const auto rec_idx = static_cast<std::size_t>(rec_it - offsets_.begin());
    const std::int64_t center = global - *rec_it;
    const PreparedRecording& rec = (*recordings_)[rec_idx];

    const std::vector<int> plan = DrawChannelPlan(n_channels_, rng);
    ExtractWindow(rec.signal, center, window_samples_, plan,
                  batch.inputs.data() + i * window_samples_ * n_channels_);
    const int target = static_cast<int>(rec.labels.labels[center]);
    batch.targets[static_cast<std::size_t>(i)] = target;
    batch.weights[static_cast<std::size_t>(i)] =
        static_cast<float>(class_weights_.at(static_cast<std::size_t>(target)));
  }
  return batch;
}

SequenceSampler::SequenceSampler(
    const std::vector<PreparedRecording>* recordings,
    std::int64_t window_samples, std::int64_t stride, std::int64_t seq_windows,
    int n_channels, std::vector<double> class_weights)
    : recordings_(recordings),
      window_samples_(window_samples),
      stride_(stride),
      seq_windows_(seq_windows),
      n_channels_(n_channels),
      class_weights_(std::move(class_weights)) {
  if (recordings_->empty()) FailArgument("sampler needs at least one recording");
  if (stride_ <= 0 || seq_windows_ <= 0 || window_samples_ <= 0)
    FailArgument("bad sequence sampler geometry");
  CheckChannelLayout(*recordings_, n_channels);

  const std::int64_t span = (seq_windows_ - 1) * stride_ + window_samples_;
  for (std::size_t r = 0; r < recordings_->size(); ++r) {
    const std::int64_t duration = (*recordings_)[r].signal.dim(0);
    for (std::int64_t start = 0; start + span <= duration; start += stride_)
      candidates_.emplace_back(static_cast<int>(r), start);
  }
  total_ = static_cast<std::int64_t>(candidates_.size());
  if (total_ == 0)
    FailArgument("no recording is long enough for one window sequence");
}

void SequenceSampler::BeginIteration(Rng& rng) {
  order_.resize(static_cast<std::size_t>(total_));
  std::iota(order_.begin(), order_.end(), std::int64_t{0});
  rng.Shuffle(order_);
  cursor_ = 0;
  started_ = true;
}

SequenceBatch SequenceSampler::SampleBatch(std::int64_t batch_size, Rng& rng,
                                           bool allow_partial) {
  if (!started_) FailState("BeginIteration must run before SampleBatch");
  if (batch_size <= 0) FailArgument("batch size must be positive");
  const std::int64_t available = remaining();
  if (available == 0 || (!allow_partial && available < batch_size))
    FailArgument("not enough unvisited sequences left in this iteration");
  const std::int64_t b = std::min(batch_size, available);

  SequenceBatch batch;
  batch.inputs.Resize({b, seq_windows_, window_samples_, n_channels_});
  batch.targets.resize(static_cast<std::size_t>(b * seq_windows_));
  batch.weights.resize(static_cast<std::size_t>(b * seq_windows_));

  for (std::int64_t i = 0; i < b; ++i) {
    const auto [rec_idx, start] =
        candidates_[static_cast<std::size_t>(order_[cursor_++])];
    const PreparedRecording& rec = (*recordings_)[static_cast<std::size_t>(rec_idx)];
    const std::vector<int> plan = DrawChannelPlan(n_channels_, rng);
    for (std::int64_t w = 0; w < seq_windows_; ++w) {
      const std::int64_t window_start = start + w * stride_;
      const std::int64_t center = window_start + window_samples_ / 2;
      ExtractWindow(rec.signal, center, window_samples_, plan,
                    batch.inputs.data() +
                        (i * seq_windows_ + w) * window_samples_ * n_channels_);
      const bool is_mse = rec.labels.labels[center] == Label::kMse;
      const int target = is_mse ? 1 : 0;
      batch.targets[static_cast<std::size_t>(i * seq_windows_ + w)] = target;
      batch.weights[static_cast<std::size_t>(i * seq_windows_ + w)] =
          static_cast<float>(class_weights_.at(static_cast<std::size_t>(target)));
    }
  }
  return batch;
}

}  // namespace msd
