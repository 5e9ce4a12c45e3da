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

#include "core/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "core/architectures.hpp"
#include "core/cache.hpp"
#include "core/edf.hpp"
#include "core/conditioning.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/labelio.hpp"
#include "core/nn/optimizer.hpp"
#include "core/segmentation.hpp"

namespace msd {

void MemoryCorpus::Add(std::string id, LabeledRecording recording) {
  recordings_[std::move(id)] = std::move(recording);
}

std::vector<std::string> MemoryCorpus::Ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, rec] : recordings_) ids.push_back(id);
  return ids;
}

const LabeledRecording& MemoryCorpus::Get(const std::string& id) const {
  const auto it = recordings_.find(id);
  if (it == recordings_.end()) FailArgument("corpus has no recording '" + id + "'");
  return it->second;
}

DirectoryCorpus::DirectoryCorpus(const std::string& dir) : dir_(dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir_)) FailIo("'" + dir_ + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    const fs::path path = entry.path();
    const std::string ext = path.extension().string();
    if (ext != ".edf" && ext != ".crec") continue;
    const std::string id = path.stem().string();
    if (!fs::exists(path.parent_path() / (id + ".labels")))
      FailIo("recording '" + id + "' has no matching .labels file");
    paths_[id] = path.string();
  }
  for (const auto& [id, path] : paths_) ids_.push_back(id);
  if (ids_.empty()) FailIo("no .edf/.crec recordings under '" + dir_ + "'");
}

std::vector<std::string> DirectoryCorpus::Ids() const { return ids_; }

const LabeledRecording& DirectoryCorpus::Get(const std::string& id) const {
  const auto cached = loaded_.find(id);
  if (cached != loaded_.end()) return cached->second;
  const auto it = paths_.find(id);
  if (it == paths_.end()) FailArgument("corpus has no recording '" + id + "'");

  LabeledRecording entry;
  if (IsCacheFile(it->second)) {
    entry.recording = LoadCacheFile(it->second);
  } else {
    // Raw EDF: condition on load so the trainer always sees filtered data.
    entry.recording = BandpassRecording(LoadEdfFile(it->second), 0.5, 45.0);
  }
  const std::string label_path =
      (std::filesystem::path(dir_) / (id + ".labels")).string();
  entry.labels = LoadLabelFile(label_path, entry.recording.duration_samples());
  return loaded_.emplace(id, std::move(entry)).first->second;
}

std::string TrainHistory::ToText() const {
  std::ostringstream out;
  out << "# msd history v1\n";
  char buf[32];
  for (const auto& [step, loss] : losses) {
    std::snprintf(buf, sizeof buf, "%.9g", loss);
    out << "step," << step << ',' << buf << '\n';
  }
  for (const auto& [iteration, class_name, kappa] : kappas) {
    std::snprintf(buf, sizeof buf, "%.6f", kappa);
    out << "iteration," << iteration << ',' << class_name << ',' << buf << '\n';
  }
  return out.str();
}

namespace {

// Channel montage the samplers expect: both EEG derivations for the
// augmentation draw plus the two EOG channels, or the single evaluation EEG
// derivation in 1-channel mode.
std::vector<std::string> TrainChannels(int n_channels) {
  if (n_channels == 1) return {kChannelO1M2};
  return {kChannelO1M2, kChannelO2M1, kChannelE1M1, kChannelE2M1};
}

PreparedRecording Prepare(const std::string& id, const LabeledRecording& entry,
                          const NetworkSpec& spec, int n_channels) {
  const Recording selected =
      SelectChannels(entry.recording, TrainChannels(n_channels));
  if (entry.labels.size() != selected.duration_samples())
    FailArgument("recording '" + id + "': label track length mismatch");
  PreparedRecording prepared;
  prepared.id = id;
  const std::int64_t duration = selected.duration_samples();
  const auto channels = static_cast<std::int64_t>(selected.channels.size());
  prepared.signal.Resize({duration, channels});
  for (std::int64_t c = 0; c < channels; ++c) {
    const auto& samples = selected.channels[static_cast<std::size_t>(c)].samples;
    for (std::int64_t t = 0; t < duration; ++t)
      prepared.signal.At(t, c) = spec.family == Family::kCnnLstm
                                     ? NormalizeLstmSample(samples[t])
                                     : NormalizeCnnSample(samples[t]);
  }
  for (const auto& name : selected.channels)
    prepared.channel_names.push_back(name.name);
  prepared.labels = entry.labels;
  return prepared;
}

}  // namespace

std::vector<std::pair<std::string, double>> ValidationKappas(
    const Network<float>& net, const Corpus& corpus,
    const std::vector<std::string>& ids, ThreadPool* pool) {
  std::vector<std::vector<std::uint8_t>> preds, refs;
  for (const std::string& id : ids) {
    const LabeledRecording& entry = corpus.Get(id);
    PredictionTrack track = PredictRecording(net, entry.recording,
                                             /*naive=*/false, pool);
    preds.push_back(std::move(track.labels));
    if (net.spec().n_classes == 2) {
      refs.push_back(BinarizeMse(entry.labels));
    } else {
      std::vector<std::uint8_t> codes(entry.labels.labels.size());
      for (std::size_t i = 0; i < codes.size(); ++i)
        codes[i] = static_cast<std::uint8_t>(entry.labels.labels[i]);
      refs.push_back(std::move(codes));
    }
  }
  std::vector<TrackPair> pairs;
  for (std::size_t i = 0; i < preds.size(); ++i)
    pairs.push_back({preds[i], refs[i]});
  const KappaReport report =
      ConcatenatedReport(pairs, net.spec().n_classes, net.spec().arch_id);
  std::vector<std::pair<std::string, double>> out;
  for (int k = 0; k < report.n_classes; ++k)
    out.emplace_back(report.ClassName(k), report.kappa[k]);
  return out;
}

TrainResult Train(const Corpus& corpus, const SplitPlan& split,
                  const TrainConfig& cfg, ThreadPool* pool,
                  const TrainCallbacks* callbacks) {
  const ArchInfo* info = FindArch(cfg.arch_id);
  if (info == nullptr)
    FailArgument("unknown architecture '" + cfg.arch_id +
                 "' (valid: " + ArchIdList() + ")");
  if (split.train_ids.empty()) FailArgument("training split is empty");

  NetworkSpec spec = BuildArch(cfg.arch_id);
  const bool is_lstm = spec.family == Family::kCnnLstm;

  const int iterations = cfg.iterations > 0 ? cfg.iterations : (is_lstm ? 8 : 3);
  const std::int64_t batch_size =
      cfg.batch_size > 0 ? cfg.batch_size : (is_lstm ? 128 : 200);
  const std::int64_t seq_windows = cfg.sequence_windows > 0
                                       ? cfg.sequence_windows
                                       : kLstmTrainSequenceWindows;
  if (cfg.clip == 1 && !is_lstm)
    FailArgument("gradient clipping is configured for the CNN-LSTM family only");
  const bool clip = cfg.clip == -1 ? is_lstm : cfg.clip != 0;
  const WeightScheme weighting = cfg.weighting.value_or(info->default_weighting);

  std::vector<PreparedRecording> training;
  for (const std::string& id : split.train_ids)
    training.push_back(Prepare(id, corpus.Get(id), spec, spec.n_channels));

  std::vector<double> class_weights;
  {
    std::vector<const LabelTrack*> tracks;
    for (const auto& rec : training) tracks.push_back(&rec.labels);
    if (spec.n_classes == 2) {
      std::vector<std::int64_t> counts(2, 0);
      for (const auto& rec : training)
        for (Label label : rec.labels.labels)
          ++counts[label == Label::kMse ? 1 : 0];
      class_weights = ClassWeightsFromCounts(counts, weighting);
    } else {
      class_weights =
          ClassWeightsFromCounts(CountLabels(tracks, spec.n_classes), weighting);
    }
  }

  Rng rng(cfg.seed);
  Network<float> net(spec);
  net.InitParams(rng);

  NadamConfig nadam_config;
  nadam_config.learning_rate = cfg.learning_rate;
  Nadam<float> optimizer(nadam_config);

  TrainResult result{std::move(net), {}};
  if (callbacks && callbacks->on_checkpoint)
    callbacks->on_checkpoint(0, result.net);

  std::optional<WindowSampler> window_sampler;
  std::optional<SequenceSampler> sequence_sampler;
  if (is_lstm)
    sequence_sampler.emplace(&training, spec.window_samples, spec.window_stride,
                             seq_windows, spec.n_channels, class_weights);
  else
    window_sampler.emplace(&training, spec.window_samples, spec.n_channels,
                           class_weights);

  std::int64_t global_step = 0;
  for (int iteration = 1; iteration <= iterations; ++iteration) {
    const std::int64_t total =
        is_lstm ? sequence_sampler->total_sequences()
                : window_sampler->total_windows();
    const std::int64_t n_batches = (total + batch_size - 1) / batch_size;
    if (is_lstm)
      sequence_sampler->BeginIteration(rng);
    else
      window_sampler->BeginIteration(rng);

    for (std::int64_t b = 0; b < n_batches; ++b) {
      Tensor<float> inputs;
      std::vector<int> targets;
      std::vector<float> weights;
      if (is_lstm) {
        SequenceBatch batch =
            sequence_sampler->SampleBatch(batch_size, rng, /*allow_partial=*/true);
        inputs = std::move(batch.inputs);
        targets = std::move(batch.targets);
        weights = std::move(batch.weights);
      } else {
        WindowBatch batch =
            window_sampler->SampleBatch(batch_size, rng, /*allow_partial=*/true);
        inputs = std::move(batch.inputs);
        targets = std::move(batch.targets);
        weights = std::move(batch.weights);
      }

      Trace<float> trace;
      const Tensor<float> probs =
          result.net.Forward(inputs, RunMode::kTrain, &rng, pool, &trace);
      const double loss =
          nn::WeightedCrossEntropy(probs, std::span<const int>(targets),
                                   std::span<const float>(weights));
      std::vector<Tensor<float>> grads = result.net.Backward(
          trace, std::span<const int>(targets), std::span<const float>(weights),
          pool);
      if (clip) ClipGradNorm(grads, cfg.clip_norm);
      optimizer.Step(result.net.params(), grads);
      result.history.losses.emplace_back(++global_step, loss);
    }

    if (callbacks && callbacks->on_checkpoint)
      callbacks->on_checkpoint(iteration, result.net);
    if (cfg.validation_snapshots && !split.val_ids.empty()) {
      for (const auto& [class_name, kappa] :
           ValidationKappas(result.net, corpus, split.val_ids, pool))
        result.history.kappas.emplace_back(iteration, class_name, kappa);
    }
  }
  return result;
}

}  // namespace msd
