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

#include "msd/msd.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/architectures.hpp"
#include "core/cache.hpp"
#include "core/conditioning.hpp"
#include "core/dataset.hpp"
#include "core/edf.hpp"
#include "core/embedding.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/labelio.hpp"
#include "core/nn/network.hpp"
#include "core/segmentation.hpp"
#include "core/synthgen.hpp"
#include "core/trainer.hpp"

struct msd_recording {
  msd::Recording rec;
};
struct msd_labels {
  msd::LabelTrack track;
};
struct msd_model {
  msd::Network<float> net;
};
struct msd_prediction {
  msd::PredictionTrack track;
  double rate_hz = msd::kRateHz;
};

namespace {

thread_local std::string t_last_error;

template <typename Fn>
msd_status Guard(Fn&& fn) {
  try {
    fn();
    return MSD_OK;
  } catch (const msd::Error& error) {
    t_last_error = error.what();
    switch (error.kind()) {
      case msd::ErrorKind::kIo: return MSD_ERR_IO;
      case msd::ErrorKind::kFormat: return MSD_ERR_FORMAT;
      case msd::ErrorKind::kArgument: return MSD_ERR_ARGUMENT;
      case msd::ErrorKind::kState: return MSD_ERR_STATE;
      case msd::ErrorKind::kInternal: return MSD_ERR_INTERNAL;
    }
    return MSD_ERR_INTERNAL;
  } catch (const std::exception& error) {
    t_last_error = error.what();
    return MSD_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return MSD_ERR_INTERNAL;
  }
}

bool NullArgs(bool ok) {
  if (!ok) t_last_error = "null argument";
  return !ok;
}

}  // namespace

extern "C" {

const char* msd_status_name(msd_status status) {
  switch (status) {
    case MSD_OK: return "ok";
    case MSD_ERR_IO: return "io";
    case MSD_ERR_FORMAT: return "format";
    case MSD_ERR_ARGUMENT: return "argument";
    case MSD_ERR_STATE: return "state";
    case MSD_ERR_INTERNAL: return "internal";
  }
  return "?";
}

const char* msd_last_error(void) { return t_last_error.c_str(); }

const char* msd_version(void) { return "0.1.0"; }

void msd_set_threads(int n) { msd::ThreadPool::SetDefaultThreads(n); }

// ---------------------------------------------------------------------------
// Recordings.

msd_status msd_recording_open(const char* path, msd_recording** out) {
  if (NullArgs(path && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    auto handle = std::make_unique<msd_recording>();
    handle->rec = msd::LoadRecordingAuto(path);
    *out = handle.release();
  });
}

msd_status msd_recording_save_cache(const msd_recording* rec, const char* path) {
  if (NullArgs(rec && path)) return MSD_ERR_ARGUMENT;
  return Guard([&] { msd::SaveCacheFile(rec->rec, path); });
}

msd_status msd_recording_save_edf(const msd_recording* rec, const char* path) {
  if (NullArgs(rec && path)) return MSD_ERR_ARGUMENT;
  return Guard([&] { msd::SaveEdfFile(rec->rec, path); });
}

msd_status msd_recording_bandpass(const msd_recording* rec, double low_hz,
                                  double high_hz, msd_recording** out) {
  if (NullArgs(rec && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    auto handle = std::make_unique<msd_recording>();
    handle->rec = msd::BandpassRecording(rec->rec, low_hz, high_hz);
    *out = handle.release();
  });
}

msd_status msd_recording_select_channels(const msd_recording* rec,
                                         const char* const* names, size_t count,
                                         msd_recording** out) {
  if (NullArgs(rec && names && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    std::vector<std::string> list(names, names + count);
    auto handle = std::make_unique<msd_recording>();
    handle->rec = msd::SelectChannels(rec->rec, list);
    *out = handle.release();
  });
}

void msd_recording_free(msd_recording* rec) { delete rec; }

const char* msd_recording_id(const msd_recording* rec) {
  return rec->rec.id.c_str();
}
double msd_recording_rate_hz(const msd_recording* rec) {
  return rec->rec.rate_hz;
}
int64_t msd_recording_duration(const msd_recording* rec) {
  return rec->rec.duration_samples();
}
size_t msd_recording_channel_count(const msd_recording* rec) {
  return rec->rec.channels.size();
}
const char* msd_recording_channel_name(const msd_recording* rec, size_t index) {
  if (index >= rec->rec.channels.size()) return nullptr;
  return rec->rec.channels[index].name.c_str();
}

msd_status msd_recording_copy_samples(const msd_recording* rec, size_t channel,
                                      double* out, int64_t capacity) {
  if (NullArgs(rec && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    if (channel >= rec->rec.channels.size())
      msd::FailArgument("channel index out of range");
    const auto& samples = rec->rec.channels[channel].samples;
    if (capacity < static_cast<int64_t>(samples.size()))
      msd::FailArgument("buffer too small for channel samples");
    std::copy(samples.begin(), samples.end(), out);
  });
}

// ---------------------------------------------------------------------------
// Labels.

msd_status msd_labels_load(const char* path, int64_t duration_samples,
                           msd_labels** out) {
  if (NullArgs(path && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    auto handle = std::make_unique<msd_labels>();
    handle->track = msd::LoadLabelFile(path, duration_samples);
    *out = handle.release();
  });
}

msd_status msd_labels_save(const msd_labels* labels, const char* path) {
  if (NullArgs(labels && path)) return MSD_ERR_ARGUMENT;
  return Guard([&] { msd::SaveLabelFile(labels->track, path); });
}

int64_t msd_labels_size(const msd_labels* labels) {
  return labels->track.size();
}

int msd_labels_at(const msd_labels* labels, int64_t index) {
  if (index < 0 || index >= labels->track.size()) return -1;
  return static_cast<int>(labels->track.labels[static_cast<std::size_t>(index)]);
}

void msd_labels_free(msd_labels* labels) { delete labels; }

// ---------------------------------------------------------------------------
// Models.

msd_status msd_model_create(const char* arch_id, uint64_t seed,
                            msd_model** out) {
  if (NullArgs(arch_id && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    msd::Network<float> net(msd::BuildArch(arch_id));
    msd::Rng rng(seed);
    net.InitParams(rng);
    *out = new msd_model{std::move(net)};
  });
}

msd_status msd_model_load(const char* path, msd_model** out) {
  if (NullArgs(path && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] { *out = new msd_model{msd::LoadNetworkFile(path)}; });
}

msd_status msd_model_save(const msd_model* model, const char* path) {
  if (NullArgs(model && path)) return MSD_ERR_ARGUMENT;
  return Guard([&] { msd::SaveNetworkFile(model->net, path); });
}

const char* msd_model_arch(const msd_model* model) {
  return model->net.spec().arch_id.c_str();
}
int msd_model_classes(const msd_model* model) {
  return model->net.spec().n_classes;
}
int64_t msd_model_window_samples(const msd_model* model) {
  return model->net.spec().window_samples;
}
void msd_model_free(msd_model* model) { delete model; }

// ---------------------------------------------------------------------------
// Training.

void msd_train_options_init(msd_train_options* options) {
  options->weighting = nullptr;
  options->seed = 1;
  options->iterations = -1;
  options->batch_size = 0;
  options->sequence_windows = 0;
  options->learning_rate = 0.002;
  options->clip = -1;
  options->clip_norm = 1.0;
  options->train_fraction = 0.70;
  options->val_fraction = 0.15;
  options->test_fraction = 0.15;
  options->validation_snapshots = 1;
}

msd_status msd_train(const char* data_dir, const char* arch_id,
                     const char* out_dir, const msd_train_options* options,
                     msd_model** final_model) {
  if (NullArgs(data_dir && arch_id && out_dir && options))
    return MSD_ERR_ARGUMENT;
  return Guard([&] {
    namespace fs = std::filesystem;
    msd::DirectoryCorpus corpus(data_dir);
    const msd::SplitPlan split = msd::SplitByPatient(
        corpus.Ids(), options->train_fraction, options->val_fraction,
        options->test_fraction, options->seed);

    msd::TrainConfig cfg;
    cfg.arch_id = arch_id;
    if (options->weighting != nullptr) {
      const std::string scheme = options->weighting;
      if (scheme == "inverse")
        cfg.weighting = msd::WeightScheme::kInverse;
      else if (scheme == "uniform")
        cfg.weighting = msd::WeightScheme::kUniform;
      else
        msd::FailArgument("weighting must be 'inverse' or 'uniform'");
    }
    cfg.seed = options->seed;
    cfg.iterations = options->iterations;
    cfg.batch_size = options->batch_size;
    cfg.sequence_windows = options->sequence_windows;
    cfg.learning_rate = options->learning_rate;
    cfg.clip = options->clip;
    cfg.clip_norm = options->clip_norm;
    cfg.validation_snapshots = options->validation_snapshots != 0;

    fs::create_directories(out_dir);
    msd::TrainCallbacks callbacks;
    callbacks.on_checkpoint = [&](int iteration,
                                  const msd::Network<float>& net) {
      char name[48];
      std::snprintf(name, sizeof name, "checkpoint_%03d.msdnet", iteration);
      msd::SaveNetworkFile(net, (fs::path(out_dir) / name).string());
    };

    msd::TrainResult result = msd::Train(corpus, split, cfg,
                                         &msd::ThreadPool::Global(), &callbacks);

    std::ofstream history((fs::path(out_dir) / "history.txt").string(),
                          std::ios::binary | std::ios::trunc);
    history << result.history.ToText();
    if (!history) msd::FailIo("cannot write history.txt");
    std::ofstream split_file((fs::path(out_dir) / "split.txt").string(),
                             std::ios::binary | std::ios::trunc);
    split_file << "# msd split v1\n";
    for (const auto& id : split.train_ids) split_file << "train," << id << '\n';
    for (const auto& id : split.val_ids) split_file << "val," << id << '\n';
    for (const auto& id : split.test_ids) split_file << "test," << id << '\n';
    if (!split_file) msd::FailIo("cannot write split.txt");

    if (final_model != nullptr)
      *final_model = new msd_model{std::move(result.net)};
  });
}

// ---------------------------------------------------------------------------
// Prediction.

msd_status msd_predict(const msd_model* model, const msd_recording* conditioned,
                       int naive, msd_prediction** out) {
  if (NullArgs(model && conditioned && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    auto handle = std::make_unique<msd_prediction>();
    handle->track = msd::PredictRecording(model->net, conditioned->rec,
                                          naive != 0,
                                          &msd::ThreadPool::Global());
    handle->rate_hz = conditioned->rec.rate_hz;
    *out = handle.release();
  });
}

msd_status msd_prediction_coarsen(const msd_prediction* pred,
                                  int64_t interval_samples,
                                  msd_prediction** out) {
  if (NullArgs(pred && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    auto handle = std::make_unique<msd_prediction>();
    handle->track = msd::CoarsenMajority(pred->track, interval_samples);
    handle->rate_hz = pred->rate_hz;
    *out = handle.release();
  });
}

msd_status msd_prediction_save(const msd_prediction* pred, const char* path) {
  if (NullArgs(pred && path)) return MSD_ERR_ARGUMENT;
  return Guard([&] { msd::SavePredictionFile(pred->track, path); });
}

msd_status msd_prediction_save_episodes(const msd_prediction* pred,
                                        double min_seconds, double max_seconds,
                                        const char* path) {
  if (NullArgs(pred && path)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    const std::vector<std::uint8_t> filtered = msd::ApplyDurationCriteria(
        pred->track.labels, pred->rate_hz, min_seconds, max_seconds);
    std::vector<msd::Episode> episodes = msd::EpisodesFromLabels(filtered);
    msd::FlagLongSleepEpisodes(episodes, pred->rate_hz, max_seconds);
    msd::SaveEpisodesFile(episodes, pred->track.n_classes, path);
  });
}

int64_t msd_prediction_duration(const msd_prediction* pred) {
  return pred->track.duration();
}
int msd_prediction_classes(const msd_prediction* pred) {
  return pred->track.n_classes;
}
int64_t msd_prediction_resolution(const msd_prediction* pred) {
  return pred->track.resolution_samples;
}
int msd_prediction_label(const msd_prediction* pred, int64_t index) {
  if (index < 0 || index >= pred->track.duration()) return -1;
  return pred->track.labels[static_cast<std::size_t>(index)];
}
double msd_prediction_prob(const msd_prediction* pred, int64_t index,
                           int class_code) {
  if (index < 0 || index >= pred->track.duration() || class_code < 0 ||
      class_code >= pred->track.n_classes)
    return -1.0;
  return pred->track.probs[index * pred->track.n_classes + class_code];
}
void msd_prediction_free(msd_prediction* pred) { delete pred; }

// ---------------------------------------------------------------------------
// Evaluation.

msd_status msd_evaluate_dirs(const char* pred_dir, const char* label_dir,
                             const char* report_path) {
  if (NullArgs(pred_dir && label_dir && report_path))
    return MSD_ERR_ARGUMENT;
  return Guard([&] {
    namespace fs = std::filesystem;
    if (!fs::is_directory(pred_dir))
      msd::FailIo(std::string("'") + pred_dir + "' is not a directory");

    std::vector<std::string> pred_paths;
    for (const auto& entry : fs::directory_iterator(pred_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".pred")
        pred_paths.push_back(entry.path().string());
    std::sort(pred_paths.begin(), pred_paths.end());
    if (pred_paths.empty())
      msd::FailIo(std::string("no .pred files under '") + pred_dir + "'");

    std::vector<msd::PredictionTrack> tracks;
    std::vector<std::vector<std::uint8_t>> refs;
    std::string arch;
    int n_classes = 0;
    for (const std::string& path : pred_paths) {
      msd::PredictionTrack track = msd::LoadPredictionFile(path);
      if (n_classes == 0) {
        n_classes = track.n_classes;
        arch = track.arch_id;
      } else if (n_classes != track.n_classes) {
        msd::FailArgument("prediction files mix class counts");
      }
      const std::string id = fs::path(path).stem().string();
      const std::string label_path =
          (fs::path(label_dir) / (id + ".labels")).string();
      msd::LabelTrack ref;
      try {
        ref = msd::LoadLabelFile(label_path, track.duration());
      } catch (const msd::Error& error) {
        msd::FailIo("recording '" + id + "': " + error.what());
      }
      if (n_classes == 2) {
        refs.push_back(msd::BinarizeMse(ref));
      } else {
        std::vector<std::uint8_t> codes(ref.labels.size());
        for (std::size_t i = 0; i < codes.size(); ++i)
          codes[i] = static_cast<std::uint8_t>(ref.labels[i]);
        refs.push_back(std::move(codes));
      }
      tracks.push_back(std::move(track));
    }

    std::vector<msd::TrackPair> pairs;
    for (std::size_t i = 0; i < tracks.size(); ++i)
      pairs.push_back({tracks[i].labels, refs[i]});
    const msd::KappaReport report =
        msd::ConcatenatedReport(pairs, n_classes, arch);
    msd::SaveKappaReportFile(report, report_path);
  });
}

msd_status msd_cohen_kappa(const uint8_t* a, const uint8_t* b, int64_t length,
                           double* out) {
  if (NullArgs(a && b && out)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    *out = msd::CohenKappa({a, static_cast<std::size_t>(length)},
                           {b, static_cast<std::size_t>(length)});
  });
}

// ---------------------------------------------------------------------------
// Embedding.

void msd_embed_options_init(msd_embed_options* options) {
  options->stride = 100;
  options->perplexity = 30.0;
  options->iterations = 1000;
  options->seed = 1;
}

msd_status msd_embed(const msd_model* model, const msd_recording* conditioned,
                     const char* labels_path, const msd_embed_options* options,
                     const char* out_path) {
  if (NullArgs(model && conditioned && options && out_path))
    return MSD_ERR_ARGUMENT;
  return Guard([&] {
    msd::LabelTrack labels;
    const msd::LabelTrack* labels_ptr = nullptr;
    if (labels_path != nullptr) {
      labels = msd::LoadLabelFile(labels_path,
                                  conditioned->rec.duration_samples());
      labels_ptr = &labels;
    }
    const msd::FeatureSet features =
        msd::ExtractFeatures(model->net, conditioned->rec, labels_ptr,
                             options->stride, &msd::ThreadPool::Global());
    msd::TsneConfig config;
    config.perplexity = options->perplexity;
    config.iterations = options->iterations;
    const msd::TsneResult result = msd::Tsne(
        features.vectors, config, options->seed, &msd::ThreadPool::Global());
    msd::SaveEmbeddingFile(result, features, model->net.spec().arch_id,
                           out_path);
  });
}

// ---------------------------------------------------------------------------
// Synthetic corpora.

void msd_synth_options_init(msd_synth_options* options) {
  options->recordings = 4;
  options->duration_seconds = 300.0;
  options->mse_fraction = 0.08;
}

msd_status msd_synth(const char* out_dir, const msd_synth_options* options,
                     uint64_t seed) {
  if (NullArgs(out_dir && options)) return MSD_ERR_ARGUMENT;
  return Guard([&] {
    msd::SynthConfig config;
    config.duration_seconds = options->duration_seconds;
    config.mse_fraction = options->mse_fraction;
    msd::GenerateSyntheticCorpus(out_dir, options->recordings, config, seed);
  });
}

}  // extern "C"
