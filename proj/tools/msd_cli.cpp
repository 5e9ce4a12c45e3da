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
// Command-line front end. Everything goes through the public C API in
// msd/msd.h; this binary only parses flags, resolves paths and reports
// errors.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "msd/msd.h"

namespace fs = std::filesystem;

namespace {

[[noreturn]] void Fail(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  std::exit(1);
}

void Check(msd_status status) {
  if (status != MSD_OK)
    Fail(std::string(msd_status_name(status)) + ": " + msd_last_error());
}

// Removes outputs created by a failed command. Tracks which paths existed
// before the command ran; on rollback, new files and directories disappear
// and pre-existing ones stay.
class OutputJanitor {
 public:
  void Track(const fs::path& root) {
    Entry entry;
    entry.root = root;
    entry.existed = fs::exists(root);
    if (entry.existed && fs::is_directory(root))
      for (const auto& sub : fs::recursive_directory_iterator(root))
        entry.prior.insert(sub.path().string());
    entries_.push_back(std::move(entry));
  }

  void Commit() { committed_ = true; }

  ~OutputJanitor() {
    if (committed_) return;
    std::error_code ec;
    for (const Entry& entry : entries_) {
      if (!fs::exists(entry.root)) continue;
      if (!entry.existed) {
        fs::remove_all(entry.root, ec);
        continue;
      }
      if (!fs::is_directory(entry.root)) continue;
      std::vector<fs::path> added;
      for (const auto& sub : fs::recursive_directory_iterator(entry.root))
        if (!entry.prior.count(sub.path().string()))
          added.push_back(sub.path());
      // Children first.
      for (auto it = added.rbegin(); it != added.rend(); ++it)
        fs::remove_all(*it, ec);
    }
  }

 private:
  struct Entry {
    fs::path root;
    bool existed = false;
    std::set<std::string> prior;
  };
  std::vector<Entry> entries_;
  bool committed_ = false;
};

struct RecordingHandle {
  msd_recording* ptr = nullptr;
  ~RecordingHandle() { msd_recording_free(ptr); }
};
struct ModelHandle {
  msd_model* ptr = nullptr;
  ~ModelHandle() { msd_model_free(ptr); }
};
struct PredictionHandle {
  msd_prediction* ptr = nullptr;
  ~PredictionHandle() { msd_prediction_free(ptr); }
};

// Line-oriented `key = value` config. Flags override config values, so the
// parse happens before CLI11 applies defaults.
std::map<std::string, std::string> ReadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open config '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (!key.empty()) values[key] = value;
  }
  return values;
}

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> config;

  std::string Get(const std::string& key, const std::string& fallback) const {
    const auto it = config.find(key);
    return it == config.end() ? fallback : it->second;
  }
};

int CmdCondition(const std::string& input, const std::string& output,
                 double low, double high) {
  OutputJanitor janitor;
  janitor.Track(output);
  RecordingHandle raw, filtered;
  Check(msd_recording_open(input.c_str(), &raw.ptr));
  Check(msd_recording_bandpass(raw.ptr, low, high, &filtered.ptr));
  Check(msd_recording_save_cache(filtered.ptr, output.c_str()));
  janitor.Commit();
  std::cout << "conditioned " << input << " -> " << output << "\n";
  return 0;
}

int CmdSynth(const std::string& out_dir, int recordings, double duration_s,
             double mse_fraction, std::uint64_t seed) {
  OutputJanitor janitor;
  janitor.Track(out_dir);
  msd_synth_options options;
  msd_synth_options_init(&options);
  options.recordings = recordings;
  options.duration_seconds = duration_s;
  options.mse_fraction = mse_fraction;
  Check(msd_synth(out_dir.c_str(), &options, seed));
  janitor.Commit();
  std::cout << "wrote " << recordings << " synthetic recordings under "
            << out_dir << "\n";
  return 0;
}

int CmdTrain(const std::string& data, const std::string& arch,
             const std::string& out_dir, const msd_train_options& options) {
  OutputJanitor janitor;
  janitor.Track(out_dir);
  Check(msd_train(data.c_str(), arch.c_str(), out_dir.c_str(), &options,
                  nullptr));
  janitor.Commit();
  std::cout << "trained " << arch << " -> " << out_dir << "\n";
  return 0;
}

int CmdPredict(const std::string& checkpoint, const std::string& recording,
               const std::string& out_dir, bool naive, bool already_conditioned,
               double low, double high) {
  OutputJanitor janitor;
  janitor.Track(out_dir);
  fs::create_directories(out_dir);

  ModelHandle model;
  Check(msd_model_load(checkpoint.c_str(), &model.ptr));
  RecordingHandle raw, conditioned;
  Check(msd_recording_open(recording.c_str(), &raw.ptr));
  const bool is_cache = fs::path(recording).extension() == ".crec";
  if (already_conditioned || is_cache) {
    conditioned.ptr = raw.ptr;
    raw.ptr = nullptr;
  } else {
    Check(msd_recording_bandpass(raw.ptr, low, high, &conditioned.ptr));
  }

  PredictionHandle dense, coarse;
  Check(msd_predict(model.ptr, conditioned.ptr, naive ? 1 : 0, &dense.ptr));
  Check(msd_prediction_coarsen(dense.ptr, 100, &coarse.ptr));

  const std::string id = fs::path(recording).stem().string();
  const fs::path base = fs::path(out_dir) / id;
  Check(msd_prediction_save(dense.ptr, (base.string() + ".pred").c_str()));
  Check(msd_prediction_save(coarse.ptr, (base.string() + ".coarse").c_str()));
  Check(msd_prediction_save_episodes(coarse.ptr, 1.0, 15.0,
                                     (base.string() + ".episodes").c_str()));
  janitor.Commit();
  std::cout << "predicted " << id << " -> " << out_dir << "\n";
  return 0;
}

int CmdEvaluate(const std::string& pred_dir, const std::string& label_dir,
                const std::string& report) {
  OutputJanitor janitor;
  janitor.Track(report);
  Check(msd_evaluate_dirs(pred_dir.c_str(), label_dir.c_str(), report.c_str()));
  janitor.Commit();
  std::ifstream in(report);
  std::cout << in.rdbuf();
  return 0;
}

int CmdEmbed(const std::string& checkpoint, const std::string& recording,
             const std::string& out_path, const std::string& labels,
             const msd_embed_options& options, bool already_conditioned,
             double low, double high) {
  OutputJanitor janitor;
  janitor.Track(out_path);
  ModelHandle model;
  Check(msd_model_load(checkpoint.c_str(), &model.ptr));
  RecordingHandle raw, conditioned;
  Check(msd_recording_open(recording.c_str(), &raw.ptr));
  const bool is_cache = fs::path(recording).extension() == ".crec";
  if (already_conditioned || is_cache) {
    conditioned.ptr = raw.ptr;
    raw.ptr = nullptr;
  } else {
    Check(msd_recording_bandpass(raw.ptr, low, high, &conditioned.ptr));
  }
  Check(msd_embed(model.ptr, conditioned.ptr,
                  labels.empty() ? nullptr : labels.c_str(), &options,
                  out_path.c_str()));
  janitor.Commit();
  std::cout << "embedded " << recording << " -> " << out_path << "\n";
  return 0;
}

// Pipeline driver for config files with a `stages = ...` list.
int CmdRun(const CommonOptions& common) {
  const std::string data = common.Get("data", "");
  const std::string out = common.Get("out", "");
  const std::string arch = common.Get("arch", "16s");
  if (data.empty() || out.empty())
    Fail("run needs `data` and `out` in the config");
  const std::uint64_t seed = std::stoull(common.Get("seed", "1"));

  std::set<std::string> stages;
  {
    std::string list = common.Get("stages", "filter,train,predict,evaluate");
    for (std::size_t begin = 0; begin <= list.size();) {
      const auto comma = list.find(',', begin);
      const std::string stage =
          list.substr(begin, comma == std::string::npos ? std::string::npos
                                                        : comma - begin);
      if (!stage.empty()) stages.insert(stage);
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
  }

  fs::create_directories(out);
  std::string corpus_dir = data;

  if (stages.count("filter")) {
    const fs::path conditioned_dir = fs::path(out) / "conditioned";
    fs::create_directories(conditioned_dir);
    for (const auto& entry : fs::directory_iterator(data)) {
      if (entry.path().extension() == ".edf") {
        const std::string id = entry.path().stem().string();
        CmdCondition(entry.path().string(),
                     (conditioned_dir / (id + ".crec")).string(), 0.5, 45.0);
        fs::copy_file(fs::path(data) / (id + ".labels"),
                      conditioned_dir / (id + ".labels"),
                      fs::copy_options::overwrite_existing);
      }
    }
    corpus_dir = conditioned_dir.string();
  }

  const fs::path train_dir = fs::path(out) / "train";
  if (stages.count("train")) {
    msd_train_options options;
    msd_train_options_init(&options);
    options.seed = seed;
    const std::string weighting = common.Get("weighting", "");
    if (!weighting.empty()) options.weighting = weighting.c_str();
    options.iterations = std::stoi(common.Get("iterations", "-1"));
    options.batch_size = std::stoll(common.Get("batch", "0"));
    CmdTrain(corpus_dir, arch, train_dir.string(), options);
  }

  // Predict the validation recordings against the last checkpoint.
  std::vector<std::string> predict_ids;
  {
    std::ifstream split(train_dir / "split.txt");
    std::string line;
    while (std::getline(split, line))
      if (line.rfind("val,", 0) == 0) predict_ids.push_back(line.substr(4));
    if (predict_ids.empty())
      for (const auto& entry : fs::directory_iterator(corpus_dir))
        if (entry.path().extension() != ".labels")
          predict_ids.push_back(entry.path().stem().string());
  }
  std::string checkpoint;
  for (int i = 0; i < 1000; ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "checkpoint_%03d.msdnet", i);
    if (fs::exists(train_dir / name)) checkpoint = (train_dir / name).string();
  }

  if (stages.count("predict")) {
    if (checkpoint.empty()) Fail("run: no checkpoint found under train/");
    for (const std::string& id : predict_ids) {
      fs::path rec_path = fs::path(corpus_dir) / (id + ".crec");
      if (!fs::exists(rec_path)) rec_path = fs::path(corpus_dir) / (id + ".edf");
      CmdPredict(checkpoint, rec_path.string(), (fs::path(out) / "pred").string(),
                 false, false, 0.5, 45.0);
    }
  }

  if (stages.count("evaluate"))
    CmdEvaluate((fs::path(out) / "pred").string(), corpus_dir,
                (fs::path(out) / "report.txt").string());

  if (stages.count("embed")) {
    if (checkpoint.empty()) Fail("run: no checkpoint found under train/");
    if (predict_ids.empty()) Fail("run: nothing to embed");
    msd_embed_options options;
    msd_embed_options_init(&options);
    options.seed = seed;
    const std::string id = predict_ids.front();
    fs::path rec_path = fs::path(corpus_dir) / (id + ".crec");
    if (!fs::exists(rec_path)) rec_path = fs::path(corpus_dir) / (id + ".edf");
    CmdEmbed(checkpoint, rec_path.string(),
             (fs::path(out) / "embedding.txt").string(),
             (fs::path(corpus_dir) / (id + ".labels")).string(), options, false,
             0.5, 45.0);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"microsleep segmentation toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  CommonOptions common;
  app.add_option("--config", common.config_path,
                 "line-oriented key = value config file");

  // condition
  std::string in_path, out_path;
  double low = 0.5, high = 45.0;
  auto* condition = app.add_subcommand(
      "condition", "band-pass filter a recording into a .crec cache");
  condition->add_option("input", in_path, "input .edf")->required();
  condition->add_option("--out", out_path, "output .crec")->required();
  condition->add_option("--low", low, "low cut (Hz)");
  condition->add_option("--high", high, "high cut (Hz)");

  // synth
  std::string synth_out;
  int synth_n = 4;
  double synth_duration = 300.0, synth_fraction = 0.08;
  std::uint64_t seed = 1;
  auto* synth =
      app.add_subcommand("synth", "generate a synthetic labelled corpus");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--recordings", synth_n, "number of recordings");
  synth->add_option("--duration-s", synth_duration, "seconds per recording");
  synth->add_option("--mse-fraction", synth_fraction, "target MSE fraction");
  synth->add_option("--seed", seed, "rng seed");

  // train
  std::string data_dir, arch = "16s", train_out, weighting;
  int iterations = -1, clip = -1, no_snapshots = 0;
  std::int64_t batch = 0, seq_windows = 0;
  auto* train = app.add_subcommand("train", "train one architecture");
  train->add_option("--data", data_dir, "corpus directory");
  train->add_option("--arch", arch,
                    "architecture id (2s,4s,8s,16s,32s,16s_u,16s_1c,cnn_lstm,"
                    "16s_e)");
  train->add_option("--out", train_out, "output directory");
  train->add_option("--weighting", weighting, "inverse|uniform");
  train->add_option("--seed", seed, "rng seed");
  train->add_option("--iterations", iterations,
                    "training iterations (-1 = family default)");
  train->add_option("--batch", batch, "batch size (0 = family default)");
  train->add_option("--seq-windows", seq_windows,
                    "CNN-LSTM training sequence length in windows");
  train->add_option("--clip", clip, "gradient clipping (-1 auto, 0 off, 1 on)");
  train->add_flag("--no-snapshots", no_snapshots,
                  "skip per-iteration validation kappas");

  // predict
  std::string checkpoint, rec_path, pred_out;
  bool naive = false, conditioned_in = false;
  auto* predict =
      app.add_subcommand("predict", "dense per-sample prediction + episodes");
  predict->add_option("checkpoint", checkpoint, "trained .msdnet")->required();
  predict->add_option("recording", rec_path, ".edf or .crec")->required();
  predict->add_option("--out", pred_out, "output directory")->required();
  predict->add_flag("--naive", naive, "force the per-window reference path");
  predict->add_flag("--conditioned", conditioned_in,
                    "input is already band-passed");
  predict->add_option("--low", low, "low cut (Hz) for raw EDF input");
  predict->add_option("--high", high, "high cut (Hz) for raw EDF input");

  // evaluate
  std::string eval_pred, eval_labels, eval_report;
  auto* evaluate = app.add_subcommand(
      "evaluate", "per-class kappa report over concatenated recordings");
  evaluate->add_option("--pred", eval_pred, "directory of .pred files")
      ->required();
  evaluate->add_option("--labels", eval_labels, "directory of .labels files")
      ->required();
  evaluate->add_option("--out", eval_report, "report file")->required();

  // embed
  std::string embed_labels, embed_out;
  msd_embed_options embed_options;
  msd_embed_options_init(&embed_options);
  auto* embed =
      app.add_subcommand("embed", "hidden-feature extraction + 2D t-SNE");
  embed->add_option("checkpoint", checkpoint, "embedding-enabled .msdnet")
      ->required();
  embed->add_option("recording", rec_path, ".edf or .crec")->required();
  embed->add_option("--out", embed_out, "embedding file")->required();
  embed->add_option("--labels", embed_labels, "expert labels for coloring");
  embed->add_option("--stride", embed_options.stride, "center spacing");
  embed->add_option("--perplexity", embed_options.perplexity, "perplexity");
  embed->add_option("--iters", embed_options.iterations, "t-SNE iterations");
  embed->add_option("--seed", seed, "rng seed");
  embed->add_flag("--conditioned", conditioned_in,
                  "input is already band-passed");

  // run
  auto* run = app.add_subcommand("run", "execute the staged pipeline from a config");

  CLI11_PARSE(app, argc, argv);

  msd_set_threads(threads);
  if (!common.config_path.empty()) common.config = ReadConfig(common.config_path);

  try {
    if (condition->parsed()) return CmdCondition(in_path, out_path, low, high);
    if (synth->parsed())
      return CmdSynth(synth_out, synth_n, synth_duration, synth_fraction, seed);
    if (train->parsed()) {
      // Flags override the config file.
      if (data_dir.empty()) data_dir = common.Get("data", "");
      if (train_out.empty()) train_out = common.Get("out", "");
      if (arch == "16s") arch = common.Get("arch", arch);
      if (weighting.empty()) weighting = common.Get("weighting", "");
      if (data_dir.empty() || train_out.empty())
        Fail("train needs --data and --out (flags or config)");
      msd_train_options options;
      msd_train_options_init(&options);
      if (!weighting.empty()) options.weighting = weighting.c_str();
      options.seed = seed;
      options.iterations = iterations;
      options.batch_size = batch;
      options.sequence_windows = seq_windows;
      options.clip = clip;
      options.validation_snapshots = no_snapshots ? 0 : 1;
      return CmdTrain(data_dir, arch, train_out, options);
    }
    if (predict->parsed())
      return CmdPredict(checkpoint, rec_path, pred_out, naive, conditioned_in,
                        low, high);
    if (evaluate->parsed()) return CmdEvaluate(eval_pred, eval_labels, eval_report);
    if (embed->parsed()) {
      embed_options.seed = seed;
      return CmdEmbed(checkpoint, rec_path, embed_out, embed_labels,
                      embed_options, conditioned_in, low, high);
    }
    if (run->parsed()) {
      if (common.config_path.empty()) Fail("run needs --config");
      return CmdRun(common);
    }
  } catch (const std::exception& error) {
    Fail(error.what());
  }
  return 1;
}
