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

#ifndef MSD_CORE_TRAINER_HPP_
#define MSD_CORE_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/nn/network.hpp"
#include "core/recording.hpp"

namespace msd {

struct LabeledRecording {
  Recording recording;  // conditioned signals
  LabelTrack labels;
};

// Data access point for training and evaluation. Tests wrap it to audit
// which recordings a phase touches.
class Corpus {
 public:
  virtual ~Corpus() = default;
  virtual std::vector<std::string> Ids() const = 0;
  virtual const LabeledRecording& Get(const std::string& id) const = 0;
};

class MemoryCorpus : public Corpus {
 public:
  void Add(std::string id, LabeledRecording recording);
  std::vector<std::string> Ids() const override;
  const LabeledRecording& Get(const std::string& id) const override;

 private:
  std::map<std::string, LabeledRecording> recordings_;
};

// Loads `<id>.edf` / `<id>.crec` with a matching `<id>.labels` per id.
// Raw EDF inputs are band-pass conditioned on load; .crec caches are taken
// as already conditioned.
class DirectoryCorpus : public Corpus {
 public:
  explicit DirectoryCorpus(const std::string& dir);
  std::vector<std::string> Ids() const override;
  const LabeledRecording& Get(const std::string& id) const override;

 private:
  std::string dir_;
  std::vector<std::string> ids_;
  std::map<std::string, std::string> paths_;
  mutable std::map<std::string, LabeledRecording> loaded_;
};

struct TrainConfig {
  std::string arch_id;
  std::optional<WeightScheme> weighting;  // default: the architecture's
  std::uint64_t seed = 1;
  int iterations = 0;              // 0 = family default (3 CNN, 8 CNN-LSTM)
  std::int64_t batch_size = 0;     // 0 = family default (200 CNN, 128 CNN-LSTM)
  std::int64_t sequence_windows = 0;  // 0 = default (200), CNN-LSTM only
  double learning_rate = 0.002;
  int clip = -1;                   // -1 family default, 0 off, 1 on
  double clip_norm = 1.0;
  bool validation_snapshots = true;
};

struct TrainHistory {
  std::vector<std::pair<std::int64_t, double>> losses;  // (step, batch loss)
  // (iteration, class name, kappa) from validation snapshots.
  std::vector<std::tuple<int, std::string, double>> kappas;

  std::string ToText() const;
};

struct TrainResult {
  Network<float> net;
  TrainHistory history;
};

struct TrainCallbacks {
  // Called with iteration 0 for the freshly initialized parameters, then
  // once after every completed training iteration.
  std::function<void(int iteration, const Network<float>&)> on_checkpoint;
};

// Runs cfg.iterations passes over the training split: batch sampling,
// forward, weighted cross entropy, backward, optional gradient clipping,
// Nadam. One training iteration visits ceil(total units / batch size)
// batches without repeating a unit (a window for CNNs, a window sequence
// for the CNN-LSTM). Deterministic given the seed and thread count.
TrainResult Train(const Corpus& corpus, const SplitPlan& split,
                  const TrainConfig& cfg, ThreadPool* pool,
                  const TrainCallbacks* callbacks = nullptr);

// Concatenated per-class validation kappas for one parameter snapshot.
std::vector<std::pair<std::string, double>> ValidationKappas(
    const Network<float>& net, const Corpus& corpus,
    const std::vector<std::string>& ids, ThreadPool* pool);

}  // namespace msd

#endif  // MSD_CORE_TRAINER_HPP_
