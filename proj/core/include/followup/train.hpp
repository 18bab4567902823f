// Copyright 2026 The followup-extractor Authors
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

#ifndef FOLLOWUP_TRAIN_HPP_
#define FOLLOWUP_TRAIN_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "followup/model.hpp"
#include "followup/note.hpp"

namespace followup {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool improved = false;

  nlohmann::ordered_json to_json() const;
};

struct TrainResult {
  std::unique_ptr<Model> model;  // parameters from the best epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// AdamW with decoupled weight decay over the full parameter vector. The
// gradient buffer is reused across steps; a non-finite step is skipped.
class AdamW {
 public:
  AdamW(std::size_t n_params, const TrainConfig& tc);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  TrainConfig tc_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

// Deterministic training: fixed init from derive_seed(seed, 0), epoch
// shuffles from derive_seed(seed, 1 + epoch), sequential batches, early
// stopping on validation loss with the configured patience. `progress`,
// when set, is called once per epoch.
TrainResult train_model(const ModelConfig& mc, const TrainConfig& tc,
                        const std::vector<const Note*>& train,
                        const std::vector<const Note*>& val,
                        const std::function<void(const EpochLog&)>& progress =
                            nullptr);

}  // namespace followup

#endif  // FOLLOWUP_TRAIN_HPP_
