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

#include "followup/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "followup/errors.hpp"
#include "followup/rng.hpp"

namespace followup {

nlohmann::ordered_json EpochLog::to_json() const {
  return nlohmann::ordered_json{{"epoch", epoch},
                                {"train_loss", train_loss},
                                {"val_loss", val_loss},
                                {"improved", improved}};
}

AdamW::AdamW(std::size_t n_params, const TrainConfig& tc)
    : tc_(tc), m_(n_params, 0.0), v_(n_params, 0.0) {}

void AdamW::step(std::vector<double>& params,
                 const std::vector<double>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ValidationError("optimizer/parameter size mismatch");
  }
  ++t_;
  const double b1 = tc_.beta1, b2 = tc_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= tc_.lr * (mhat / (std::sqrt(vhat) + tc_.eps) +
                           tc_.weight_decay * params[i]);
  }
}

namespace {

double dataset_loss(const Model& model, const TrainConfig& tc,
                    const std::vector<const Note*>& notes) {
  if (notes.empty()) return 0.0;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < notes.size(); i += tc.batch_size) {
    std::size_t end = std::min(notes.size(), i + tc.batch_size);
    std::vector<const Note*> batch(notes.begin() + i, notes.begin() + end);
    total += model.loss_and_grad(batch, tc, nullptr) * batch.size();
    count += batch.size();
  }
  return total / static_cast<double>(count);
}

}  // namespace

TrainResult train_model(const ModelConfig& mc, const TrainConfig& tc,
                        const std::vector<const Note*>& train,
                        const std::vector<const Note*>& val,
                        const std::function<void(const EpochLog&)>& progress) {
  tc.validate();
  if (train.empty()) throw ValidationError("no training notes");
  auto model = std::make_unique<Model>(mc, derive_seed(tc.seed, 0));
  AdamW opt(model->params().size(), tc);

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = model->params().flat();
  std::vector<double> grad;
  std::vector<const Note*> order = train;
  int since_improve = 0;

  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    Xoshiro256ss rng(derive_seed(tc.seed, 1 + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0, skipped = 0;
    for (std::size_t i = 0; i < order.size(); i += tc.batch_size) {
      std::size_t end = std::min(order.size(), i + tc.batch_size);
      std::vector<const Note*> batch(order.begin() + i, order.begin() + end);
      double loss;
      try {
        loss = model->loss_and_grad(
            batch, tc, &grad,
            derive_seed(tc.seed, 0x5A17000 + static_cast<std::uint64_t>(epoch)));
      } catch (const NonFiniteLoss&) {
        ++skipped;
        ++n_batches;
        continue;
      }
      opt.step(model->params().flat(), grad);
      epoch_loss += loss;
      ++n_batches;
    }
    if (skipped == n_batches) {
      throw DivergenceError("every batch in epoch " + std::to_string(epoch) +
                            " produced a non-finite loss");
    }
    epoch_loss /= static_cast<double>(n_batches - skipped);

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss;
    log.val_loss = dataset_loss(*model, tc, val);
    log.improved = log.val_loss < result.best_val_loss;
    if (log.improved) {
      result.best_val_loss = log.val_loss;
      result.best_epoch = epoch;
      best_params = model->params().flat();
      since_improve = 0;
    } else {
      ++since_improve;
    }
    result.log.push_back(log);
    if (progress) progress(log);
    if (since_improve > tc.patience) break;
  }

  ParamStore store = model->params();
  store.flat() = best_params;
  result.model = std::make_unique<Model>(mc, std::move(store));
  return result;
}

}  // namespace followup
