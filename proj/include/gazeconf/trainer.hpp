#pragma once

// Mini-batch training loop with linear learning-rate decay, validation ROC
// monitoring and early stopping.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gazeconf/metrics.hpp"
#include "gazeconf/nn/adam.hpp"
#include "gazeconf/nn/network.hpp"

namespace gazeconf {

enum class LrSchedule { linear, plateau };

struct Hyperparameters {
  nn::CellKind cell = nn::CellKind::gru;
  int hidden_size = 256;
  double learning_rate = 0.003;
  int max_epochs = 300;
  int batch_size = 256;
  int early_stop_patience = 25;
  LrSchedule schedule = LrSchedule::linear;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden_size < 1) throw ConfigError("hidden must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("lr must be positive");
    if (max_epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch must be >= 1");
    if (early_stop_patience < 1) throw ConfigError("patience must be >= 1");
    if (max_epochs > 0 && early_stop_patience > max_epochs) throw ConfigError("patience must not exceed epochs");
  }
};

// lr0 * (1 - epoch / max_epochs)
inline double linear_lr(double lr0, int epoch, int max_epochs) {
  return lr0 * (1.0 - static_cast<double>(epoch) / static_cast<double>(max_epochs));
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_roc = 0.0;
  double learning_rate = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  bool stopped_early = false;

  bool operator==(const TrainHistory&) const = default;
};

template <typename Scalar>
struct TrainResult {
  nn::ModelParams<Scalar> params;
  TrainHistory history;
};

// Called with every batch whose gradient is computed.
using BatchObserver = std::function<void(const std::vector<const WindowedItem*>&)>;

template <typename Scalar>
double validation_roc(const nn::ModelParams<Scalar>& params, const std::vector<const WindowedItem*>& val) {
  const auto scores = nn::predict_confused(params, val);
  std::vector<Label> labels;
  labels.reserve(val.size());
  for (const auto* it : val) labels.push_back(it->label);
  return roc_auc(scores, labels);
}

// Returns the parameters of the epoch with the best validation ROC
// (earliest on ties). Shuffling depends only on (seed, epoch).
template <typename Scalar = double>
TrainResult<Scalar> train(const std::vector<WindowedItem>& train_items, const std::vector<WindowedItem>& val_items,
                          const Hyperparameters& hp, const BatchObserver& observer = {}) {
  hp.validate();
  Rng init_rng = make_rng(hp.seed, "init");
  TrainResult<Scalar> result{
      nn::ModelParams<Scalar>::initialized(hp.cell, static_cast<int>(kFeatureCount), hp.hidden_size, init_rng),
      {}};
  if (hp.max_epochs == 0) return result;
  if (train_items.empty()) throw ConfigError("train: empty training set");
  if (val_items.empty()) throw ConfigError("train: empty validation set");

  std::vector<const WindowedItem*> val;
  for (const auto& it : val_items) val.push_back(&it);

  nn::ModelParams<Scalar> params = result.params;
  nn::AdamState<Scalar> adam(params);
  nn::ModelParams<Scalar> grad = params.zeros_like();
  std::vector<std::size_t> order(train_items.size());
  double best_roc = -1.0;
  int since_best = 0;
  double plateau_lr = hp.learning_rate;
  const int plateau_wait = std::max(1, hp.early_stop_patience / 3);

  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    const double lr = hp.schedule == LrSchedule::linear ? linear_lr(hp.learning_rate, epoch, hp.max_epochs)
                                                        : plateau_lr;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(hp.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hp.batch_size)) {
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(hp.batch_size));
      std::vector<const WindowedItem*> members;
      for (std::size_t i = start; i < end; ++i) members.push_back(&train_items[order[i]]);
      if (observer) observer(members);
      const auto batch = nn::make_batch<Scalar>(members);
      const double loss = static_cast<double>(nn::loss_and_gradient(params, batch, grad));
      if (!std::isfinite(loss))
        throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch));
      try {
        nn::adam_step(params, grad, adam, lr);
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ": " + e.what());
      }
      loss_sum += loss * static_cast<double>(end - start);
    }

    const double roc = validation_roc(params, val);
    result.history.epochs.push_back({epoch, loss_sum / static_cast<double>(order.size()), roc, lr});
    if (roc > best_roc) {
      best_roc = roc;
      since_best = 0;
      result.params = params;
      result.history.best_epoch = epoch;
    } else {
      ++since_best;
      if (hp.schedule == LrSchedule::plateau && since_best % plateau_wait == 0) plateau_lr *= 0.5;
      if (since_best >= hp.early_stop_patience) {
        result.history.stopped_early = epoch + 1 < hp.max_epochs;
        break;
      }
    }
  }
  return result;
}

}  // namespace gazeconf
