#pragma once

// Central finite-difference check of the analytic gradient.

#include <algorithm>
#include <cmath>
#include <vector>

#include "gazeconf/nn/network.hpp"

namespace gazeconf::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  Eigen::Index worst_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps parameters whose true
// gradient is ~0 from dividing finite-difference round-off by ~0.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline GradCheckResult check_gradient(const ModelParams<double>& params, const SequenceBatch<double>& batch,
                                      double step = 1e-5) {
  ForwardCache<double> cache;
  forward_batch(params, batch, &cache);
  const auto analytic = backward(params, batch, cache);
  GradCheckResult result;
  ModelParams<double> probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = probe.data()(i);
    probe.data()(i) = saved + step;
    const double up = nll_loss(forward_batch(probe, batch), batch.labels);
    probe.data()(i) = saved - step;
    const double down = nll_loss(forward_batch(probe, batch), batch.labels);
    probe.data()(i) = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic.data()(i), numeric);
    if (err > result.max_relative_error || result.worst_index < 0) {
      result.max_relative_error = err;
      result.worst_index = i;
      result.analytic_at_worst = analytic.data()(i);
      result.numeric_at_worst = numeric;
    }
  }
  return result;
}

struct GradCheckCase {
  ModelParams<double> params;
  std::vector<WindowedItem> items;
};

// Random instance: params uniform in +-0.5, inputs standard normal, one
// item per length in `lengths` with random labels.
inline GradCheckCase random_gradcheck_case(CellKind kind, int hidden, const std::vector<Eigen::Index>& lengths,
                                           std::uint64_t seed) {
  Rng rng = make_rng(seed, "gradcheck", static_cast<std::uint64_t>(kind));
  GradCheckCase c{ModelParams<double>(kind, static_cast<int>(kFeatureCount), hidden), {}};
  for (Eigen::Index i = 0; i < c.params.size(); ++i) c.params.data()(i) = uniform01(rng) - 0.5;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto len : lengths) {
    WindowedItem item;
    item.values.resize(len, Eigen::NoChange);
    for (Eigen::Index r = 0; r < len; ++r)
      for (Eigen::Index col = 0; col < item.values.cols(); ++col) item.values(r, col) = gauss(rng);
    item.label = uniform01(rng) < 0.5 ? Label::confused : Label::not_confused;
    c.items.push_back(std::move(item));
  }
  return c;
}

// Hidden size 8, sequences of length 5 (plus shorter ones to exercise
// masking).
inline GradCheckResult gradcheck_seed(CellKind kind, std::uint64_t seed, int hidden = 8,
                                      std::vector<Eigen::Index> lengths = {5, 5, 3}) {
  const auto c = random_gradcheck_case(kind, hidden, lengths, seed);
  return check_gradient(c.params, make_batch<double>(c.items));
}

}  // namespace gazeconf::nn
