#pragma once

// Training-set balancing: SMOTE oversampling of confused windows and
// random downsampling of the majority class.

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "gazeconf/core.hpp"
#include "gazeconf/preprocess.hpp"

namespace gazeconf {

class AugmentationError : public DataError {
 public:
  using DataError::DataError;
};

// Row-major flattening tail-padded with -1 to `max_rows` rows.
inline Eigen::VectorXd flatten(const WindowedItem& item, Eigen::Index max_rows) {
  constexpr auto width = static_cast<Eigen::Index>(kFeatureCount);
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(max_rows * width, kSentinel);
  const Eigen::Index rows = std::min(max_rows, item.true_length());
  flat.head(rows * width) = Eigen::Map<const Eigen::VectorXd>(item.values.data(), rows * width);
  return flat;
}

// Indices of the k nearest other items under Euclidean distance, nearest
// first, ties broken by index.
inline std::vector<std::vector<std::size_t>> nearest_neighbors(const std::vector<Eigen::VectorXd>& points,
                                                               std::size_t k) {
  const std::size_t n = points.size();
  if (k >= n) throw ContractViolation("nearest_neighbors: k must be below the point count");
  Eigen::MatrixXd dist2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (points[i] - points[j]).squaredNorm();
      dist2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      dist2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
    }
  std::vector<std::vector<std::size_t>> result(n);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    auto row = dist2.row(static_cast<Eigen::Index>(i));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = row(static_cast<Eigen::Index>(a));
                        const double db = row(static_cast<Eigen::Index>(b));
                        return da < db || (da == db && a < b);
                      });
    result[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return result;
}

struct SmoteOrigin {
  std::size_t source = 0;    // index into the minority input
  std::size_t neighbor = 0;  // index into the minority input
  double u = 0.0;            // interpolation weight in [0,1)
  Eigen::Index overlap_rows = 0;
};

struct SmoteResult {
  std::vector<WindowedItem> items;
  std::vector<SmoteOrigin> origins;  // parallel to items
  std::vector<std::vector<std::size_t>> neighbors;
};

// Emits rate_percent/100 synthetic items per minority item. Each one is
// x + u (n - x) over the rows both items really have; rows of the source
// beyond the neighbor's length are -1. Synthetic items keep the source's
// length, label and user id.
inline SmoteResult smote(const std::vector<WindowedItem>& minority, int rate_percent, Rng& rng,
                         int k_neighbors = 5) {
  if (rate_percent < 0 || rate_percent % 100 != 0)
    throw ConfigError("smote rate must be a non-negative multiple of 100, got " +
                      std::to_string(rate_percent));
  if (k_neighbors < 1) throw ConfigError("smote k must be >= 1");
  SmoteResult result;
  if (rate_percent == 0) return result;
  if (minority.size() <= static_cast<std::size_t>(k_neighbors))
    throw AugmentationError("smote needs more than " + std::to_string(k_neighbors) +
                            " minority items, got " + std::to_string(minority.size()));

  Eigen::Index max_rows = 0;
  for (const auto& item : minority) max_rows = std::max(max_rows, item.true_length());
  std::vector<Eigen::VectorXd> flat;
  flat.reserve(minority.size());
  for (const auto& item : minority) flat.push_back(flatten(item, max_rows));
  result.neighbors = nearest_neighbors(flat, static_cast<std::size_t>(k_neighbors));

  const int per_item = rate_percent / 100;
  std::size_t serial = 0;
  for (std::size_t i = 0; i < minority.size(); ++i) {
    const auto& x = minority[i];
    for (int rep = 0; rep < per_item; ++rep) {
      SmoteOrigin origin;
      origin.source = i;
      origin.neighbor = result.neighbors[i][uniform_index(rng, static_cast<std::uint64_t>(k_neighbors))];
      origin.u = uniform01(rng);
      const auto& n = minority[origin.neighbor];
      origin.overlap_rows = std::min(x.true_length(), n.true_length());

      WindowedItem synth;
      synth.label = x.label;
      synth.user_id = x.user_id;
      synth.origin_trial_id = x.origin_trial_id + "#smote" + std::to_string(serial++);
      synth.partition_index = x.partition_index;
      synth.values = ItemMatrix::Constant(x.true_length(), static_cast<Eigen::Index>(kFeatureCount), kSentinel);
      const auto rows = origin.overlap_rows;
      synth.values.topRows(rows) =
          x.values.topRows(rows) + origin.u * (n.values.topRows(rows) - x.values.topRows(rows));
      result.items.push_back(std::move(synth));
      result.origins.push_back(origin);
    }
  }
  return result;
}

// Indices (into `items`) of every minority item plus an equally sized
// uniform sample of the majority class, in shuffled order.
inline std::vector<std::size_t> downsample_indices(const std::vector<WindowedItem>& items, Rng& rng) {
  std::vector<std::size_t> confused, not_confused;
  for (std::size_t i = 0; i < items.size(); ++i)
    (items[i].label == Label::confused ? confused : not_confused).push_back(i);
  if (confused.empty() || not_confused.empty())
    throw ConfigError("downsample_majority: both classes must be present");
  auto& minority = confused.size() <= not_confused.size() ? confused : not_confused;
  auto& majority = confused.size() <= not_confused.size() ? not_confused : confused;
  shuffle(majority.begin(), majority.end(), rng);
  std::vector<std::size_t> picked = minority;
  picked.insert(picked.end(), majority.begin(),
                majority.begin() + static_cast<std::ptrdiff_t>(minority.size()));
  shuffle(picked.begin(), picked.end(), rng);
  return picked;
}

inline std::vector<WindowedItem> downsample_majority(const std::vector<WindowedItem>& items, Rng& rng) {
  std::vector<WindowedItem> out;
  for (auto i : downsample_indices(items, rng)) out.push_back(items[i]);
  return out;
}

}  // namespace gazeconf
