#pragma once

// Trial -> classifier item transformation: left/right repair, tail
// trimming, duration/validity filtering, sentinel filling, windowing and
// cyclic partitioning.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gazeconf/core.hpp"
#include "gazeconf/dataio.hpp"

namespace gazeconf {

inline constexpr double kSentinel = -1.0;

using ItemMatrix = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kFeatureCount), Eigen::RowMajor>;

struct WindowedItem {
  ItemMatrix values;  // true_length x 14, never padded
  Label label = Label::not_confused;
  std::string user_id;
  std::string origin_trial_id;
  int partition_index = 0;
  std::optional<Micros> anchor_us;  // report time or drawn pivot

  Eigen::Index true_length() const { return values.rows(); }
};

enum class DiscardReason { too_short, too_invalid };

inline std::string_view to_string(DiscardReason reason) {
  return reason == DiscardReason::too_short ? "too_short" : "too_invalid";
}

struct DiscardEntry {
  std::string user_id;
  std::string trial_id;
  Label label;
  DiscardReason reason;

  bool operator==(const DiscardEntry&) const = default;
};

struct DiscardReport {
  int n_discarded_confused = 0;
  int n_discarded_not_confused = 0;
  std::vector<DiscardEntry> entries;

  void add(const Trial& trial, DiscardReason reason) {
    (trial.label == Label::confused ? n_discarded_confused : n_discarded_not_confused) += 1;
    entries.push_back({trial.user_id, trial.trial_id, trial.label, reason});
  }

  void merge(const DiscardReport& other) {
    n_discarded_confused += other.n_discarded_confused;
    n_discarded_not_confused += other.n_discarded_not_confused;
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  }
};

enum class Scaling { none, minmax };

struct PipelineOptions {
  double window_sec = 5.0;
  int partitions = 4;
  double min_duration_sec = 2.0;
  double min_valid_fraction = 0.65;
  double trim_sec = 1.0;
  Scaling scaling = Scaling::none;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(window_sec > 0)) throw ConfigError("window_sec must be positive");
    if (partitions < 1) throw ConfigError("partitions must be >= 1");
    if (!(min_duration_sec >= 0)) throw ConfigError("min_duration_sec must be >= 0");
    if (!(min_valid_fraction >= 0 && min_valid_fraction <= 1))
      throw ConfigError("min_valid_fraction must lie in [0,1]");
    if (!(trim_sec >= 0)) throw ConfigError("trim_sec must be >= 0");
  }
};

inline Micros seconds_to_us(double s) { return static_cast<Micros>(std::llround(s * 1e6)); }

// A row is usable when at least one eye is confidently tracked.
inline bool row_is_valid(const RawSample& sample) {
  return sample.left.valid() || sample.right.valid();
}

// Copy the valid eye's readings over the invalid one when exactly one eye
// is valid. Left and right readings are close at any instant.
inline RawSample repair_row(RawSample sample) {
  const bool left_ok = sample.left.valid();
  const bool right_ok = sample.right.valid();
  if (left_ok && !right_ok) sample.right = sample.left;
  if (right_ok && !left_ok) sample.left = sample.right;
  return sample;
}

inline Trial repair_trial(Trial trial) {
  for (auto& s : trial.samples) s = repair_row(s);
  return trial;
}

// Wall-clock span covered by the samples: first to last timestamp plus one
// nominal sample period.
inline double trial_duration_us(const Trial& trial) {
  if (trial.samples.empty()) return 0.0;
  return static_cast<double>(trial.samples.back().timestamp_us - trial.samples.front().timestamp_us) +
         kSamplePeriodUs;
}

// Integer timestamps carry up to 1 us of rounding.
inline bool lasts_at_least(const Trial& trial, Micros min_us) {
  return trial_duration_us(trial) >= static_cast<double>(min_us) - 1.0;
}

inline double valid_fraction(const Trial& trial) {
  if (trial.samples.empty()) return 0.0;
  const auto valid = std::count_if(trial.samples.begin(), trial.samples.end(), row_is_valid);
  return static_cast<double>(valid) / static_cast<double>(trial.samples.size());
}

// Drop every sample later than `anchor_us - trim_us`. nullopt means nothing
// survived (too_short).
inline std::optional<Trial> trim_tail(Trial trial, Micros anchor_us, Micros trim_us) {
  const Micros cutoff = anchor_us - trim_us;
  auto keep_end = std::find_if(trial.samples.begin(), trial.samples.end(),
                               [&](const RawSample& s) { return s.timestamp_us > cutoff; });
  trial.samples.erase(keep_end, trial.samples.end());
  if (trial.samples.empty()) return std::nullopt;
  return trial;
}

// Confused trials anchor on their own report time.
inline std::optional<Trial> trim_tail(Trial trial, Micros trim_us = 1'000'000) {
  if (!trial.report_time_us)
    throw ContractViolation("trim_tail: trial " + trial.user_id + "/" + trial.trial_id +
                            " has no report time; supply a pivot");
  const Micros anchor = *trial.report_time_us;
  return trim_tail(std::move(trial), anchor, trim_us);
}

// Pivot for a not_confused trial: uniform over sample timestamps at least
// `min_offset_us` after the first sample.
inline std::optional<Micros> draw_pivot(const Trial& trial, Rng& rng, Micros min_offset_us) {
  if (trial.samples.empty()) return std::nullopt;
  const Micros earliest = trial.samples.front().timestamp_us + min_offset_us;
  auto first = std::lower_bound(trial.samples.begin(), trial.samples.end(), earliest,
                                [](const RawSample& s, Micros t) { return s.timestamp_us < t; });
  const auto count = static_cast<std::uint64_t>(trial.samples.end() - first);
  if (count == 0) return std::nullopt;
  return first[static_cast<std::ptrdiff_t>(uniform_index(rng, count))].timestamp_us;
}

struct FilterOutcome {
  Dataset kept;
  DiscardReport report;
};

// Pure selection; kept trials are untouched. Both thresholds are inclusive.
inline FilterOutcome filter_trials(const Dataset& dataset, double min_duration_ms = 2000.0,
                                   double min_valid_fraction = 0.65) {
  FilterOutcome out;
  out.kept.source = dataset.source;
  out.kept.generator_config = dataset.generator_config;
  const Micros min_us = ms_to_us(min_duration_ms);
  for (const auto& trial : dataset.trials) {
    if (!lasts_at_least(trial, min_us)) {
      out.report.add(trial, DiscardReason::too_short);
    } else if (valid_fraction(trial) < min_valid_fraction - 1e-12) {
      out.report.add(trial, DiscardReason::too_invalid);
    } else {
      out.kept.trials.push_back(trial);
    }
  }
  return out;
}

// Overwrite the six numeric readings of every invalid eye with -1.
// Validity codes are kept.
inline Trial fill_sentinel(Trial trial) {
  for (auto& s : trial.samples) {
    for (EyeReading* eye : {&s.left, &s.right}) {
      if (!eye->valid())
        for (double* f : numeric_fields(*eye)) *f = kSentinel;
    }
  }
  return trial;
}

// Last `window_us` of an already trimmed trial; shorter trials are kept whole.
inline Trial keep_last(Trial trial, Micros window_us) {
  if (trial.samples.empty()) return trial;
  const Micros start_after = trial.samples.back().timestamp_us - window_us;
  auto first = std::find_if(trial.samples.begin(), trial.samples.end(),
                            [&](const RawSample& s) { return s.timestamp_us > start_after; });
  trial.samples.erase(trial.samples.begin(), first);
  return trial;
}

struct WindowOutcome {
  std::optional<Trial> trial;  // nullopt: too_short
  std::optional<Micros> anchor_us;
};

inline std::optional<Micros> choose_anchor(const Trial& trial, const PipelineOptions& opts, Rng& pivot_rng) {
  if (trial.label == Label::confused) return trial.report_time_us;
  return draw_pivot(trial, pivot_rng, seconds_to_us(opts.min_duration_sec));
}

// Anchor (report time, or a drawn pivot for not_confused), trim before the
// anchor, then keep the last window. Windows below the minimum duration are
// rejected.
inline WindowOutcome extract_window(const Trial& trial, const PipelineOptions& opts, Rng& pivot_rng) {
  WindowOutcome out;
  out.anchor_us = choose_anchor(trial, opts, pivot_rng);
  if (!out.anchor_us) return out;
  auto trimmed = trim_tail(trial, *out.anchor_us, seconds_to_us(opts.trim_sec));
  if (!trimmed) return out;
  Trial window = keep_last(std::move(*trimmed), seconds_to_us(opts.window_sec));
  if (lasts_at_least(window, seconds_to_us(opts.min_duration_sec))) out.trial = std::move(window);
  return out;
}

inline WindowedItem to_item(const Trial& trial) {
  WindowedItem item;
  item.label = trial.label;
  item.user_id = trial.user_id;
  item.origin_trial_id = trial.trial_id;
  item.values.resize(static_cast<Eigen::Index>(trial.samples.size()), Eigen::NoChange);
  for (std::size_t r = 0; r < trial.samples.size(); ++r) {
    const auto& s = trial.samples[r];
    Eigen::Index c = 0;
    for (const EyeReading* eye : {&s.left, &s.right}) {
      for (double v : numeric_values(*eye)) item.values(static_cast<Eigen::Index>(r), c++) = v;
      item.values(static_cast<Eigen::Index>(r), c++) = eye->validity;
    }
  }
  return item;
}

// Deal rows round-robin into k sub-items: sub-item j holds rows j, j+k, ...
inline std::vector<WindowedItem> cyclic_partition(const WindowedItem& item, int k = 4) {
  if (k < 1) throw ConfigError("cyclic_partition: k must be >= 1");
  if (item.true_length() < k)
    throw DataError("cyclic_partition: item " + item.user_id + "/" + item.origin_trial_id + " has " +
                    std::to_string(item.true_length()) + " rows, fewer than k=" + std::to_string(k));
  std::vector<WindowedItem> parts(static_cast<std::size_t>(k));
  const Eigen::Index n = item.true_length();
  for (int j = 0; j < k; ++j) {
    auto& part = parts[static_cast<std::size_t>(j)];
    part.label = item.label;
    part.user_id = item.user_id;
    part.origin_trial_id = item.origin_trial_id;
    part.anchor_us = item.anchor_us;
    part.partition_index = j;
    const Eigen::Index rows = (n - j + k - 1) / k;
    part.values.resize(rows, Eigen::NoChange);
    for (Eigen::Index r = 0; r < rows; ++r) part.values.row(r) = item.values.row(j + r * k);
  }
  return parts;
}

// Inverse of cyclic_partition.
inline ItemMatrix interleave(const std::vector<WindowedItem>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.true_length();
  ItemMatrix out(total, static_cast<Eigen::Index>(kFeatureCount));
  const auto k = static_cast<Eigen::Index>(parts.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& p = parts[static_cast<std::size_t>(j)].values;
    for (Eigen::Index r = 0; r < p.rows(); ++r) out.row(j + r * k) = p.row(r);
  }
  return out;
}

struct ColumnRange {
  std::array<double, kFeatureCount> lo{};
  std::array<double, kFeatureCount> hi{};
};

inline bool is_validity_column(std::size_t c) { return c % kFeaturesPerEye == kNumericPerEye; }

// Per-column min/max over non-sentinel cells.
inline ColumnRange fit_minmax(const std::vector<WindowedItem>& items) {
  ColumnRange range;
  range.lo.fill(std::numeric_limits<double>::infinity());
  range.hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& item : items) {
    for (Eigen::Index r = 0; r < item.values.rows(); ++r) {
      for (std::size_t c = 0; c < kFeatureCount; ++c) {
        const double v = item.values(r, static_cast<Eigen::Index>(c));
        if (!is_validity_column(c) && v == kSentinel) continue;
        range.lo[c] = std::min(range.lo[c], v);
        range.hi[c] = std::max(range.hi[c], v);
      }
    }
  }
  return range;
}

// Scale into [0,1]; the sentinel is re-applied afterwards so -1 stays
// outside the scaled range.
inline void apply_minmax(WindowedItem& item, const ColumnRange& range) {
  for (Eigen::Index r = 0; r < item.values.rows(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      double& v = item.values(r, static_cast<Eigen::Index>(c));
      if (!is_validity_column(c) && v == kSentinel) continue;
      const double span = range.hi[c] - range.lo[c];
      v = span > 0 && std::isfinite(span) ? (v - range.lo[c]) / span : 0.0;
    }
  }
}

struct PipelineResult {
  std::vector<WindowedItem> items;
  DiscardReport report;
};

inline Rng pivot_rng(std::uint64_t seed, const Trial& trial) {
  return Rng(derive_seed(derive_seed(seed, "pivot"), trial.user_id + '\x1f' + trial.trial_id));
}

// repair -> trim -> filter -> fill -> window -> partition. Per-trial
// failures become discards; the batch never aborts. Each trial's pivot
// comes from a stream keyed on (seed, user_id, trial_id).
inline PipelineResult run_pipeline(const Dataset& dataset, const PipelineOptions& opts = {}) {
  opts.validate();
  PipelineResult result;
  const Micros trim_us = seconds_to_us(opts.trim_sec);
  const Micros window_us = seconds_to_us(opts.window_sec);
  const Micros min_us = seconds_to_us(opts.min_duration_sec);

  Dataset trimmed;
  std::vector<std::optional<Micros>> anchors;
  for (const auto& raw : dataset.trials) {
    Trial trial = repair_trial(raw);
    Rng rng = pivot_rng(opts.seed, trial);
    const auto anchor = choose_anchor(trial, opts, rng);
    std::optional<Trial> cut;
    if (anchor) cut = trim_tail(std::move(trial), *anchor, trim_us);
    if (!cut) {
      result.report.add(raw, DiscardReason::too_short);
      continue;
    }
    trimmed.trials.push_back(std::move(*cut));
    anchors.push_back(anchor);
  }

  auto filtered = filter_trials(trimmed, us_to_ms(min_us), opts.min_valid_fraction);
  result.report.merge(filtered.report);

  std::vector<WindowedItem> windows;
  std::size_t next_anchor = 0;
  for (auto& trial : filtered.kept.trials) {
    // kept trials preserve order, so walk the anchor list alongside
    while (trimmed.trials[next_anchor].user_id != trial.user_id ||
           trimmed.trials[next_anchor].trial_id != trial.trial_id)
      ++next_anchor;
    const auto anchor = anchors[next_anchor++];
    Trial window = keep_last(fill_sentinel(std::move(trial)), window_us);
    if (!lasts_at_least(window, min_us) ||
        static_cast<int>(window.samples.size()) < opts.partitions) {
      result.report.add(window, DiscardReason::too_short);
      continue;
    }
    WindowedItem item = to_item(window);
    item.anchor_us = anchor;
    windows.push_back(std::move(item));
  }

  if (opts.scaling == Scaling::minmax) {
    const auto range = fit_minmax(windows);
    for (auto& w : windows) apply_minmax(w, range);
  }
  for (const auto& w : windows) {
    auto parts = cyclic_partition(w, opts.partitions);
    for (auto& p : parts) result.items.push_back(std::move(p));
  }
  return result;
}

// Items as TSV, one line per row; consecutive lines sharing
// (UserId, TrialId, Partition) form one item.
inline void write_items(const std::vector<WindowedItem>& items, std::ostream& out) {
  out << "UserId\tTrialId\tLabel\tPartition\tAnchorMs";
  for (auto name : kFeatureNames) out << '\t' << name;
  out << '\n';
  for (const auto& item : items) {
    const std::string anchor = item.anchor_us ? detail::format_ms(*item.anchor_us) : "";
    for (Eigen::Index r = 0; r < item.values.rows(); ++r) {
      out << item.user_id << '\t' << item.origin_trial_id << '\t' << to_string(item.label) << '\t'
          << item.partition_index << '\t' << anchor;
      for (Eigen::Index c = 0; c < item.values.cols(); ++c) out << '\t' << detail::format_double(item.values(r, c));
      out << '\n';
    }
  }
}

inline std::vector<WindowedItem> read_items(std::istream& in, const std::string& source = "items") {
  std::string line;
  if (!detail::read_line(in, line)) throw SchemaError(source + ": empty file, header expected");
  std::vector<std::string_view> cols = {"UserId", "TrialId", "Label", "Partition", "AnchorMs"};
  cols.insert(cols.end(), kFeatureNames.begin(), kFeatureNames.end());
  const auto idx = detail::header_index(line, cols, source.c_str());
  std::vector<std::size_t> at;
  for (auto c : cols) at.push_back(idx.at(std::string(c)));

  std::vector<WindowedItem> items;
  std::vector<std::array<double, kFeatureCount>> rows;
  auto flush = [&] {
    if (rows.empty()) return;
    auto& item = items.back();
    item.values.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int c = 0; c < kFeatureCount; ++c) item.values(static_cast<Eigen::Index>(r), c) = rows[r][c];
    rows.clear();
  };
  int lineno = 1;
  while (detail::read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_tabs(line);
    auto cell = [&](std::size_t k) -> std::string_view {
      if (at[k] >= cells.size())
        throw DataError(source + ":" + std::to_string(lineno) + ": missing column " + std::string(cols[k]));
      return cells[at[k]];
    };
    const auto part = detail::parse_int(cell(3));
    if (!part) throw DataError(source + ":" + std::to_string(lineno) + ": bad Partition");
    Label label;
    try {
      label = parse_label(cell(2));
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
    std::optional<Micros> anchor;
    if (!cell(4).empty()) {
      anchor = detail::parse_ms(cell(4));
      if (!anchor) throw DataError(source + ":" + std::to_string(lineno) + ": bad AnchorMs");
    }
    const bool same = !items.empty() && items.back().user_id == cell(0) &&
                      items.back().origin_trial_id == cell(1) && items.back().partition_index == *part;
    if (!same) {
      flush();
      WindowedItem item;
      item.user_id = std::string(cell(0));
      item.origin_trial_id = std::string(cell(1));
      item.label = label;
      item.partition_index = *part;
      item.anchor_us = anchor;
      items.push_back(std::move(item));
    }
    std::array<double, kFeatureCount> row{};
    for (int c = 0; c < kFeatureCount; ++c) {
      const auto v = detail::parse_double(cell(5 + static_cast<std::size_t>(c)));
      if (!v) throw DataError(source + ":" + std::to_string(lineno) + ": bad value in " + std::string(cols[5 + c]));
      row[c] = *v;
    }
    rows.push_back(row);
  }
  flush();
  return items;
}

}  // namespace gazeconf
