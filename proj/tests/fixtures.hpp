#pragma once

// Hand-specified trials with planted defects.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "gazeconf/gazeconf.hpp"

namespace fixture {

struct Planted {
  gazeconf::Trial trial;
  std::size_t valid_rows = 0;     // rows with at least one confident eye
  std::vector<bool> both_invalid; // per row
};

inline gazeconf::EyeReading eye(std::mt19937_64& rng, int validity) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {100 + 1000 * u(rng), 100 + 800 * u(rng), 0.2 + 0.6 * u(rng), 0.2 + 0.6 * u(rng), 2.5 + 2 * u(rng),
          500 + 200 * u(rng), validity};
}

// `n` rows at 120 Hz, exactly `invalid` of them with both eyes invalid
// (at random positions) and roughly 10 % of the rest with one eye invalid.
inline Planted trial(std::mt19937_64& rng, std::string user, std::string id, gazeconf::Label label, std::size_t n,
                     std::size_t invalid) {
  Planted p;
  p.trial.user_id = std::move(user);
  p.trial.trial_id = std::move(id);
  p.trial.label = label;
  p.both_invalid.assign(n, false);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::size_t i = 0; i < invalid; ++i) p.both_invalid[idx[i]] = true;
  std::uniform_int_distribution<int> bad(2, 4), good(0, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    gazeconf::RawSample s;
    s.timestamp_us = gazeconf::sample_time_us(static_cast<std::int64_t>(i));
    if (p.both_invalid[i]) {
      s.left = eye(rng, bad(rng));
      s.right = eye(rng, bad(rng));
    } else {
      const double r = u(rng);
      s.left = eye(rng, r < 0.05 ? bad(rng) : good(rng));
      s.right = eye(rng, r >= 0.05 && r < 0.1 ? bad(rng) : good(rng));
    }
    p.trial.samples.push_back(s);
  }
  p.valid_rows = n - invalid;
  if (label == gazeconf::Label::confused) p.trial.report_time_us = p.trial.samples.back().timestamp_us;
  return p;
}

// Trials straddling both filter boundaries: durations around 2 s and valid
// fractions around 65 %.
inline std::vector<Planted> filter_fixture(std::uint64_t seed, std::size_t count = 20) {
  std::mt19937_64 rng(seed);
  const std::vector<std::size_t> lengths = {120, 180, 239, 240, 241, 300, 600, 1200};
  const std::vector<double> fractions = {0.5, 0.64, 0.6499, 0.65, 0.651, 0.8, 1.0};
  std::vector<Planted> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto n = lengths[rng() % lengths.size()];
    const double f = fractions[rng() % fractions.size()];
    const auto valid = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9));
    const auto label = i % 3 == 0 ? gazeconf::Label::confused : gazeconf::Label::not_confused;
    out.push_back(trial(rng, "U" + std::to_string(i % 5), "T" + std::to_string(i), label, n, n - valid));
  }
  return out;
}

// Expected verdict computed from the plan alone: too short when fewer than
// 240 rows (2 s at 120 Hz), else too invalid when valid/n < 0.65.
inline std::optional<gazeconf::DiscardReason> expected_verdict(const Planted& p) {
  const auto n = p.trial.samples.size();
  if (n < 240) return gazeconf::DiscardReason::too_short;
  if (p.valid_rows * 100 < 65 * n) return gazeconf::DiscardReason::too_invalid;
  return std::nullopt;
}

}  // namespace fixture
