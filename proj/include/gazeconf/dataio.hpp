#pragma once

// Raw eye-tracker data model, the tab-separated trial file format, and the
// seeded synthetic dataset generator.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gazeconf/core.hpp"

namespace gazeconf {

// One eye's reading. Validity uses Tobii codes: 0 = certainly valid ..
// 4 = certainly invalid.
struct EyeReading {
  double gaze_x = 0.0;    // screen px
  double gaze_y = 0.0;    // screen px
  double cam_x = 0.0;     // normalized camera position
  double cam_y = 0.0;
  double pupil = 0.0;     // mm
  double distance = 0.0;  // mm
  int validity = 4;

  bool valid() const { return validity <= 1; }
  bool operator==(const EyeReading&) const = default;
};

struct RawSample {
  Micros timestamp_us = 0;
  EyeReading left;
  EyeReading right;

  bool operator==(const RawSample&) const = default;
};

inline constexpr std::size_t kNumericPerEye = 6;
inline constexpr std::size_t kFeaturesPerEye = 7;
inline constexpr std::size_t kFeatureCount = 2 * kFeaturesPerEye;

// Column names in item column order: left block, then right block.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "GazePointXLeft",  "GazePointYLeft",  "CamXLeft",      "CamYLeft",
    "PupilLeft",       "DistanceLeft",    "ValidityLeft",  "GazePointXRight",
    "GazePointYRight", "CamXRight",       "CamYRight",     "PupilRight",
    "DistanceRight",   "ValidityRight"};

inline std::array<double*, kNumericPerEye> numeric_fields(EyeReading& eye) {
  return {&eye.gaze_x, &eye.gaze_y, &eye.cam_x, &eye.cam_y, &eye.pupil, &eye.distance};
}

inline std::array<double, kNumericPerEye> numeric_values(const EyeReading& eye) {
  return {eye.gaze_x, eye.gaze_y, eye.cam_x, eye.cam_y, eye.pupil, eye.distance};
}

struct Trial {
  std::string user_id;
  std::string trial_id;
  Label label = Label::not_confused;
  std::optional<Micros> report_time_us;  // present iff confused
  std::vector<RawSample> samples;

  bool operator==(const Trial&) const = default;
};

struct SynthConfig {
  int n_users = 136;
  int trials_per_user = 40;
  double confusion_rate = 0.02;
  double separability = 0.5;
  double invalid_rate = 0.05;
  double mean_duration_s = 13.7;
  double sd_duration_s = 11.3;
  std::uint64_t seed = 0;

  void validate() const {
    auto rate = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ConfigError(std::string(name) + " must lie in [0,1]");
    };
    if (n_users < 1 || trials_per_user < 1) throw ConfigError("synthetic counts must be >= 1");
    rate(confusion_rate, "confusion_rate");
    rate(separability, "separability");
    rate(invalid_rate, "invalid_rate");
    if (!(mean_duration_s > 0.0)) throw ConfigError("mean_duration_s must be positive");
    if (!(sd_duration_s >= 0.0)) throw ConfigError("sd_duration_s must be >= 0");
  }

  bool operator==(const SynthConfig&) const = default;
};

enum class DataSource { parsed, synthetic };

struct Dataset {
  std::vector<Trial> trials;
  DataSource source = DataSource::parsed;
  std::optional<SynthConfig> generator_config;

  // (user_id, trial_id) pairs must be unique.
  void check_unique_keys() const {
    std::map<std::pair<std::string, std::string>, int> seen;
    for (const auto& t : trials) {
      if (++seen[{t.user_id, t.trial_id}] > 1)
        throw DataError("duplicate trial " + t.user_id + "/" + t.trial_id);
    }
  }
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::optional<double> parse_double(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<int> parse_int(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  int value = 0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// Decimal milliseconds to integer microseconds without a round trip through
// binary floating point for the common "123.456" form.
inline std::optional<Micros> parse_ms(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  bool negative = false;
  std::string_view text = cell;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const auto whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  auto digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (whole.empty() || !digits(whole) || !digits(frac)) {
    const auto value = parse_double(cell);
    if (!value) return std::nullopt;
    return ms_to_us(*value);
  }
  Micros us = 0;
  for (char c : whole) us = us * 10 + (c - '0');
  us *= 1000;
  Micros scale = 100;
  for (std::size_t i = 0; i < frac.size() && i < 3; ++i, scale /= 10) us += (frac[i] - '0') * scale;
  if (frac.size() > 3 && frac[3] >= '5') us += 1;
  return negative ? -us : us;
}

inline std::string format_ms(Micros us) {
  std::string out = us < 0 ? "-" : "";
  const Micros mag = us < 0 ? -us : us;
  out += std::to_string(mag / 1000);
  const auto frac = mag % 1000;
  if (frac != 0) {
    char buf[4];
    buf[0] = static_cast<char>('0' + frac / 100);
    buf[1] = static_cast<char>('0' + frac / 10 % 10);
    buf[2] = static_cast<char>('0' + frac % 10);
    buf[3] = '\0';
    std::string digits(buf);
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline std::unordered_map<std::string, std::size_t> header_index(
    std::string_view header, std::span<const std::string_view> required, const char* file) {
  std::unordered_map<std::string, std::size_t> index;
  const auto cells = split_tabs(header);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string name(cells[i]);
    if (i == 0 && name.size() >= 3 && name.compare(0, 3, "\xEF\xBB\xBF") == 0) name.erase(0, 3);
    index.emplace(std::move(name), i);
  }
  for (auto col : required) {
    if (!index.contains(std::string(col)))
      throw SchemaError(std::string(file) + ": missing column '" + std::string(col) + "'");
  }
  return index;
}

}  // namespace detail

// Parse the samples file and trials metadata file. Trials appear in
// metadata order; samples keep file order. Missing numeric cells mark the
// eye invalid (validity 4) and are stored as 0. Range warnings are appended
// to `warnings` when provided.
inline Dataset parse_trials(std::istream& samples_in, std::istream& meta_in,
                            std::vector<std::string>* warnings = nullptr) {
  Dataset dataset;
  dataset.source = DataSource::parsed;

  std::string line;
  if (!detail::read_line(meta_in, line)) throw SchemaError("metadata: empty file, header expected");
  static constexpr std::array<std::string_view, 4> kMetaCols = {"UserId", "TrialId", "Label",
                                                                "ReportTimeMs"};
  const auto meta_idx = detail::header_index(line, kMetaCols, "metadata");
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::size_t line_no = 1;
  while (detail::read_line(meta_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_tabs(line);
    auto cell = [&](const char* name) -> std::string_view {
      const auto i = meta_idx.at(name);
      return i < cells.size() ? cells[i] : std::string_view{};
    };
    Trial trial;
    trial.user_id = std::string(cell("UserId"));
    trial.trial_id = std::string(cell("TrialId"));
    const std::string where = "metadata line " + std::to_string(line_no) + " (trial " +
                              trial.user_id + "/" + trial.trial_id + ")";
    try {
      trial.label = parse_label(cell("Label"));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    const auto report = cell("ReportTimeMs");
    if (!report.empty()) {
      const auto us = detail::parse_ms(report);
      if (!us) throw DataError(where + ": bad ReportTimeMs '" + std::string(report) + "'");
      trial.report_time_us = *us;
    }
    if ((trial.label == Label::confused) != trial.report_time_us.has_value())
      throw DataError(where + ": ReportTimeMs must be present iff label is confused");
    if (!slot.emplace(std::pair{trial.user_id, trial.trial_id}, dataset.trials.size()).second)
      throw DataError(where + ": duplicate trial");
    dataset.trials.push_back(std::move(trial));
  }

  if (!detail::read_line(samples_in, line)) throw SchemaError("samples: empty file, header expected");
  std::vector<std::string_view> sample_cols = {"UserId", "TrialId", "Timestamp"};
  sample_cols.insert(sample_cols.end(), kFeatureNames.begin(), kFeatureNames.end());
  const auto idx = detail::header_index(line, sample_cols, "samples");
  std::array<std::size_t, kFeatureCount> feature_col{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) feature_col[f] = idx.at(std::string(kFeatureNames[f]));
  const auto user_col = idx.at("UserId");
  const auto trial_col = idx.at("TrialId");
  const auto time_col = idx.at("Timestamp");

  line_no = 1;
  std::pair<std::string, std::string> key;
  while (detail::read_line(samples_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_tabs(line);
    auto cell = [&](std::size_t i) { return i < cells.size() ? cells[i] : std::string_view{}; };
    key.first.assign(cell(user_col));
    key.second.assign(cell(trial_col));
    const auto it = slot.find(key);
    const std::string where = "samples line " + std::to_string(line_no);
    if (it == slot.end())
      throw DataError(where + ": trial " + key.first + "/" + key.second + " has no metadata row");
    Trial& trial = dataset.trials[it->second];
    RawSample sample;
    const auto ts = detail::parse_ms(cell(time_col));
    if (!ts) throw DataError(where + ": bad Timestamp in trial " + key.first + "/" + key.second);
    sample.timestamp_us = *ts;
    if (!trial.samples.empty() && sample.timestamp_us <= trial.samples.back().timestamp_us)
      throw DataError("trial " + key.first + "/" + key.second +
                      ": timestamps not strictly increasing at " + where);
    for (int eye = 0; eye < 2; ++eye) {
      EyeReading& reading = eye == 0 ? sample.left : sample.right;
      const std::size_t base = eye * kFeaturesPerEye;
      bool missing = false;
      auto fields = numeric_fields(reading);
      for (std::size_t f = 0; f < kNumericPerEye; ++f) {
        const auto raw = cell(feature_col[base + f]);
        const auto value = detail::parse_double(raw);
        if (!value) {
          if (!raw.empty())
            throw DataError(where + ": bad numeric cell '" + std::string(raw) + "' in column " +
                            std::string(kFeatureNames[base + f]));
          missing = true;
          *fields[f] = 0.0;
        } else {
          *fields[f] = *value;
        }
      }
      const auto raw_validity = cell(feature_col[base + 6]);
      const auto validity = detail::parse_int(raw_validity);
      if (!validity) {
        if (!raw_validity.empty())
          throw DataError(where + ": bad validity code '" + std::string(raw_validity) + "'");
        missing = true;
      } else if (*validity < 0 || *validity > 4) {
        throw DataError(where + ": validity code out of range 0..4");
      }
      reading.validity = missing ? 4 : *validity;
      if (warnings && reading.valid()) {
        if (!(reading.pupil > 0.0 && reading.pupil < 10.0))
          warnings->push_back(where + ": pupil diameter outside (0, 10) mm");
        if (!(reading.distance > 300.0 && reading.distance < 900.0))
          warnings->push_back(where + ": eye distance outside (300, 900) mm");
      }
    }
    trial.samples.push_back(sample);
  }

  for (const auto& trial : dataset.trials) {
    if (trial.report_time_us && !trial.samples.empty() &&
        *trial.report_time_us > trial.samples.back().timestamp_us)
      throw DataError("trial " + trial.user_id + "/" + trial.trial_id +
                      ": report time after last sample");
  }
  return dataset;
}

inline void write_trials(const Dataset& dataset, std::ostream& samples_out, std::ostream& meta_out) {
  meta_out << "UserId\tTrialId\tLabel\tReportTimeMs\n";
  samples_out << "UserId\tTrialId\tTimestamp";
  for (auto name : kFeatureNames) samples_out << '\t' << name;
  samples_out << '\n';
  for (const auto& trial : dataset.trials) {
    meta_out << trial.user_id << '\t' << trial.trial_id << '\t' << to_string(trial.label) << '\t';
    if (trial.report_time_us) meta_out << detail::format_ms(*trial.report_time_us);
    meta_out << '\n';
    for (const auto& s : trial.samples) {
      samples_out << trial.user_id << '\t' << trial.trial_id << '\t'
                  << detail::format_ms(s.timestamp_us);
      for (const EyeReading* eye : {&s.left, &s.right}) {
        for (double v : numeric_values(*eye)) samples_out << '\t' << detail::format_double(v);
        samples_out << '\t' << eye->validity;
      }
      samples_out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Synthetic generator

// Generative parameters of one class. Confused trials move each of the
// three discriminative parameters away from the baseline in proportion to
// separability; not_confused trials always use the baseline.
struct ClassDynamics {
  double fixation_mean_ms;   // Gamma-distributed dwell time
  double saccade_mean_px;    // lognormal saccade amplitude
  double dilation_mm;        // amplitude of pupil dilation pulses

  bool operator==(const ClassDynamics&) const = default;
};

inline ClassDynamics class_dynamics(Label label, double separability) {
  const double s = label == Label::confused ? separability : 0.0;
  return {.fixation_mean_ms = 250.0 * (1.0 + 2.0 * s),
          .saccade_mean_px = 160.0 * (1.0 - 0.6 * s),
          .dilation_mm = 0.15 * (1.0 + 8.0 * s)};
}

namespace synth {

inline constexpr double kScreenW = 1280.0;  // Tobii T120 panel
inline constexpr double kScreenH = 1024.0;
inline constexpr double kFixationGammaShape = 3.0;
inline constexpr double kSaccadeLogSigma = 0.5;
inline constexpr int kSaccadeSamples = 3;
inline constexpr double kPulseRatePerS = 0.6;
inline constexpr double kPulsePeakS = 0.5;
inline constexpr double kOneEyeDropout = 0.04;

inline double normal(Rng& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

inline double reflect(double v, double lo, double hi) {
  for (int i = 0; i < 4 && (v < lo || v > hi); ++i) v = v < lo ? 2 * lo - v : 2 * hi - v;
  return std::clamp(v, lo, hi);
}

struct UserTraits {
  double pupil_base;
  double distance_base;
  double cam_x;
  double cam_y;
};

inline UserTraits draw_user(Rng& rng) {
  return {.pupil_base = std::clamp(normal(rng, 3.5, 0.4), 2.0, 6.0),
          .distance_base = std::clamp(normal(rng, 620.0, 40.0), 480.0, 780.0),
          .cam_x = 0.35 + 0.1 * uniform01(rng),
          .cam_y = 0.4 + 0.2 * uniform01(rng)};
}

// Gaze trajectory as a fixation/saccade regime-switching walk.
inline std::vector<std::pair<double, double>> gaze_path(std::size_t n, const ClassDynamics& dyn,
                                                        Rng& rng) {
  std::vector<std::pair<double, double>> path;
  path.reserve(n);
  const double shape = kFixationGammaShape;
  std::gamma_distribution<double> dwell(shape, dyn.fixation_mean_ms / shape);
  const double mu = std::log(dyn.saccade_mean_px) - 0.5 * kSaccadeLogSigma * kSaccadeLogSigma;
  std::lognormal_distribution<double> amplitude(mu, kSaccadeLogSigma);
  double fx = kScreenW * (0.2 + 0.6 * uniform01(rng));
  double fy = kScreenH * (0.2 + 0.6 * uniform01(rng));
  while (path.size() < n) {
    const auto dwell_samples =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(dwell(rng) / (1000.0 / kSampleRateHz))));
    for (std::size_t i = 0; i < dwell_samples && path.size() < n; ++i) {
      path.emplace_back(reflect(fx + normal(rng, 0.0, 4.0), 0.0, kScreenW),
                        reflect(fy + normal(rng, 0.0, 4.0), 0.0, kScreenH));
    }
    const double len = amplitude(rng);
    const double angle = 2.0 * 3.14159265358979323846 * uniform01(rng);
    const double tx = reflect(fx + len * std::cos(angle), 0.0, kScreenW);
    const double ty = reflect(fy + len * std::sin(angle), 0.0, kScreenH);
    for (int i = 1; i <= kSaccadeSamples && path.size() < n; ++i) {
      const double a = static_cast<double>(i) / (kSaccadeSamples + 1);
      path.emplace_back(fx + a * (tx - fx), fy + a * (ty - fy));
    }
    fx = tx;
    fy = ty;
  }
  return path;
}

// Pupil dilation response: sum of gamma-shaped pulses at Poisson times.
inline std::vector<double> dilation_trace(std::size_t n, double amplitude, Rng& rng) {
  std::vector<double> trace(n, 0.0);
  const double duration_s = static_cast<double>(n) / kSampleRateHz;
  std::exponential_distribution<double> gap(kPulseRatePerS);
  for (double t = -2.0 + gap(rng); t < duration_s; t += gap(rng)) {
    const double a = amplitude * (0.7 + 0.6 * uniform01(rng));
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(t * kSampleRateHz)));
    const auto last = std::min(n, static_cast<std::size_t>((t + 8 * kPulsePeakS) * kSampleRateHz) + 1);
    for (std::size_t i = first; i < last; ++i) {
      const double tau = static_cast<double>(i) / kSampleRateHz - t;
      if (tau < 0) continue;
      trace[i] += a * (tau / kPulsePeakS) * std::exp(1.0 - tau / kPulsePeakS);
    }
  }
  return trace;
}

// Ornstein-Uhlenbeck drift sampled at 120 Hz.
inline std::vector<double> ou_drift(std::size_t n, double sd, double tau_s, Rng& rng) {
  std::vector<double> drift(n);
  const double dt = 1.0 / kSampleRateHz;
  const double keep = std::exp(-dt / tau_s);
  const double step_sd = sd * std::sqrt(1.0 - keep * keep);
  double x = normal(rng, 0.0, sd);
  for (auto& d : drift) {
    d = x;
    x = keep * x + normal(rng, 0.0, step_sd);
  }
  return drift;
}

inline void invalidate(EyeReading& eye, int code) {
  for (double* f : numeric_fields(eye)) *f = 0.0;
  eye.validity = code;
}

inline Trial make_trial(const SynthConfig& cfg, const UserTraits& user, std::string user_id,
                        std::string trial_id, Rng& rng) {
  Trial trial;
  trial.user_id = std::move(user_id);
  trial.trial_id = std::move(trial_id);
  trial.label = uniform01(rng) < cfg.confusion_rate ? Label::confused : Label::not_confused;

  double duration_s = 0.0;
  do {
    duration_s = cfg.sd_duration_s > 0 ? normal(rng, cfg.mean_duration_s, cfg.sd_duration_s)
                                       : cfg.mean_duration_s;
  } while (duration_s < 1.0 && cfg.sd_duration_s > 0);
  duration_s = std::max(duration_s, 1.0);
  const auto n = static_cast<std::size_t>(std::floor(duration_s * kSampleRateHz));

  const ClassDynamics dyn = class_dynamics(trial.label, cfg.separability);
  const auto path = gaze_path(n, dyn, rng);
  const auto dilation = dilation_trace(n, dyn.dilation_mm, rng);
  const auto pupil_drift = ou_drift(n, 0.15, 4.0, rng);
  const auto dist_drift = ou_drift(n, 15.0, 3.0, rng);
  const auto head_x = ou_drift(n, 0.02, 5.0, rng);
  const auto head_y = ou_drift(n, 0.02, 5.0, rng);
  const double eye_offset_x = normal(rng, 0.0, 6.0);
  const double eye_offset_y = normal(rng, 0.0, 6.0);

  trial.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    RawSample& s = trial.samples[i];
    s.timestamp_us = sample_time_us(static_cast<std::int64_t>(i));
    EyeReading& l = s.left;
    EyeReading& r = s.right;
    l.gaze_x = path[i].first;
    l.gaze_y = path[i].second;
    l.cam_x = std::clamp(user.cam_x + head_x[i] + 0.02 * (l.gaze_x / kScreenW - 0.5) +
                             normal(rng, 0.0, 0.002), 0.001, 0.999);
    l.cam_y = std::clamp(user.cam_y + head_y[i] + 0.02 * (l.gaze_y / kScreenH - 0.5) +
                             normal(rng, 0.0, 0.002), 0.001, 0.999);
    l.pupil = std::clamp(user.pupil_base + pupil_drift[i] + dilation[i] + normal(rng, 0.0, 0.02),
                         0.5, 9.5);
    l.distance = std::clamp(user.distance_base + dist_drift[i] + normal(rng, 0.0, 1.0), 320.0, 880.0);
    r.gaze_x = reflect(l.gaze_x + eye_offset_x + normal(rng, 0.0, 3.0), 0.0, kScreenW);
    r.gaze_y = reflect(l.gaze_y + eye_offset_y + normal(rng, 0.0, 3.0), 0.0, kScreenH);
    r.cam_x = std::clamp(l.cam_x + 0.2 + normal(rng, 0.0, 0.002), 0.001, 0.999);
    r.cam_y = std::clamp(l.cam_y + normal(rng, 0.0, 0.002), 0.001, 0.999);
    r.pupil = std::clamp(l.pupil + 0.05 + normal(rng, 0.0, 0.01), 0.5, 9.5);
    r.distance = std::clamp(l.distance + 3.0 + normal(rng, 0.0, 1.0), 320.0, 880.0);

    const double u = uniform01(rng);
    if (u < cfg.invalid_rate) {
      invalidate(l, 4);
      invalidate(r, 4);
    } else if (u < cfg.invalid_rate + (1.0 - cfg.invalid_rate) * kOneEyeDropout) {
      const int code = 2 + static_cast<int>(uniform_index(rng, 3));
      l.validity = 0;
      r.validity = 0;
      invalidate(uniform01(rng) < 0.5 ? l : r, code);
    } else {
      l.validity = uniform01(rng) < 0.9 ? 0 : 1;
      r.validity = uniform01(rng) < 0.9 ? 0 : 1;
    }
  }
  if (trial.label == Label::confused) {
    // Same law as the not_confused pivot: uniform over samples >= 2 s in.
    const std::size_t lo = std::min<std::size_t>(2 * kSampleRateHz, n - 1);
    const std::size_t pick = lo + uniform_index(rng, n - lo);
    trial.report_time_us = trial.samples[pick].timestamp_us;
  }
  return trial;
}

inline std::string numbered(char prefix, int value) {
  std::string digits = std::to_string(value);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return prefix + digits;
}

}  // namespace synth

// Seeded synthetic dataset. Output depends only on `config`; each trial
// draws from its own stream so trials are independent of generation order.
inline Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  Dataset dataset;
  dataset.source = DataSource::synthetic;
  dataset.generator_config = config;
  dataset.trials.reserve(static_cast<std::size_t>(config.n_users) * config.trials_per_user);
  for (int u = 0; u < config.n_users; ++u) {
    Rng user_rng = make_rng(config.seed, "synth/user", static_cast<std::uint64_t>(u));
    const auto traits = synth::draw_user(user_rng);
    for (int t = 0; t < config.trials_per_user; ++t) {
      const auto index = static_cast<std::uint64_t>(u) * config.trials_per_user + t;
      Rng rng = make_rng(config.seed, "synth/trial", index);
      dataset.trials.push_back(
          synth::make_trial(config, traits, synth::numbered('U', u), synth::numbered('T', t), rng));
    }
  }
  return dataset;
}

}  // namespace gazeconf
