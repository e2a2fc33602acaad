#pragma once

// RunConfig: the merged flag set of every module, readable from a
// `key = value` file and overridable from the command line.

#include <algorithm>
#include <charconv>
#include <functional>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "gazeconf/cv.hpp"
#include "gazeconf/dataio.hpp"

namespace gazeconf {

struct RunConfig {
  std::uint64_t seed = 0;
  SynthConfig synth;
  PipelineOptions pipeline;
  BalanceOptions balance;
  Hyperparameters hp;
  CvMode mode = CvMode::A;
  int folds = 10;
  Precision precision = Precision::f64;

  std::string samples;  // raw sample TSV
  std::string meta;     // trial metadata TSV
  std::string items;    // preprocessed items TSV
  std::string out;      // output directory
  std::string checkpoint_path;
  std::string report;   // CvReport JSON (input of `report`)

  CvOptions cv_options() const {
    CvOptions o;
    o.pipeline = with_seed(pipeline);
    o.hp = hp;
    o.hp.seed = seed;
    o.balance = balance;
    o.mode = mode;
    o.n_folds = folds;
    o.seed = seed;
    o.precision = precision;
    return o;
  }

  SynthConfig synth_config() const { return with_seed(synth); }
  PipelineOptions pipeline_options() const { return with_seed(pipeline); }
  Hyperparameters hyperparameters() const { return with_seed(hp); }

  void validate() const {
    synth_config().validate();
    pipeline.validate();
    hp.validate();
    if (balance.smote_rate_percent < 0 || balance.smote_rate_percent % 100 != 0)
      throw ConfigError("smote_rate_percent must be a non-negative multiple of 100");
    if (balance.smote_k < 1) throw ConfigError("smote_k must be >= 1");
    if (folds < 2) throw ConfigError("folds must be >= 2");
  }

 private:
  template <class T>
  T with_seed(T t) const {
    t.seed = seed;
    return t;
  }
};

namespace detail {

struct ConfigKey {
  const char* name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline std::string bad_value(std::string_view key, std::string_view value, const char* expected) {
  return "config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + expected;
}

template <class T>
T parse_integral(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError(bad_value(key, value, "an integer"));
  return out;
}

inline double parse_real(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v) throw ConfigError(bad_value(key, value, "a finite number"));
  return *v;
}

template <class T>
ConfigKey int_key(const char* name, T RunConfig::*group, int T::*field) {
  return {name, [=](RunConfig& c, std::string_view v) { (c.*group).*field = parse_integral<int>(name, v); },
          [=](const RunConfig& c) { return std::to_string((c.*group).*field); }};
}

template <class T>
ConfigKey real_key(const char* name, T RunConfig::*group, double T::*field) {
  return {name, [=](RunConfig& c, std::string_view v) { (c.*group).*field = parse_real(name, v); },
          [=](const RunConfig& c) { return format_double((c.*group).*field); }};
}

inline ConfigKey path_key(const char* name, std::string RunConfig::*field) {
  return {name, [=](RunConfig& c, std::string_view v) { c.*field = std::string(v); },
          [=](const RunConfig& c) { return c.*field; }};
}

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back({"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_integral<std::uint64_t>("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    // dataio
    k.push_back(path_key("samples", &RunConfig::samples));
    k.push_back(path_key("meta", &RunConfig::meta));
    k.push_back(int_key("n_users", &RunConfig::synth, &SynthConfig::n_users));
    k.push_back(int_key("trials_per_user", &RunConfig::synth, &SynthConfig::trials_per_user));
    k.push_back(real_key("confusion_rate", &RunConfig::synth, &SynthConfig::confusion_rate));
    k.push_back(real_key("separability", &RunConfig::synth, &SynthConfig::separability));
    k.push_back(real_key("invalid_rate", &RunConfig::synth, &SynthConfig::invalid_rate));
    k.push_back(real_key("mean_duration_s", &RunConfig::synth, &SynthConfig::mean_duration_s));
    k.push_back(real_key("sd_duration_s", &RunConfig::synth, &SynthConfig::sd_duration_s));
    // preprocess
    k.push_back(path_key("items", &RunConfig::items));
    k.push_back(real_key("window_sec", &RunConfig::pipeline, &PipelineOptions::window_sec));
    k.push_back(int_key("partitions", &RunConfig::pipeline, &PipelineOptions::partitions));
    k.push_back(real_key("min_duration_sec", &RunConfig::pipeline, &PipelineOptions::min_duration_sec));
    k.push_back(real_key("min_valid_fraction", &RunConfig::pipeline, &PipelineOptions::min_valid_fraction));
    k.push_back(real_key("trim_sec", &RunConfig::pipeline, &PipelineOptions::trim_sec));
    k.push_back({"scaling",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "none") c.pipeline.scaling = Scaling::none;
                   else if (v == "minmax") c.pipeline.scaling = Scaling::minmax;
                   else throw ConfigError(bad_value("scaling", v, "one of none, minmax"));
                 },
                 [](const RunConfig& c) { return std::string(c.pipeline.scaling == Scaling::minmax ? "minmax" : "none"); }});
    // augment
    k.push_back(int_key("smote_rate_percent", &RunConfig::balance, &BalanceOptions::smote_rate_percent));
    k.push_back(int_key("smote_k", &RunConfig::balance, &BalanceOptions::smote_k));
    // trainer
    k.push_back({"model",
                 [](RunConfig& c, std::string_view v) {
                   try {
                     c.hp.cell = nn::parse_cell_kind(v);
                   } catch (const Error&) {
                     throw ConfigError(bad_value("model", v, "one of rnn, gru, lstm"));
                   }
                 },
                 [](const RunConfig& c) { return std::string(nn::to_string(c.hp.cell)); }});
    k.push_back(int_key("hidden", &RunConfig::hp, &Hyperparameters::hidden_size));
    k.push_back(real_key("lr", &RunConfig::hp, &Hyperparameters::learning_rate));
    k.push_back(int_key("epochs", &RunConfig::hp, &Hyperparameters::max_epochs));
    k.push_back(int_key("batch", &RunConfig::hp, &Hyperparameters::batch_size));
    k.push_back(int_key("patience", &RunConfig::hp, &Hyperparameters::early_stop_patience));
    k.push_back({"lr_schedule",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "linear") c.hp.schedule = LrSchedule::linear;
                   else if (v == "plateau") c.hp.schedule = LrSchedule::plateau;
                   else throw ConfigError(bad_value("lr_schedule", v, "one of linear, plateau"));
                 },
                 [](const RunConfig& c) {
                   return std::string(c.hp.schedule == LrSchedule::linear ? "linear" : "plateau");
                 }});
    k.push_back(path_key("checkpoint_path", &RunConfig::checkpoint_path));
    // eval
    k.push_back({"mode",
                 [](RunConfig& c, std::string_view v) {
                   try {
                     c.mode = parse_cv_mode(v);
                   } catch (const Error&) {
                     throw ConfigError(bad_value("mode", v, "one of A, B"));
                   }
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
    k.push_back({"folds", [](RunConfig& c, std::string_view v) { c.folds = parse_integral<int>("folds", v); },
                 [](const RunConfig& c) { return std::to_string(c.folds); }});
    k.push_back({"precision",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "f64") c.precision = Precision::f64;
                   else if (v == "f32") c.precision = Precision::f32;
                   else throw ConfigError(bad_value("precision", v, "one of f64, f32"));
                 },
                 [](const RunConfig& c) { return std::string(c.precision == Precision::f32 ? "f32" : "f64"); }});
    k.push_back(path_key("out", &RunConfig::out));
    k.push_back(path_key("report", &RunConfig::report));
    return k;
  }();
  return keys;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace detail

inline std::vector<std::string> config_key_names() {
  std::vector<std::string> names;
  for (const auto& k : detail::config_keys()) names.emplace_back(k.name);
  return names;
}

inline bool is_config_key(std::string_view key) {
  const auto& keys = detail::config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const auto& k) { return key == k.name; });
}

inline void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& k : detail::config_keys()) {
    if (key == k.name) {
      k.set(config, detail::trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

inline std::string get_config_value(const RunConfig& config, std::string_view key) {
  for (const auto& k : detail::config_keys())
    if (key == k.name) return k.get(config);
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

// Canonical ordered echo of every key.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : detail::config_keys()) out.emplace_back(k.name, k.get(config));
  return out;
}

inline void read_config(std::istream& in, RunConfig& config, const std::string& source = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = detail::trim(body.substr(0, eq));
    try {
      set_config_value(config, key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void write_config(const RunConfig& config, std::ostream& out) {
  for (const auto& [k, v] : config_entries(config)) out << k << " = " << v << '\n';
}

}  // namespace gazeconf
