#pragma once

// gazeconf command line: synth, prep, train, cv, report, gradcheck.
// Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gazeconf/gazeconf.hpp"

namespace gazeconf::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  constexpr char digits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 0xF];
  }
  return hex;
}

// Config echo, seed and digests of everything read and written.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& config) : command_(std::move(command)), config_(config) {}

  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }
  void note(const std::string& key, ojson value) { notes_[key] = std::move(value); }

  std::string write(const std::string& dir) const {
    ojson j;
    j["command"] = command_;
    j["seed"] = config_.seed;
    ojson cfg = ojson::object();
    for (const auto& [k, v] : config_entries(config_)) cfg[k] = v;
    j["config"] = std::move(cfg);
    auto files = [](const std::vector<std::string>& paths) {
      ojson arr = ojson::array();
      for (const auto& p : paths)
        arr.push_back({{"path", p}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
      return arr;
    };
    j["inputs"] = files(inputs_);
    j["outputs"] = files(outputs_);
    if (!notes_.empty()) j["notes"] = notes_;
    const auto path = (fs::path(dir) / (command_ + ".manifest.json")).string();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
    return path;
  }

 private:
  std::string command_;
  RunConfig config_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  ojson notes_ = ojson::object();
};

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

inline std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

inline Dataset load_dataset(const RunConfig& c, Manifest& m) {
  if (c.samples.empty() != c.meta.empty()) throw ConfigError("samples and meta must be given together");
  if (c.samples.empty()) {
    m.note("dataset", "synthetic");
    return generate_synthetic(c.synth_config());
  }
  auto samples = open_in(c.samples);
  auto meta = open_in(c.meta);
  std::vector<std::string> warnings;
  Dataset ds;
  try {
    ds = parse_trials(samples, meta, &warnings);
  } catch (const Error& e) {
    throw DataError(c.samples + " / " + c.meta + ": " + e.what());
  }
  m.input(c.samples);
  m.input(c.meta);
  if (!warnings.empty()) m.note("parse_warnings", warnings.size());
  return ds;
}

// Items from --items, else preprocessed from a parsed or generated dataset.
inline std::vector<WindowedItem> load_items(const RunConfig& c, Manifest& m, DiscardReport* discards) {
  if (!c.items.empty()) {
    auto in = open_in(c.items);
    m.input(c.items);
    return read_items(in, c.items);
  }
  auto prepared = run_pipeline(load_dataset(c, m), c.pipeline_options());
  if (discards) *discards = std::move(prepared.report);
  return std::move(prepared.items);
}

inline void write_json(const json& j, const std::string& path, Manifest& m) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  out.close();
  m.output(path);
}

inline int cmd_synth(const RunConfig& c, Manifest& m, std::ostream& log) {
  const auto ds = generate_synthetic(c.synth_config());
  const auto samples = out_path(c, "samples.tsv");
  const auto meta = out_path(c, "meta.tsv");
  {
    auto s = open_out(samples);
    auto t = open_out(meta);
    write_trials(ds, s, t);
  }
  m.output(samples);
  m.output(meta);
  log << "wrote " << ds.trials.size() << " trials to " << samples << " and " << meta << '\n';
  return kOk;
}

inline int cmd_prep(const RunConfig& c, Manifest& m, std::ostream& log) {
  const auto ds = load_dataset(c, m);
  const auto opts = c.pipeline_options();
  const auto prepared = run_pipeline(ds, opts);
  const auto items = out_path(c, "items.tsv");
  {
    auto out = open_out(items);
    write_items(prepared.items, out);
  }
  m.output(items);
  json report = to_json(prepared.report);
  report["metadata"] = to_json(opts);
  write_json(report, out_path(c, "discards.json"), m);
  log << prepared.items.size() << " items; discarded " << prepared.report.n_discarded_confused << " confused, "
      << prepared.report.n_discarded_not_confused << " not_confused\n";
  return kOk;
}

// Trains on every fold but fold 0, validating on fold 0.
inline int cmd_train(const RunConfig& c, Manifest& m, std::ostream& log) {
  const auto items = load_items(c, m, nullptr);
  std::vector<std::string> users;
  for (const auto& it : items) users.push_back(it.user_id);
  const auto folds = make_user_folds(std::move(users), c.folds, c.seed);
  const auto data = plan_fold(items, folds, 0, CvMode::A, c.balance, c.seed);
  const auto hp = c.hyperparameters();

  nn::ModelParams<double> params;
  TrainHistory history;
  if (c.precision == Precision::f32) {
    auto r = train<float>(data.train, data.validation, hp);
    params = r.params.cast<double>();
    history = std::move(r.history);
  } else {
    auto r = train<double>(data.train, data.validation, hp);
    params = std::move(r.params);
    history = std::move(r.history);
  }

  const auto ckpt = c.checkpoint_path.empty() ? out_path(c, "model.ckpt") : c.checkpoint_path;
  nn::save_checkpoint(params, ckpt);
  m.output(ckpt);
  json sidecar = to_json(hp);
  sidecar["input_size"] = params.input_size();
  sidecar["precision"] = c.precision == Precision::f32 ? "f32" : "f64";
  sidecar["checkpoint"] = ckpt;
  sidecar["validation_users"] = std::vector<std::string>(data.users.validation.begin(), data.users.validation.end());
  write_json(sidecar, out_path(c, "model.json"), m);
  write_json(to_json(history), out_path(c, "history.json"), m);
  const double best = history.best_epoch >= 0 ? history.epochs[static_cast<std::size_t>(history.best_epoch)].val_roc : 0.0;
  log << "trained " << nn::to_string(hp.cell) << " for " << history.epochs.size() << " epochs; best epoch "
      << history.best_epoch << " val_roc " << best << '\n';
  return kOk;
}

inline int cmd_cv(const RunConfig& c, Manifest& m, std::ostream& log) {
  DiscardReport discards;
  const auto items = load_items(c, m, &discards);
  auto report = run_cv(items, c.cv_options());
  report.discards = std::move(discards);
  const json j = to_json(report);
  write_json(j, out_path(c, "cv_report.json"), m);
  {
    const auto path = out_path(c, "cv_report.csv");
    auto out = open_out(path);
    write_cv_csv(j, out);
    out.close();
    m.output(path);
  }
  for (const auto& f : report.folds) {
    const auto path = out_path(c, "roc_fold" + std::to_string(f.fold) + ".csv");
    auto out = open_out(path);
    write_roc_csv(f.roc, out);
    out.close();
    m.output(path);
  }
  render_table(j, log);
  return kOk;
}

inline int cmd_report(const RunConfig& c, Manifest& m, std::ostream& log) {
  if (c.report.empty()) throw ConfigError("report: --report <cv_report.json> is required");
  auto in = open_in(c.report);
  m.input(c.report);
  json j;
  try {
    j = json::parse(in);
    render_table(j, log);
  } catch (const json::exception& e) {
    throw DataError(c.report + ": " + e.what());
  }
  return kOk;
}

inline constexpr double kGradcheckTolerance = 1e-4;

inline int cmd_gradcheck(const RunConfig& c, Manifest& m, std::ostream& log) {
  bool ok = true;
  for (auto kind : {nn::CellKind::rnn, nn::CellKind::gru, nn::CellKind::lstm}) {
    const auto r = nn::gradcheck_seed(kind, c.seed);
    log << nn::to_string(kind) << " max_relative_error " << r.max_relative_error << '\n';
    m.note(std::string(nn::to_string(kind)), r.max_relative_error);
    ok = ok && r.max_relative_error <= kGradcheckTolerance;
  }
  return ok ? kOk : kNumeric;
}

inline std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Confusion detection from raw eye-tracking data with recurrent networks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, Manifest&, std::ostream&);
  };
  const std::vector<Sub> subs = {
      {"synth", "write a synthetic dataset", cmd_synth},
      {"prep", "preprocess trials into items and a discard report", cmd_prep},
      {"train", "train one model and write checkpoint and history", cmd_train},
      {"cv", "run cross validation and write a CvReport", cmd_cv},
      {"report", "render a CvReport as a table", cmd_report},
      {"gradcheck", "finite-difference gradient check of every cell kind", cmd_gradcheck},
  };

  const auto keys = config_key_names();
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::App*, std::vector<std::pair<std::string, CLI::Option*>>>> options;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "key = value file; flags override it");
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    for (const auto& k : keys) opts.emplace_back(k, sub->add_option(flag_name(k), values[k]));
    options.emplace_back(sub, std::move(opts));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  std::size_t which = 0;
  while (!options[which].first->parsed()) ++which;

  try {
    RunConfig config;
    config.out = ".";
    if (!config_path.empty()) {
      auto in = open_in(config_path);
      read_config(in, config, config_path);
    }
    for (const auto& [key, opt] : options[which].second)
      if (opt->count() > 0) set_config_value(config, key, values[key]);
    config.validate();
    fs::create_directories(config.out);

    Manifest manifest(subs[which].name, config);
    if (!config_path.empty()) manifest.input(config_path);
    const int code = subs[which].fn(config, manifest, out);
    manifest.write(config.out);
    return code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace gazeconf::cli
