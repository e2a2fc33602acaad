#pragma once

// JSON / CSV renderings of pipeline, training and CV results.

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "gazeconf/cv.hpp"

namespace gazeconf {

using nlohmann::json;

// JSON has no infinity; the (0,0) ROC point's threshold is written as "inf".
inline json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double number_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

inline json to_json(const PipelineOptions& o) {
  return {{"window_sec", o.window_sec},
          {"partitions", o.partitions},
          {"min_duration_sec", o.min_duration_sec},
          {"min_valid_fraction", o.min_valid_fraction},
          {"trim_sec", o.trim_sec},
          {"scaling", o.scaling == Scaling::minmax ? "minmax" : "none"},
          {"seed", o.seed}};
}

inline json to_json(const Hyperparameters& hp) {
  return {{"model", std::string(nn::to_string(hp.cell))},
          {"hidden", hp.hidden_size},
          {"lr", hp.learning_rate},
          {"epochs", hp.max_epochs},
          {"batch", hp.batch_size},
          {"patience", hp.early_stop_patience},
          {"lr_schedule", hp.schedule == LrSchedule::linear ? "linear" : "plateau"},
          {"seed", hp.seed}};
}

inline json to_json(const DiscardReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"user_id", e.user_id},
                       {"trial_id", e.trial_id},
                       {"label", std::string(to_string(e.label))},
                       {"reason", std::string(to_string(e.reason))}});
  return {{"n_discarded_confused", r.n_discarded_confused},
          {"n_discarded_not_confused", r.n_discarded_not_confused},
          {"entries", std::move(entries)}};
}

inline json to_json(const TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_roc", e.val_roc}, {"lr", e.learning_rate}});
  return {{"epochs", std::move(epochs)}, {"best_epoch", h.best_epoch}, {"stopped_early", h.stopped_early}};
}

inline json to_json(const RocCurve& curve) {
  json pts = json::array();
  for (const auto& p : curve.points) pts.push_back({{"threshold", number(p.threshold)}, {"fpr", p.fpr}, {"tpr", p.tpr}});
  return pts;
}

inline void write_roc_csv(const RocCurve& curve, std::ostream& out) {
  out << "threshold,fpr,tpr\n" << std::setprecision(17);
  for (const auto& p : curve.points) {
    if (std::isinf(p.threshold))
      out << "inf";
    else
      out << p.threshold;
    out << ',' << p.fpr << ',' << p.tpr << '\n';
  }
}

inline json to_json(const MetricSummary& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

inline json to_json(const CvReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"eval_users", f.eval_users},
                     {"validation_users", f.validation_users},
                     {"sensitivity", f.sensitivity},
                     {"specificity", f.specificity},
                     {"roc_auc", f.roc_auc},
                     {"val_roc_auc", f.val_roc_auc},
                     {"threshold", number(f.threshold)},
                     {"tp", f.counts.tp},
                     {"fp", f.counts.fp},
                     {"tn", f.counts.tn},
                     {"fn", f.counts.fn},
                     {"best_epoch", f.best_epoch},
                     {"epochs_run", f.epochs_run},
                     {"n_train", f.n_train},
                     {"n_eval", f.n_eval}});
  }
  const auto& o = r.options;
  json config = {{"mode", std::string(to_string(o.mode))},
                 {"folds", o.n_folds},
                 {"seed", o.seed},
                 {"precision", o.precision == Precision::f32 ? "f32" : "f64"},
                 {"smote_rate_percent", o.balance.smote_rate_percent},
                 {"smote_k", o.balance.smote_k},
                 {"pipeline", to_json(o.pipeline)},
                 {"train", to_json(o.hp)}};
  return {{"config", std::move(config)},
          {"n_items", r.n_items},
          {"discards", {{"confused", r.discards.n_discarded_confused}, {"not_confused", r.discards.n_discarded_not_confused}}},
          {"folds", std::move(folds)},
          {"aggregate",
           {{"sensitivity", to_json(r.sensitivity)},
            {"specificity", to_json(r.specificity)},
            {"roc_auc", to_json(r.roc_auc)},
            {"val_roc_auc", to_json(r.val_roc_auc)}}}};
}

// One row per fold plus an aggregate (mean) row.
inline void write_cv_csv(const json& report, std::ostream& out) {
  out << "fold,sensitivity,specificity,roc_auc,val_roc_auc,threshold,tp,fp,tn,fn,best_epoch\n"
      << std::setprecision(17);
  auto num = [&](const json& j) {
    if (j.is_string()) out << j.get<std::string>();
    else out << j.get<double>();
  };
  for (const auto& f : report.at("folds")) {
    out << f.at("fold").get<int>() << ',';
    for (const char* k : {"sensitivity", "specificity", "roc_auc", "val_roc_auc", "threshold"}) {
      num(f.at(k));
      out << ',';
    }
    out << f.at("tp").get<int>() << ',' << f.at("fp").get<int>() << ',' << f.at("tn").get<int>() << ','
        << f.at("fn").get<int>() << ',' << f.at("best_epoch").get<int>() << '\n';
  }
  const auto& agg = report.at("aggregate");
  out << "mean," << agg.at("sensitivity").at("mean").get<double>() << ','
      << agg.at("specificity").at("mean").get<double>() << ',' << agg.at("roc_auc").at("mean").get<double>() << ','
      << agg.at("val_roc_auc").at("mean").get<double>() << ",,,,,,\n";
}

// Fixed-width table for terminals.
inline void render_table(const json& report, std::ostream& out) {
  const auto& cfg = report.at("config");
  out << "model " << cfg.at("train").at("model").get<std::string>() << ", mode " << cfg.at("mode").get<std::string>()
      << ", " << cfg.at("folds").get<int>() << " folds, seed " << cfg.at("seed").get<std::uint64_t>() << "\n\n";
  out << std::left << std::setw(6) << "fold" << std::right << std::setw(13) << "sensitivity" << std::setw(13)
      << "specificity" << std::setw(10) << "roc" << std::setw(10) << "val_roc" << std::setw(12) << "threshold"
      << "\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& f : report.at("folds")) {
    out << std::left << std::setw(6) << f.at("fold").get<int>() << std::right << std::setw(13)
        << f.at("sensitivity").get<double>() << std::setw(13) << f.at("specificity").get<double>() << std::setw(10)
        << f.at("roc_auc").get<double>() << std::setw(10) << f.at("val_roc_auc").get<double>();
    const auto& th = f.at("threshold");
    if (th.is_string())
      out << std::setw(12) << th.get<std::string>();
    else
      out << std::setw(12) << th.get<double>();
    out << "\n";
  }
  const auto& agg = report.at("aggregate");
  auto cell = [&](const char* k) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << agg.at(k).at("mean").get<double>() << "+-" << agg.at(k).at("sd").get<double>();
    return s.str();
  };
  out << std::left << std::setw(6) << "mean" << std::right << std::setw(13) << cell("sensitivity") << std::setw(13)
      << cell("specificity") << std::setw(14) << cell("roc_auc") << std::setw(14) << cell("val_roc_auc") << "\n";
  out.unsetf(std::ios::fixed);
}

}  // namespace gazeconf
