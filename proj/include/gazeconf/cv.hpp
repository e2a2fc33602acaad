#pragma once

// Across-user cross-validation: user folds, per-fold train/validation/test
// splits, training-set balancing and the CV driver.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gazeconf/augment.hpp"
#include "gazeconf/metrics.hpp"
#include "gazeconf/preprocess.hpp"
#include "gazeconf/trainer.hpp"

namespace gazeconf {

// A: train 90 % / validation 10 %, metrics on validation.
// B: train 60 % / validation 30 % / test 10 %, metrics on test.
enum class CvMode { A, B };

inline std::string_view to_string(CvMode mode) { return mode == CvMode::A ? "A" : "B"; }

inline CvMode parse_cv_mode(std::string_view s) {
  if (s == "A" || s == "a") return CvMode::A;
  if (s == "B" || s == "b") return CvMode::B;
  throw ConfigError("unknown cv mode '" + std::string(s) + "' (expected A or B)");
}

struct FoldAssignment {
  int n_folds = 0;
  std::map<std::string, int> fold_of;
  std::vector<std::vector<std::string>> users;  // per fold, sorted

  int fold(const std::string& user) const {
    const auto it = fold_of.find(user);
    if (it == fold_of.end()) throw ContractViolation("user " + user + " has no fold");
    return it->second;
  }
};

// Users (sorted, then shuffled by seed) are dealt round-robin, so fold
// sizes differ by at most one.
inline FoldAssignment make_user_folds(std::vector<std::string> users, int n_folds, std::uint64_t seed) {
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  if (n_folds < 2) throw ConfigError("cv needs at least 2 folds");
  if (users.size() < static_cast<std::size_t>(n_folds))
    throw ConfigError("cv: " + std::to_string(users.size()) + " users is fewer than " + std::to_string(n_folds) +
                      " folds");
  Rng rng = make_rng(seed, "folds");
  shuffle(users.begin(), users.end(), rng);
  FoldAssignment a;
  a.n_folds = n_folds;
  a.users.resize(static_cast<std::size_t>(n_folds));
  for (std::size_t i = 0; i < users.size(); ++i) {
    const int f = static_cast<int>(i % static_cast<std::size_t>(n_folds));
    a.fold_of[users[i]] = f;
    a.users[static_cast<std::size_t>(f)].push_back(users[i]);
  }
  for (auto& u : a.users) std::sort(u.begin(), u.end());
  return a;
}

inline FoldAssignment make_user_folds(const Dataset& dataset, int n_folds, std::uint64_t seed) {
  std::vector<std::string> users;
  for (const auto& t : dataset.trials) users.push_back(t.user_id);
  return make_user_folds(std::move(users), n_folds, seed);
}

struct FoldUsers {
  std::set<std::string> train;
  std::set<std::string> validation;
  std::set<std::string> test;  // empty in mode A
};

// Number of folds used for validation in mode B (30 % at 10 folds).
inline int validation_fold_count(int n_folds) {
  return std::clamp(static_cast<int>(std::lround(0.3 * n_folds)), 1, n_folds - 2);
}

inline FoldUsers fold_users(const FoldAssignment& a, int fold, CvMode mode) {
  FoldUsers out;
  const int n = a.n_folds;
  std::vector<int> role(static_cast<std::size_t>(n), 0);  // 0 train, 1 validation, 2 test
  if (mode == CvMode::A) {
    role[static_cast<std::size_t>(fold)] = 1;
  } else {
    if (n < 3) throw ConfigError("cv mode B needs at least 3 folds");
    role[static_cast<std::size_t>(fold)] = 2;
    for (int j = 1; j <= validation_fold_count(n); ++j) role[static_cast<std::size_t>((fold + j) % n)] = 1;
  }
  for (int f = 0; f < n; ++f) {
    auto& dest = role[static_cast<std::size_t>(f)] == 0 ? out.train : role[static_cast<std::size_t>(f)] == 1 ? out.validation : out.test;
    dest.insert(a.users[static_cast<std::size_t>(f)].begin(), a.users[static_cast<std::size_t>(f)].end());
  }
  return out;
}

struct BalanceOptions {
  int smote_rate_percent = 0;
  int smote_k = 5;
};

struct FoldData {
  FoldUsers users;
  std::vector<WindowedItem> train;  // balanced, possibly with SMOTE items
  std::vector<WindowedItem> validation;
  std::vector<WindowedItem> test;
};

// Splits items by user and balances the training portion only: SMOTE on
// the training confused items, then majority downsampling.
inline FoldData plan_fold(const std::vector<WindowedItem>& items, const FoldAssignment& a, int fold, CvMode mode,
                          const BalanceOptions& balance, std::uint64_t seed) {
  FoldData data;
  data.users = fold_users(a, fold, mode);
  std::vector<WindowedItem> train_raw;
  for (const auto& item : items) {
    if (data.users.train.contains(item.user_id))
      train_raw.push_back(item);
    else if (data.users.validation.contains(item.user_id))
      data.validation.push_back(item);
    else if (data.users.test.contains(item.user_id))
      data.test.push_back(item);
  }
  if (balance.smote_rate_percent > 0) {
    std::vector<WindowedItem> minority;
    for (const auto& item : train_raw)
      if (item.label == Label::confused) minority.push_back(item);
    Rng rng = make_rng(seed, "smote", static_cast<std::uint64_t>(fold));
    auto synth = smote(minority, balance.smote_rate_percent, rng, balance.smote_k);
    for (auto& s : synth.items) train_raw.push_back(std::move(s));
  }
  Rng rng = make_rng(seed, "downsample", static_cast<std::uint64_t>(fold));
  data.train = downsample_majority(train_raw, rng);
  return data;
}

// Every item's user must belong to exactly the role its set claims.
inline bool fold_is_hygienic(const FoldData& d) {
  auto disjoint = [](const std::set<std::string>& x, const std::set<std::string>& y) {
    return std::none_of(x.begin(), x.end(), [&](const std::string& u) { return y.contains(u); });
  };
  auto within = [](const std::vector<WindowedItem>& items, const std::set<std::string>& users) {
    return std::all_of(items.begin(), items.end(), [&](const WindowedItem& it) { return users.contains(it.user_id); });
  };
  return disjoint(d.users.train, d.users.validation) && disjoint(d.users.train, d.users.test) &&
         disjoint(d.users.validation, d.users.test) && within(d.train, d.users.train) &&
         within(d.validation, d.users.validation) && within(d.test, d.users.test);
}

enum class Precision { f64, f32 };

struct CvOptions {
  PipelineOptions pipeline;
  Hyperparameters hp;
  BalanceOptions balance;
  CvMode mode = CvMode::A;
  int n_folds = 10;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: GAZECONF_THREADS or hardware concurrency
  Precision precision = Precision::f64;
};

struct FoldReport {
  int fold = 0;
  std::vector<std::string> eval_users;        // users the metrics are computed on
  std::vector<std::string> validation_users;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double roc_auc = 0.0;      // on the evaluation portion
  double val_roc_auc = 0.0;  // on the validation portion (same as roc_auc in mode A)
  double threshold = 0.0;    // picked on validation scores
  ConfusionCounts counts;
  RocCurve roc;  // evaluation portion
  int best_epoch = -1;
  int epochs_run = 0;
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
};

inline MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

struct CvReport {
  CvOptions options;
  std::vector<FoldReport> folds;
  MetricSummary sensitivity;
  MetricSummary specificity;
  MetricSummary roc_auc;
  MetricSummary val_roc_auc;
  DiscardReport discards;
  std::size_t n_items = 0;

  void aggregate() {
    std::vector<double> se, sp, roc, vroc;
    for (const auto& f : folds) {
      se.push_back(f.sensitivity);
      sp.push_back(f.specificity);
      roc.push_back(f.roc_auc);
      vroc.push_back(f.val_roc_auc);
    }
    sensitivity = summarize(se);
    specificity = summarize(sp);
    roc_auc = summarize(roc);
    val_roc_auc = summarize(vroc);
  }
};

inline int worker_count(int requested, int jobs) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("GAZECONF_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) n = std::min(n, cap);
    }
  }
  return std::clamp(n, 1, std::max(1, jobs));
}

// Runs body(i) for i in [0, jobs) on up to `workers` threads. The first
// exception (lowest index) is rethrown after all workers finish.
template <typename Body>
void parallel_for(int jobs, int workers, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < jobs; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

inline std::vector<const WindowedItem*> pointers(const std::vector<WindowedItem>& items) {
  std::vector<const WindowedItem*> out;
  for (const auto& it : items) out.push_back(&it);
  return out;
}

inline std::vector<Label> labels_of(const std::vector<WindowedItem>& items) {
  std::vector<Label> out;
  for (const auto& it : items) out.push_back(it.label);
  return out;
}

template <typename Scalar>
FoldReport evaluate_fold(const FoldData& data, const CvOptions& opts, int fold) {
  Hyperparameters hp = opts.hp;
  hp.seed = derive_seed(opts.seed, "train", static_cast<std::uint64_t>(fold));
  const auto trained = train<Scalar>(data.train, data.validation, hp);

  FoldReport r;
  r.fold = fold;
  r.best_epoch = trained.history.best_epoch;
  r.epochs_run = static_cast<int>(trained.history.epochs.size());
  r.n_train = data.train.size();
  r.validation_users.assign(data.users.validation.begin(), data.users.validation.end());

  const auto val_scores = nn::predict_confused(trained.params, pointers(data.validation));
  const auto val_labels = labels_of(data.validation);
  const auto val_curve = roc_curve(val_scores, val_labels);
  r.val_roc_auc = auc(val_curve);
  r.threshold = pick_threshold(val_curve);

  const auto& eval = opts.mode == CvMode::A ? data.validation : data.test;
  const auto& eval_users = opts.mode == CvMode::A ? data.users.validation : data.users.test;
  r.eval_users.assign(eval_users.begin(), eval_users.end());
  r.n_eval = eval.size();
  const auto eval_scores = opts.mode == CvMode::A ? val_scores : nn::predict_confused(trained.params, pointers(eval));
  const auto eval_labels = labels_of(eval);
  r.roc = opts.mode == CvMode::A ? val_curve : roc_curve(eval_scores, eval_labels);
  r.roc_auc = auc(r.roc);
  const auto rates = confusion_metrics(apply_threshold(eval_scores, r.threshold), eval_labels);
  r.sensitivity = rates.sensitivity;
  r.specificity = rates.specificity;
  r.counts = rates.counts;
  return r;
}

}  // namespace detail

// CV over already preprocessed items. Each fold derives its streams from
// (seed, fold index); results do not depend on the worker count.
inline CvReport run_cv(const std::vector<WindowedItem>& items, const CvOptions& opts) {
  std::vector<std::string> users;
  for (const auto& it : items) users.push_back(it.user_id);
  const auto assignment = make_user_folds(std::move(users), opts.n_folds, opts.seed);
  CvReport report;
  report.options = opts;
  report.n_items = items.size();
  report.folds.resize(static_cast<std::size_t>(opts.n_folds));
  parallel_for(opts.n_folds, worker_count(opts.threads, opts.n_folds), [&](int fold) {
    try {
      const auto data = plan_fold(items, assignment, fold, opts.mode, opts.balance, opts.seed);
      if (!fold_is_hygienic(data)) throw ContractViolation("user overlap between splits");
      report.folds[static_cast<std::size_t>(fold)] = opts.precision == Precision::f32
                                                         ? detail::evaluate_fold<float>(data, opts, fold)
                                                         : detail::evaluate_fold<double>(data, opts, fold);
    } catch (const NumericError& e) {
      throw NumericError("fold " + std::to_string(fold) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("fold " + std::to_string(fold) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError("fold " + std::to_string(fold) + ": " + e.what());
    }
  });
  report.aggregate();
  return report;
}

inline CvReport run_cv(const Dataset& dataset, const CvOptions& opts) {
  PipelineOptions pipeline = opts.pipeline;
  auto prepared = run_pipeline(dataset, pipeline);
  auto report = run_cv(prepared.items, opts);
  report.discards = std::move(prepared.report);
  return report;
}

}  // namespace gazeconf
