#include <gtest/gtest.h>

#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "gazeconf/preprocess.hpp"
#include "oracles.hpp"

using namespace gazeconf;

namespace {

RawSample sample_with(int left, int right) {
  RawSample s;
  s.left = {1, 2, 0.3, 0.4, 3.0, 600, left};
  s.right = {5, 6, 0.7, 0.8, 3.5, 610, right};
  return s;
}

Trial uniform_trial(std::size_t n, Label label = Label::confused) {
  std::mt19937_64 rng(n);
  return fixture::trial(rng, "U", "T", label, n, 0).trial;
}

}  // namespace

TEST(RowValidity, AllTwentyFiveCodePairs) {
  for (int l = 0; l <= 4; ++l)
    for (int r = 0; r <= 4; ++r) EXPECT_EQ(row_is_valid(sample_with(l, r)), l <= 1 || r <= 1) << l << "," << r;
}

TEST(RepairRow, BothValidIsIdentity) {
  const auto s = sample_with(0, 1);
  const auto out = repair_row(s);
  EXPECT_EQ(out.left, s.left);
  EXPECT_EQ(out.right, s.right);
}

TEST(RepairRow, CopiesValidEyeOverInvalidOne) {
  const auto s = sample_with(4, 0);
  const auto out = repair_row(s);
  EXPECT_EQ(numeric_values(out.left), numeric_values(s.right));
  EXPECT_EQ(out.left.validity, 0);
  EXPECT_EQ(out.right, s.right);
  const auto mirrored = repair_row(sample_with(1, 3));
  EXPECT_EQ(numeric_values(mirrored.right), numeric_values(sample_with(1, 3).left));
  EXPECT_EQ(mirrored.right.validity, 1);
}

TEST(RepairRow, BothInvalidIsUnchanged) {
  const auto s = sample_with(4, 2);
  const auto out = repair_row(s);
  EXPECT_EQ(out.left, s.left);
  EXPECT_EQ(out.right, s.right);
  EXPECT_FALSE(row_is_valid(out));
}

TEST(TrimTail, ReportAtEndOf600SamplesLeaves480) {
  const auto t = uniform_trial(600);
  const auto out = trim_tail(t);
  ASSERT_TRUE(out);
  EXPECT_EQ(out->samples.size(), 480u);
}

TEST(TrimTail, MatchesTimestampFilterOracle) {
  auto t = uniform_trial(1200);
  t.report_time_us = 5'000'000;
  const auto out = trim_tail(t);
  ASSERT_TRUE(out);
  std::size_t expected = 0;
  for (const auto& s : t.samples) expected += s.timestamp_us <= 4'000'000 ? 1 : 0;
  EXPECT_EQ(out->samples.size(), expected);
  EXPECT_LE(out->samples.back().timestamp_us, 4'000'000);
  for (std::size_t i = 0; i < out->samples.size(); ++i) EXPECT_EQ(out->samples[i], t.samples[i]);
}

TEST(TrimTail, NineHundredMillisecondTrialIsTooShort) {
  const auto t = uniform_trial(108);
  EXPECT_FALSE(trim_tail(t).has_value());
}

TEST(TrimTail, NotConfusedTrialNeedsAPivot) {
  EXPECT_THROW(trim_tail(uniform_trial(300, Label::not_confused)), ContractViolation);
  EXPECT_TRUE(trim_tail(uniform_trial(300, Label::not_confused), 2'000'000, 1'000'000).has_value());
}

TEST(FilterTrials, BoundaryCases) {
  std::mt19937_64 rng(1);
  Dataset ds;
  ds.trials.push_back(fixture::trial(rng, "U", "short", Label::not_confused, 180, 0).trial);
  ds.trials.push_back(fixture::trial(rng, "U", "p64", Label::confused, 1200, 1200 - 768).trial);
  ds.trials.push_back(fixture::trial(rng, "U", "p65", Label::not_confused, 1200, 1200 - 780).trial);
  const auto out = filter_trials(ds);
  ASSERT_EQ(out.kept.trials.size(), 1u);
  EXPECT_EQ(out.kept.trials[0].trial_id, "p65");
  ASSERT_EQ(out.report.entries.size(), 2u);
  EXPECT_EQ(out.report.entries[0].trial_id, "short");
  EXPECT_EQ(out.report.entries[0].reason, DiscardReason::too_short);
  EXPECT_EQ(out.report.entries[1].trial_id, "p64");
  EXPECT_EQ(out.report.entries[1].reason, DiscardReason::too_invalid);
  EXPECT_EQ(out.report.n_discarded_confused, 1);
  EXPECT_EQ(out.report.n_discarded_not_confused, 1);
}

TEST(FilterTrials, PlantedFixtureMatchesIndependentRecount) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto planted = fixture::filter_fixture(seed);
    Dataset ds;
    for (const auto& p : planted) ds.trials.push_back(p.trial);
    const auto out = filter_trials(ds);
    std::size_t kept = 0;
    int dc = 0, dn = 0;
    std::size_t entry = 0;
    for (const auto& p : planted) {
      const auto verdict = fixture::expected_verdict(p);
      if (!verdict) {
        ASSERT_LT(kept, out.kept.trials.size());
        EXPECT_EQ(out.kept.trials[kept++], p.trial);  // untouched
        continue;
      }
      (p.trial.label == Label::confused ? dc : dn) += 1;
      ASSERT_LT(entry, out.report.entries.size());
      EXPECT_EQ(out.report.entries[entry].trial_id, p.trial.trial_id);
      EXPECT_EQ(out.report.entries[entry].reason, *verdict) << p.trial.trial_id;
      ++entry;
    }
    EXPECT_EQ(kept, out.kept.trials.size());
    EXPECT_EQ(entry, out.report.entries.size());
    EXPECT_EQ(out.report.n_discarded_confused, dc);
    EXPECT_EQ(out.report.n_discarded_not_confused, dn);
  }
}

TEST(FillSentinel, FullyValidTrialIsUnchanged) {
  const auto t = repair_trial(uniform_trial(50));
  EXPECT_EQ(fill_sentinel(t), t);
}

TEST(FillSentinel, BothInvalidRowBecomesSentinelKeepingCodes) {
  auto t = repair_trial(uniform_trial(10));
  t.samples[4].left.validity = 4;
  t.samples[4].right.validity = 3;
  const auto out = fill_sentinel(t);
  for (double v : numeric_values(out.samples[4].left)) EXPECT_EQ(v, -1.0);
  for (double v : numeric_values(out.samples[4].right)) EXPECT_EQ(v, -1.0);
  EXPECT_EQ(out.samples[4].left.validity, 4);
  EXPECT_EQ(out.samples[4].right.validity, 3);
  for (std::size_t i = 0; i < 10; ++i)
    if (i != 4) EXPECT_EQ(out.samples[i], t.samples[i]);
  EXPECT_EQ(fill_sentinel(out), out);
}

TEST(FillSentinel, SentinelCellsAreExactlyTheInvalidCells) {
  auto planted = fixture::filter_fixture(77, 30);
  for (const auto& p : planted) {
    const auto filled = fill_sentinel(repair_trial(p.trial));
    for (std::size_t i = 0; i < filled.samples.size(); ++i) {
      for (const auto* eye : {&filled.samples[i].left, &filled.samples[i].right})
        for (double v : numeric_values(*eye)) ASSERT_EQ(v == -1.0, static_cast<bool>(p.both_invalid[i]));
    }
  }
}

TEST(ExtractWindow, ConfusedTrialOf13Point7SecondsGives600Samples) {
  const auto t = uniform_trial(1644);
  Rng rng(1);
  const auto w = extract_window(t, PipelineOptions{}, rng);
  ASSERT_TRUE(w.trial);
  EXPECT_EQ(w.trial->samples.size(), 600u);
  EXPECT_EQ(w.anchor_us, t.report_time_us);
  EXPECT_LE(w.trial->samples.back().timestamp_us, *t.report_time_us - 1'000'000);
}

TEST(ExtractWindow, ShortTrialIsKeptWhole) {
  const auto t = uniform_trial(480);
  EXPECT_EQ(keep_last(t, 5'000'000).samples.size(), 480u);
}

TEST(ExtractWindow, PivotIsReproducibleAndRecomputable) {
  const auto t = uniform_trial(1200, Label::not_confused);
  PipelineOptions opts;
  Rng a(99), b(99);
  const auto w1 = extract_window(t, opts, a);
  const auto w2 = extract_window(t, opts, b);
  ASSERT_TRUE(w1.anchor_us);
  EXPECT_EQ(w1.anchor_us, w2.anchor_us);
  EXPECT_EQ(w1.trial, w2.trial);
  EXPECT_GE(*w1.anchor_us, 2'000'000);
  if (w1.trial) {
    const auto trimmed = trim_tail(t, *w1.anchor_us, 1'000'000);
    ASSERT_TRUE(trimmed);
    EXPECT_EQ(keep_last(*trimmed, 5'000'000), *w1.trial);
  }
}

TEST(ExtractWindow, PivotsAreUniformOverTheAllowedRange) {
  const auto t = uniform_trial(720, Label::not_confused);
  Rng rng(4);
  std::set<Micros> seen;
  for (int i = 0; i < 5000; ++i) {
    const auto p = draw_pivot(t, rng, 2'000'000);
    ASSERT_TRUE(p);
    ASSERT_GE(*p, 2'000'000);
    seen.insert(*p);
  }
  EXPECT_EQ(seen.size(), 720u - 240u);
  EXPECT_FALSE(draw_pivot(uniform_trial(200, Label::not_confused), rng, 2'000'000).has_value());
}

TEST(CyclicPartition, EightRowsIntoFour) {
  WindowedItem item;
  item.values.resize(8, Eigen::NoChange);
  for (int r = 0; r < 8; ++r) item.values.row(r).setConstant(r);
  item.label = Label::confused;
  item.user_id = "U1";
  item.origin_trial_id = "T1";
  const auto parts = cyclic_partition(item, 4);
  ASSERT_EQ(parts.size(), 4u);
  for (int j = 0; j < 4; ++j) {
    ASSERT_EQ(parts[j].true_length(), 2);
    EXPECT_EQ(parts[j].values(0, 0), j);
    EXPECT_EQ(parts[j].values(1, 0), j + 4);
    EXPECT_EQ(parts[j].partition_index, j);
    EXPECT_EQ(parts[j].label, Label::confused);
    EXPECT_EQ(parts[j].user_id, "U1");
    EXPECT_EQ(parts[j].origin_trial_id, "T1");
  }
}

TEST(CyclicPartition, KOneIsIdentity) {
  std::mt19937_64 rng(2);
  const auto item = oracle::random_item(rng, 13, Label::not_confused);
  const auto parts = cyclic_partition(item, 1);
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0].values, item.values);
}

TEST(CyclicPartition, InterleaveRoundTripsBitExactly) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 4;
    const auto len = static_cast<Eigen::Index>(k + rng() % 200);
    const auto item = oracle::random_item(rng, len, Label::confused);
    const auto parts = cyclic_partition(item, k);
    Eigen::Index lo = len, hi = 0;
    for (const auto& p : parts) {
      lo = std::min(lo, p.true_length());
      hi = std::max(hi, p.true_length());
    }
    EXPECT_LE(hi - lo, 1);
    const ItemMatrix back = interleave(parts);
    ASSERT_EQ(back.rows(), item.values.rows());
    EXPECT_EQ(std::memcmp(back.data(), item.values.data(), sizeof(double) * back.size()), 0);
  }
}

TEST(CyclicPartition, TooFewRowsIsAnError) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(cyclic_partition(oracle::random_item(rng, 3, Label::confused), 4), DataError);
}

TEST(RunPipeline, EmptyDatasetGivesNothing) {
  const auto out = run_pipeline(Dataset{});
  EXPECT_TRUE(out.items.empty());
  EXPECT_EQ(out.report.n_discarded_confused + out.report.n_discarded_not_confused, 0);
}

TEST(RunPipeline, SixHundredRowWindowBecomesFour150RowItems) {
  Dataset ds;
  ds.trials.push_back(uniform_trial(1644));
  const auto out = run_pipeline(ds);
  ASSERT_EQ(out.items.size(), 4u);
  for (const auto& it : out.items) EXPECT_EQ(it.true_length(), 150);
}

TEST(RunPipeline, PlantedDefectsMatchThePlan) {
  // Confused trials report at their last sample, so the trimmed trial is the
  // first n - 120 rows; all planted invalid rows lie there.
  std::mt19937_64 rng(8);
  Dataset ds;
  std::vector<std::pair<std::string, std::optional<DiscardReason>>> plan;
  auto add = [&](std::string id, std::size_t n, std::size_t invalid, std::optional<DiscardReason> expect) {
    auto p = fixture::trial(rng, "U" + id, id, Label::confused, n - 120, invalid);
    // pad 1 s of valid rows after the planted part; the report sits at the end
    auto tail = fixture::trial(rng, "x", "x", Label::confused, n, 0).trial;
    for (std::size_t i = n - 120; i < n; ++i) p.trial.samples.push_back(tail.samples[i]);
    p.trial.report_time_us = p.trial.samples.back().timestamp_us;
    ds.trials.push_back(p.trial);
    plan.emplace_back(id, expect);
  };
  add("ok", 900, 0, std::nullopt);
  add("short", 300, 0, DiscardReason::too_short);    // 180 rows after trimming
  add("edge", 360, 0, std::nullopt);                 // exactly 240 rows after trimming
  add("dirty", 900, 300, DiscardReason::too_invalid);  // 480/780 valid
  add("clean65", 1320, 420, std::nullopt);           // 780/1200 valid
  add("dirty64", 1320, 432, DiscardReason::too_invalid);  // 768/1200 valid
  const auto out = run_pipeline(ds);
  std::size_t entry = 0;
  std::set<std::string> kept;
  for (const auto& it : out.items) kept.insert(it.origin_trial_id);
  for (const auto& [id, expect] : plan) {
    if (!expect) {
      EXPECT_TRUE(kept.contains(id)) << id;
      continue;
    }
    ASSERT_LT(entry, out.report.entries.size());
    EXPECT_EQ(out.report.entries[entry].trial_id, id);
    EXPECT_EQ(out.report.entries[entry].reason, *expect) << id;
    ++entry;
  }
  EXPECT_EQ(entry, out.report.entries.size());
  EXPECT_EQ(out.report.n_discarded_confused, 3);
}

TEST(RunPipeline, OutputInvariantsOnSyntheticData) {
  SynthConfig c;
  c.n_users = 4;
  c.trials_per_user = 12;
  c.confusion_rate = 0.3;
  c.seed = 3;
  const auto ds = generate_synthetic(c);
  PipelineOptions opts;
  opts.seed = 17;
  const auto a = run_pipeline(ds, opts);
  const auto b = run_pipeline(ds, opts);
  ASSERT_EQ(a.items.size(), b.items.size());
  std::map<std::pair<std::string, std::string>, Label> labels;
  for (const auto& t : ds.trials) labels[{t.user_id, t.trial_id}] = t.label;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const auto& it = a.items[i];
    EXPECT_EQ(it.values, b.items[i].values);
    EXPECT_GE(it.true_length(), 60);
    EXPECT_LE(it.true_length(), 150);
    EXPECT_TRUE(it.values.allFinite());
    EXPECT_EQ(labels.at({it.user_id, it.origin_trial_id}), it.label);
    ASSERT_TRUE(it.anchor_us.has_value());
    if (it.label == Label::not_confused) EXPECT_GE(*it.anchor_us, 2'000'000);
  }
  const auto total = static_cast<int>(a.items.size() / 4) + a.report.n_discarded_confused + a.report.n_discarded_not_confused;
  EXPECT_EQ(total, 48);
}

TEST(RunPipeline, MinMaxScalingKeepsSentinelOutsideUnitRange) {
  SynthConfig c;
  c.n_users = 3;
  c.trials_per_user = 10;
  c.invalid_rate = 0.1;
  c.seed = 4;
  PipelineOptions opts;
  opts.scaling = Scaling::minmax;
  const auto raw = run_pipeline(generate_synthetic(c), PipelineOptions{});
  const auto scaled = run_pipeline(generate_synthetic(c), opts);
  ASSERT_EQ(raw.items.size(), scaled.items.size());
  for (std::size_t i = 0; i < raw.items.size(); ++i) {
    const auto& r = raw.items[i].values;
    const auto& s = scaled.items[i].values;
    for (Eigen::Index row = 0; row < r.rows(); ++row)
      for (Eigen::Index col = 0; col < r.cols(); ++col) {
        const bool validity_col = col % 7 == 6;
        if (!validity_col && r(row, col) == -1.0) {
          EXPECT_EQ(s(row, col), -1.0);
        } else {
          EXPECT_GE(s(row, col), 0.0);
          EXPECT_LE(s(row, col), 1.0);
        }
      }
  }
}

TEST(Items, TsvRoundTrip) {
  SynthConfig c;
  c.n_users = 2;
  c.trials_per_user = 5;
  c.confusion_rate = 0.5;
  c.seed = 6;
  const auto items = run_pipeline(generate_synthetic(c)).items;
  std::stringstream io;
  write_items(items, io);
  const auto back = read_items(io);
  ASSERT_EQ(back.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(back[i].values, items[i].values);
    EXPECT_EQ(back[i].label, items[i].label);
    EXPECT_EQ(back[i].user_id, items[i].user_id);
    EXPECT_EQ(back[i].origin_trial_id, items[i].origin_trial_id);
    EXPECT_EQ(back[i].partition_index, items[i].partition_index);
    EXPECT_EQ(back[i].anchor_us, items[i].anchor_us);
  }
}
