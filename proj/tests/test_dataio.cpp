#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "gazeconf/dataio.hpp"
#include "gazeconf/preprocess.hpp"
#include "oracles.hpp"

using namespace gazeconf;

namespace {

std::string sample_header(std::string_view drop = "") {
  std::string h = "UserId\tTrialId\tTimestamp";
  for (auto name : kFeatureNames)
    if (name != drop) h += "\t" + std::string(name);
  return h + "\n";
}

const std::string kMetaHeader = "UserId\tTrialId\tLabel\tReportTimeMs\n";

std::string row(const std::string& ts, const std::string& left_validity = "0", const std::string& pupil = "3.1") {
  // left eye then right eye: gx gy cx cy pupil dist validity
  return "U1\tT1\t" + ts + "\t100\t200\t0.4\t0.5\t" + pupil + "\t600\t" + left_validity +
         "\t110\t210\t0.41\t0.51\t3.2\t601\t0\n";
}

Dataset parse(const std::string& samples, const std::string& meta, std::vector<std::string>* w = nullptr) {
  std::istringstream s(samples), m(meta);
  return parse_trials(s, m, w);
}

SynthConfig small_config(double sep = 0.5) {
  SynthConfig c;
  c.n_users = 3;
  c.trials_per_user = 4;
  c.confusion_rate = 0.3;
  c.separability = sep;
  c.mean_duration_s = 4;
  c.sd_duration_s = 2;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(ParseTrials, HeaderOnlyGivesEmptyDataset) {
  const auto ds = parse(sample_header(), kMetaHeader);
  EXPECT_TRUE(ds.trials.empty());
  EXPECT_EQ(ds.source, DataSource::parsed);
}

TEST(ParseTrials, ThreeRowFileMatchesHandBuiltTrial) {
  const auto ds = parse(sample_header() + row("0") + row("8") + row("16"), kMetaHeader + "U1\tT1\tnot_confused\t\n");
  ASSERT_EQ(ds.trials.size(), 1u);
  Trial expected;
  expected.user_id = "U1";
  expected.trial_id = "T1";
  expected.label = Label::not_confused;
  for (Micros t : {0, 8000, 16000}) {
    RawSample s;
    s.timestamp_us = t;
    s.left = {100, 200, 0.4, 0.5, 3.1, 600, 0};
    s.right = {110, 210, 0.41, 0.51, 3.2, 601, 0};
    expected.samples.push_back(s);
  }
  EXPECT_EQ(ds.trials[0], expected);
}

TEST(ParseTrials, AcceptsPupilColumnAndRejectsMissingValidity) {
  EXPECT_NO_THROW(parse(sample_header() + row("0"), kMetaHeader + "U1\tT1\tnot_confused\t\n"));
  try {
    parse(sample_header("ValidityLeft"), kMetaHeader);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("ValidityLeft"), std::string::npos);
  }
}

TEST(ParseTrials, MissingMetadataColumnIsSchemaError) {
  EXPECT_THROW(parse(sample_header(), "UserId\tTrialId\tLabel\n"), SchemaError);
}

TEST(ParseTrials, NonMonotoneTimestampsNameTheTrial) {
  try {
    parse(sample_header() + row("0") + row("16") + row("8"), kMetaHeader + "U1\tT1\tnot_confused\t\n");
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("U1/T1"), std::string::npos);
  }
}

TEST(ParseTrials, UnknownLabelIsDataError) {
  EXPECT_THROW(parse(sample_header(), kMetaHeader + "U1\tT1\tpuzzled\t\n"), DataError);
}

TEST(ParseTrials, ReportTimeMustAccompanyConfusedLabel) {
  EXPECT_THROW(parse(sample_header(), kMetaHeader + "U1\tT1\tconfused\t\n"), DataError);
  EXPECT_THROW(parse(sample_header(), kMetaHeader + "U1\tT1\tnot_confused\t100\n"), DataError);
}

TEST(ParseTrials, MissingCellsMarkTheEyeInvalid) {
  std::string r = row("0");
  // blank the left pupil cell
  r.replace(r.find("\t3.1\t"), 5, "\t\t");
  const auto ds = parse(sample_header() + r, kMetaHeader + "U1\tT1\tnot_confused\t\n");
  EXPECT_EQ(ds.trials[0].samples[0].left.validity, 4);
  EXPECT_EQ(ds.trials[0].samples[0].right.validity, 0);
  const auto blank_validity = parse(sample_header() + row("0", ""), kMetaHeader + "U1\tT1\tnot_confused\t\n");
  EXPECT_EQ(blank_validity.trials[0].samples[0].left.validity, 4);
}

TEST(ParseTrials, OutOfRangePupilOnlyWarns) {
  std::vector<std::string> warnings;
  const auto ds = parse(sample_header() + row("0", "0", "12.5"), kMetaHeader + "U1\tT1\tnot_confused\t\n", &warnings);
  EXPECT_EQ(ds.trials.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("pupil"), std::string::npos);
}

TEST(ParseTrials, FractionalMillisecondsAreExactMicroseconds) {
  const auto ds = parse(sample_header() + row("8.333") + row("16.667"), kMetaHeader + "U1\tT1\tnot_confused\t\n");
  EXPECT_EQ(ds.trials[0].samples[0].timestamp_us, 8333);
  EXPECT_EQ(ds.trials[0].samples[1].timestamp_us, 16667);
}

TEST(WriteTrials, EmptyDatasetIsHeaderOnly) {
  std::ostringstream s, m;
  write_trials(Dataset{}, s, m);
  EXPECT_EQ(s.str(), sample_header());
  EXPECT_EQ(m.str(), kMetaHeader);
}

TEST(WriteTrials, ReportTimeIsWrittenVerbatim) {
  Dataset ds;
  Trial t;
  t.user_id = "U7";
  t.trial_id = "T3";
  t.label = Label::confused;
  t.report_time_us = 4'200'000;
  RawSample s;
  s.timestamp_us = 4'500'000;
  s.left.validity = 0;
  s.right.validity = 0;
  t.samples.push_back(s);
  ds.trials.push_back(t);
  std::ostringstream so, mo;
  write_trials(ds, so, mo);
  EXPECT_EQ(mo.str(), kMetaHeader + "U7\tT3\tconfused\t4200\n");
}

TEST(WriteTrials, SyntheticRoundTripIsFieldwiseIdentity) {
  const auto ds = generate_synthetic(small_config());
  std::stringstream s, m;
  write_trials(ds, s, m);
  const auto back = parse_trials(s, m);
  ASSERT_EQ(back.trials.size(), ds.trials.size());
  for (std::size_t i = 0; i < ds.trials.size(); ++i) EXPECT_EQ(back.trials[i], ds.trials[i]) << i;
}

TEST(Generator, IsAPureFunctionOfConfig) {
  const auto a = generate_synthetic(small_config());
  const auto b = generate_synthetic(small_config());
  EXPECT_EQ(a.trials, b.trials);
  auto other = small_config();
  other.seed = 12;
  EXPECT_NE(generate_synthetic(other).trials, a.trials);
}

TEST(Generator, ShapeAndInvariants) {
  const auto c = small_config();
  const auto ds = generate_synthetic(c);
  EXPECT_EQ(ds.source, DataSource::synthetic);
  ASSERT_TRUE(ds.generator_config.has_value());
  EXPECT_EQ(ds.trials.size(), 12u);
  EXPECT_NO_THROW(ds.check_unique_keys());
  for (const auto& t : ds.trials) {
    ASSERT_GE(t.samples.size(), 120u);  // truncated at 1 s
    EXPECT_EQ(t.report_time_us.has_value(), t.label == Label::confused);
    if (t.report_time_us) EXPECT_LE(*t.report_time_us, t.samples.back().timestamp_us);
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      const auto& s = t.samples[i];
      ASSERT_EQ(s.timestamp_us, sample_time_us(static_cast<std::int64_t>(i)));
      for (const auto* eye : {&s.left, &s.right}) {
        ASSERT_GE(eye->validity, 0);
        ASSERT_LE(eye->validity, 4);
        for (double v : numeric_values(*eye)) ASSERT_TRUE(std::isfinite(v));
        if (eye->valid()) {
          EXPECT_GT(eye->pupil, 0);
          EXPECT_LT(eye->pupil, 10);
          EXPECT_GT(eye->distance, 300);
          EXPECT_LT(eye->distance, 900);
          EXPECT_NE(eye->gaze_x, -1.0);
          EXPECT_NE(eye->pupil, -1.0);
        }
      }
    }
  }
}

TEST(Generator, ConfusedCountMatchesTheStudyRate) {
  SynthConfig c;
  c.n_users = 136;
  c.trials_per_user = 40;
  c.confusion_rate = 0.02;
  c.mean_duration_s = 1;  // labels do not depend on duration; keeps the test small
  c.sd_duration_s = 0;
  c.seed = 2024;
  const auto ds = generate_synthetic(c);
  ASSERT_EQ(ds.trials.size(), 5440u);
  const auto confused = std::count_if(ds.trials.begin(), ds.trials.end(),
                                      [](const Trial& t) { return t.label == Label::confused; });
  const auto [lo, hi] = oracle::binomial_interval99(5440, 0.02);
  EXPECT_GE(confused, lo);
  EXPECT_LE(confused, hi);
}

TEST(Generator, BothEyesInvalidFractionMatchesInvalidRate) {
  auto c = small_config();
  c.n_users = 4;
  c.trials_per_user = 10;
  c.mean_duration_s = 10;
  c.invalid_rate = 0.1;
  const auto ds = generate_synthetic(c);
  double rows = 0, both = 0;
  for (const auto& t : ds.trials)
    for (const auto& s : t.samples) {
      rows += 1;
      both += (s.left.validity == 4 && s.right.validity == 4) ? 1 : 0;
    }
  const auto [lo, hi] = oracle::binomial_interval99(rows, c.invalid_rate);
  EXPECT_GE(both, lo);
  EXPECT_LE(both, hi);
}

TEST(Generator, NoClassDifferenceAtZeroSeparability) {
  SynthConfig c;
  c.n_users = 20;
  c.trials_per_user = 20;
  c.confusion_rate = 0.3;
  c.separability = 0;
  c.seed = 5;
  const auto ds = generate_synthetic(c);
  // per-trial feature means, centred on their user's mean so the shared
  // per-user offsets do not inflate the class difference
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (f % kFeaturesPerEye == kNumericPerEye) continue;
    std::vector<std::pair<std::string, std::pair<int, double>>> trials;
    std::map<std::string, std::pair<double, int>> user_sum;
    for (const auto& t : ds.trials) {
      double sum = 0;
      int n = 0;
      for (const auto& s : t.samples) {
        const auto& eye = f < kFeaturesPerEye ? s.left : s.right;
        if (!eye.valid()) continue;
        sum += numeric_values(eye)[f % kFeaturesPerEye];
        ++n;
      }
      if (!n) continue;
      trials.push_back({t.user_id, {t.label == Label::confused, sum / n}});
      user_sum[t.user_id].first += sum / n;
      user_sum[t.user_id].second += 1;
    }
    std::vector<double> per_class[2];
    for (const auto& [user, lv] : trials) {
      const auto& [total, count] = user_sum[user];
      per_class[lv.first].push_back(lv.second - total / count);
    }
    auto stats = [](const std::vector<double>& v) {
      double m = 0, ss = 0;
      for (double x : v) m += x;
      m /= v.size();
      for (double x : v) ss += (x - m) * (x - m);
      return std::pair{m, ss / (v.size() - 1) / v.size()};
    };
    const auto [m0, v0] = stats(per_class[0]);
    const auto [m1, v1] = stats(per_class[1]);
    EXPECT_LT(std::abs(m0 - m1), 3 * std::sqrt(v0 + v1)) << kFeatureNames[f];
  }
}

TEST(Generator, SeparabilityShiftsEveryDynamic) {
  const auto zero = class_dynamics(Label::confused, 0.0);
  const auto base = class_dynamics(Label::not_confused, 0.7);
  EXPECT_EQ(zero.fixation_mean_ms, base.fixation_mean_ms);
  EXPECT_EQ(zero.saccade_mean_px, base.saccade_mean_px);
  EXPECT_EQ(zero.dilation_mm, base.dilation_mm);
  const auto conf = class_dynamics(Label::confused, 0.7);
  EXPECT_GT(conf.fixation_mean_ms, base.fixation_mean_ms);
  EXPECT_LT(conf.saccade_mean_px, base.saccade_mean_px);
  EXPECT_GT(conf.dilation_mm, base.dilation_mm);
}

TEST(SynthConfig, RejectsInvalidValues) {
  SynthConfig c;
  c.confusion_rate = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SynthConfig{};
  c.n_users = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SynthConfig{};
  c.sd_duration_s = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}
