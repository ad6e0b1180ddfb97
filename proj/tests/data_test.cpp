// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tsmi/common/rng.hpp"
#include "tsmi/data/dataset.hpp"

using namespace tsmi;
using namespace tsmi::data;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& contents) {
  auto path = std::filesystem::temp_directory_path() / ("tsmi_data_test_" + name);
  std::ofstream(path) << contents;
  return path;
}

TimeSeriesDataset series(std::vector<double> values) {
  TimeSeriesDataset ds;
  ds.channel_names = {"v"};
  ds.values = std::move(values);
  return ds;
}

TimeSeriesDataset ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i) * 0.5 - 3.0;
  return series(std::move(v));
}

}  // namespace

TEST(LoadCsv, ThreeRowsTwoChannels) {
  auto path = write_temp("plain.csv", "a,b\n1,2\n3,4\n5,6\n");
  auto ds = load_csv(path, false);
  EXPECT_EQ(ds.length(), 3u);
  EXPECT_EQ(ds.channels(), 2u);
  EXPECT_EQ(ds.at(2, 1), 6.0);
}

TEST(LoadCsv, TimestampColumnExcluded) {
  auto path = write_temp("stamped.csv", "date,HUFL\n2016-07-01 00:00:00,5.827\n2016-07-01 01:00:00,5.693\n");
  auto ds = load_csv(path, true);
  EXPECT_EQ(ds.channels(), 1u);
  EXPECT_EQ(ds.channel_names[0], "HUFL");
  EXPECT_EQ(ds.timestamps.size(), 2u);
  EXPECT_DOUBLE_EQ(ds.at(1, 0), 5.693);
}

TEST(LoadCsv, UnparseableCellNamesRow) {
  auto path = write_temp("bad.csv", "x\n1\n2\n3\n4\nabc\n6\n");
  try {
    load_csv(path, false);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 5"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, RaggedRowsMissingFileAndNaN) {
  EXPECT_THROW(load_csv(write_temp("ragged.csv", "a,b\n1,2\n3\n"), false), DataError);
  EXPECT_THROW(load_csv("/nonexistent/tsmi.csv", false), IoError);
  EXPECT_THROW(load_csv(write_temp("nan.csv", "a\n1\nnan\n"), false), DataError);
}

TEST(LoadCsv, WriteReadRoundTrip) {
  auto ds = synth_generate({.length = 50, .seed = 3});
  auto path = std::filesystem::temp_directory_path() / "tsmi_data_test_roundtrip.csv";
  write_csv(ds, path);
  auto back = load_csv(path, false);
  ASSERT_EQ(back.values.size(), ds.values.size());
  for (std::size_t i = 0; i < ds.values.size(); ++i) EXPECT_EQ(back.values[i], ds.values[i]);
}

TEST(Windows, CountsFollowFormula) {
  EXPECT_EQ(make_windows(ramp(200), 96, 96, 1).size(), 9u);
  EXPECT_EQ(make_windows(ramp(192), 96, 96, 1).size(), 1u);
  EXPECT_EQ(make_windows(ramp(200), 10, 5, 7).size(), (200u - 15u) / 7u + 1u);
  try {
    make_windows(ramp(100), 96, 96, 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("192"), std::string::npos);
  }
}

TEST(Windows, TargetFollowsInputContiguously) {
  auto ds = ramp(40);
  for (const auto& w : make_windows(ds, 8, 4, 3)) {
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(w.x[i], ds.values[w.start + i]);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(w.y[i], ds.values[w.start + 8 + i]);
  }
}

TEST(Windows, StrideLWindowsReconstructSeries) {
  const std::size_t l = 12;
  auto ds = synth_generate({.length = 5 * l + l, .seed = 1});
  auto windows = make_windows(ds, l, l, l);
  std::vector<double> rebuilt;
  for (const auto& w : windows) rebuilt.insert(rebuilt.end(), w.x.begin(), w.x.end());
  rebuilt.insert(rebuilt.end(), windows.back().y.begin(), windows.back().y.end());
  EXPECT_EQ(rebuilt, ds.values);
}

TEST(Normalize, ConstantChannelGivesZerosAndWarning) {
  auto ds = series({5, 5, 5});
  auto stats = fit_normalization(ds);
  ASSERT_EQ(stats.warnings.size(), 1u);
  auto n = normalize(ds, stats);
  for (double v : n.values) EXPECT_EQ(v, 0.0);
}

TEST(Normalize, TrainRegionHasZeroMeanAndRoundTrips) {
  auto ds = synth_generate({.length = 1000, .seed = 9});
  auto parts = split_chronological(ds, {});
  auto stats = fit_normalization(parts.train);
  auto n = normalize(parts.train, stats);
  double m = 0.0;
  for (double v : n.values) m += v;
  EXPECT_LT(std::abs(m / static_cast<double>(n.values.size())), 1e-9);
  auto back = denormalize(normalize(ds, stats), stats);
  for (std::size_t i = 0; i < ds.values.size(); ++i) EXPECT_NEAR(back.values[i], ds.values[i], 1e-12);
}

TEST(Split, ChronologicalDefaultsAndValidation) {
  auto parts = split_chronological(ramp(1000), {});
  EXPECT_EQ(parts.train.length(), 700u);
  EXPECT_EQ(parts.validation.length(), 100u);
  EXPECT_EQ(parts.test.length(), 200u);
  EXPECT_EQ(parts.validation.values.front(), ramp(1000).values[700]);
  EXPECT_THROW(split_chronological(ramp(10), {.train = 0.5, .validation = 0.5, .test = 0.1}),
               DataError);
  EXPECT_THROW(split_chronological(ramp(10), {.train = 1.0, .validation = 0.0, .test = 0.0}),
               DataError);
}

TEST(Masking, ExactCountPerSampleAndChannel) {
  TimeSeriesDataset ds;
  ds.channel_names = {"a", "b"};
  auto one = synth_generate({.length = 300, .seed = 2});
  for (double v : one.values) {
    ds.values.push_back(v);
    ds.values.push_back(-v);
  }
  std::vector<std::size_t> starts{0, 10, 50, 100};
  auto batch = make_batch(ds, starts, 96, 0, Task::kImpute);
  for (double ratio : {0.125, 0.25, 0.375, 0.5}) {
    auto masked = mask_for_imputation(batch, ratio, 17);
    const auto expected = static_cast<std::size_t>(std::llround(ratio * 96));
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t c = 0; c < 2; ++c) {
        std::size_t count = 0;
        for (std::size_t t = 0; t < 96; ++t) {
          const std::size_t idx = (i * 96 + t) * 2 + c;
          if (masked.observed[idx] == 0.0) {
            ++count;
            EXPECT_EQ(masked.x[idx], 0.0);
          } else {
            EXPECT_EQ(masked.x[idx], batch.x[idx]);  // bit-exact
          }
          EXPECT_EQ(masked.y[idx], batch.x[idx]);
        }
        EXPECT_EQ(count, expected);
      }
  }
  EXPECT_EQ(static_cast<std::size_t>(std::llround(0.25 * 96)), 24u);
  EXPECT_EQ(static_cast<std::size_t>(std::llround(0.5 * 96)), 48u);
}

TEST(Masking, SameSeedSameMaskAndRatioBounds) {
  auto ds = synth_generate({.length = 200, .seed = 2});
  std::vector<std::size_t> starts{0, 5};
  auto batch = make_batch(ds, starts, 96, 0, Task::kImpute);
  auto a = mask_for_imputation(batch, 0.25, 5);
  auto b = mask_for_imputation(batch, 0.25, 5);
  auto c = mask_for_imputation(batch, 0.25, 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.observed.numel(); ++i) {
    EXPECT_EQ(a.observed[i], b.observed[i]);
    differs = differs || a.observed[i] != c.observed[i];
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(mask_for_imputation(batch, 0.0, 1), DataError);
  EXPECT_THROW(mask_for_imputation(batch, 1.0, 1), DataError);
}

TEST(Synth, DefaultsAtOriginWithoutNoise) {
  SynthParams p;
  p.noise = 0.0;
  p.length = 10;
  const double expected = 0.1 * std::sin(0.0) + 0.2 * std::sin(1.0) + 0.3 * std::sin(2.0) +
                          0.4 * std::sin(3.0);
  EXPECT_NEAR(synth_generate(p).values[0], expected, 1e-15);
  EXPECT_NEAR(expected, 0.497532, 1e-6);
}

TEST(Synth, SingleTermTestSeries) {
  auto p = SynthParams::test_defaults();
  p.noise = 0.0;
  p.length = 5;
  EXPECT_NEAR(synth_generate(p).values[0], 0.598472, 1e-6);
  EXPECT_EQ(synth_generate(p).values[0], std::sin(2.5));
}

TEST(Synth, NoiselessIsBoundedAndSeedIndependent) {
  SynthParams a;
  a.noise = 0.0;
  a.length = 2000;
  a.seed = 1;
  SynthParams b = a;
  b.seed = 99;
  auto va = synth_generate(a).values;
  EXPECT_EQ(va, synth_generate(b).values);
  for (double v : va) EXPECT_LE(std::abs(v), 1.0 + 1e-12);
  EXPECT_EQ(synth_generate(SynthParams{}).length(), 10000u);
}

TEST(Synth, MismatchedListsRejected) {
  SynthParams p;
  p.phases = {0.0};
  EXPECT_THROW(synth_generate(p), DataError);
}

TEST(Sampling, SeededUniformWithReplacement) {
  Rng a(4), b(4);
  auto s1 = sample_starts(10, 64, a);
  auto s2 = sample_starts(10, 64, b);
  EXPECT_EQ(s1, s2);
  for (auto s : s1) EXPECT_LT(s, 10u);
}
