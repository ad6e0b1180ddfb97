// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "tsmi/common/rng.hpp"
#include "tsmi/text/description.hpp"
#include "tsmi/text/embedding.hpp"

using namespace tsmi;
using namespace tsmi::text;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(std::size_t n, double period) {
  std::vector<double> v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = std::sin(2 * kPi * t / period);
  return v;
}

// Direct O(L^2) circular autocorrelation of the mean-removed series.
std::vector<double> brute_autocorr(const std::vector<double>& s) {
  const std::size_t l = s.size();
  double m = 0;
  for (double v : s) m += v;
  m /= static_cast<double>(l);
  std::vector<double> r(l / 2 + 1, 0.0);
  for (std::size_t lag = 0; lag <= l / 2; ++lag)
    for (std::size_t t = 0; t < l; ++t) r[lag] += (s[t] - m) * (s[(t + lag) % l] - m);
  return r;
}

std::filesystem::path temp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tsmi_text_test_" + name);
}

EmbeddingTable sample_table(std::uint32_t dim, std::size_t count) {
  EmbeddingTable t(dim);
  for (std::size_t i = 0; i < count; ++i) {
    auto d = Description::of("entry " + std::to_string(i));
    t.insert(d.key, fallback_embed(d, dim, 3));
  }
  return t;
}

}  // namespace

TEST(Keys, FnvReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(key_hex(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
  EXPECT_EQ(key_hex(1), "0000000000000001");
  EXPECT_EQ(parse_key_hex("af63dc4c8601ec8c"), 0xaf63dc4c8601ec8cULL);
  EXPECT_THROW(parse_key_hex("AF63DC4C8601EC8C"), std::invalid_argument);
}

TEST(Format, FixedPointAndNegativeZero) {
  EXPECT_EQ(format_fixed(1.0, 4), "1.0000");
  EXPECT_EQ(format_fixed(-0.00004, 4), "0.0000");
  EXPECT_EQ(format_fixed(-2.5, 1), "-2.5");
  EXPECT_EQ(format_fixed(1e20, 2), "100000000000000000000.00");
  EXPECT_EQ(format_fixed(3.14159, 0), "3");
}

TEST(Lags, PeriodicSinesPickThePeriod) {
  EXPECT_EQ(compute_lags(sine(480, 24), 1).lags, (std::vector<std::size_t>{24}));
  EXPECT_EQ(compute_lags(sine(96, 24), 1).lags, (std::vector<std::size_t>{24}));
  EXPECT_FALSE(compute_lags(sine(96, 24), 1).degenerate);
}

TEST(Lags, MatchBruteForceOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s(40 + trial);
    for (double& v : s) v = rng.normal();
    const auto r = brute_autocorr(s);
    std::vector<std::size_t> order;
    for (std::size_t lag = 1; lag < r.size(); ++lag) order.push_back(lag);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r[a] > r[b]; });
    order.resize(5);
    EXPECT_EQ(compute_lags(s, 5).lags, order);
  }
}

TEST(Lags, ConstantIsDegenerate) {
  const auto res = compute_lags(std::vector<double>(20, 0.1), 5);
  EXPECT_TRUE(res.degenerate);
  EXPECT_EQ(res.lags, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  EXPECT_THROW(compute_lags(std::vector<double>(9, 1.0), 5), std::invalid_argument);
}

TEST(Lags, WhiteNoiseDistinctInRange) {
  Rng rng(8);
  std::vector<double> s(480);
  for (double& v : s) v = rng.normal();
  const auto lags = compute_lags(s, 5).lags;
  EXPECT_EQ(std::set<std::size_t>(lags.begin(), lags.end()).size(), 5u);
  for (auto l : lags) {
    EXPECT_GE(l, 1u);
    EXPECT_LE(l, 240u);
  }
}

TEST(Lags, InvariantToShiftAndPositiveScale) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(64), t(64);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.normal();
      t[i] = 2.0 * s[i] + 7.0;
    }
    EXPECT_EQ(compute_lags(s, 5).lags, compute_lags(t, 5).lags);
  }
}

TEST(Render, GoldenBytes) {
  TemplateConfig cfg;
  cfg.task_description = "Hourly load of a feeder";
  const std::vector<double> w{1.5, -2.25, 0.0, 3.125, 0.5, -0.00004, 2.0, 1.0, -1.75, 0.25};
  const auto d = render_description(w, cfg);
  EXPECT_EQ(d.text,
            "Hourly load of a feeder. The content is: 1.5000, -2.2500, 0.0000, 3.1250, 0.5000, "
            "0.0000, 2.0000, 1.0000, -1.7500, 0.2500. Input statistics: min value -2.2500, max "
            "value 3.1250, median value 0.3750, top 5 lags [3, 4, 1, 2, 5].");
  EXPECT_EQ(key_hex(d.key), "627e38afad191c3b");
}

TEST(Render, StatsClauseWithoutLags) {
  TemplateConfig cfg;
  cfg.include_lags = false;
  const auto d = render_description(std::vector<double>{1.0, 2.0, 3.0}, cfg);
  EXPECT_NE(d.text.find("min value 1.0000, max value 3.0000, median value 2.0000"), std::string::npos);
  EXPECT_EQ(d.text.find("lags"), std::string::npos);
}

TEST(Render, FlagsDropClauses) {
  const std::vector<double> w{1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0, 6.0, 0.0, 9.0};
  TemplateConfig cfg;
  cfg.task_description = "Demo";
  cfg.include_content = cfg.include_stats = cfg.include_min_max_median = cfg.include_lags = false;
  EXPECT_EQ(render_description(w, cfg).text, "Demo.");

  cfg.include_stats = true;  // no clause enabled inside it
  EXPECT_EQ(render_description(w, cfg).text, "Demo.");

  cfg.include_lags = true;
  cfg.lag_count = 1;
  EXPECT_EQ(render_description(w, cfg).text.rfind("Demo. Input statistics: top 1 lags [", 0), 0u);

  TemplateConfig raw;  // raw values only
  raw.task_description = "Demo";
  raw.use_template = false;
  EXPECT_EQ(render_description(std::vector<double>{1.0, -2.0}, raw).text, "1.0000, -2.0000");
  EXPECT_THROW(render_description(std::vector<double>{1.0, NAN}, raw), std::invalid_argument);
}

TEST(Render, PureAndMultichannel) {
  TemplateConfig cfg;
  std::vector<double> w(24);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(0.3 * i);
  EXPECT_EQ(render_description(w, cfg).key, render_description(w, cfg).key);
  EXPECT_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);

  std::vector<double> two(24 * 2);
  for (std::size_t t = 0; t < 24; ++t) {
    two[t * 2] = w[t];
    two[t * 2 + 1] = -w[t];
  }
  const auto ds = describe_window(two, 2, cfg);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].key, render_description(w, cfg).key);
  EXPECT_NE(ds[0].key, ds[1].key);
}

TEST(Fallback, DeterministicUnitNorm) {
  const auto d = Description::of("some text");
  const auto a = fallback_embed(d, 4096, 1);
  EXPECT_EQ(a, fallback_embed(d, 4096, 1));
  EXPECT_NE(a, fallback_embed(d, 4096, 2));
  double n = 0;
  for (double v : a) n += v * v;
  EXPECT_NEAR(std::sqrt(n), 1.0, 1e-12);
}

TEST(Fallback, DifferentTextsNearlyOrthogonal) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto a = fallback_embed(Description::of("left " + std::to_string(i)), 4096, 0);
    const auto b = fallback_embed(Description::of("right " + std::to_string(i)), 4096, 0);
    double dot = 0;
    for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
    worst = std::max(worst, std::abs(dot));
  }
  EXPECT_LT(worst, 0.2);
}

TEST(EmbeddingFile, RoundTripBitExactAndSize) {
  const auto table = sample_table(4096, 10);
  const auto path = temp("ten.ltse");
  write_embedding_file(table, path);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 10u * (8u + 4096u * 4u));
  EXPECT_TRUE(load_embedding_file(path) == table);

  const auto one = sample_table(3, 1);
  write_embedding_file(one, path);
  const auto back = load_embedding_file(path);
  EXPECT_TRUE(back == one);
  EXPECT_EQ(back.dim(), 3u);
  EXPECT_THROW(write_embedding_file(EmbeddingTable(3), path), std::invalid_argument);
}

TEST(EmbeddingFile, StructuredErrors) {
  using Kind = FormatError::Kind;
  auto expect_kind = [](const std::filesystem::path& p, Kind kind) {
    try {
      load_embedding_file(p);
      ADD_FAILURE() << "no error";
    } catch (const FormatError& e) {
      EXPECT_EQ(e.kind(), kind) << e.what();
    }
  };
  const auto path = temp("bad.ltse");
  std::ofstream(path, std::ios::binary).close();
  expect_kind(path, Kind::kBadMagic);

  write_embedding_file(sample_table(4, 2), path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto rewrite = [&](std::string b) { std::ofstream(path, std::ios::binary) << b; };

  auto v2 = bytes;
  v2[4] = 2;
  rewrite(v2);
  expect_kind(path, Kind::kVersionMismatch);

  rewrite(bytes.substr(0, bytes.size() - 3));
  expect_kind(path, Kind::kTruncated);

  auto dup = bytes;  // second record's key := first record's key
  std::copy(bytes.begin() + 16, bytes.begin() + 24, dup.begin() + 16 + 8 + 16);
  rewrite(dup);
  expect_kind(path, Kind::kDuplicateKey);
  EXPECT_THROW(load_embedding_file(temp("missing.ltse")), data::IoError);
}

TEST(Embedder, TableLookupMissingKeyAndChannelMean) {
  auto a = Description::of("alpha"), b = Description::of("beta");
  EmbeddingTable table(2);
  table.insert(a.key, std::vector<double>{3.0, 4.0});
  table.insert(b.key, std::vector<double>{0.0, 2.0});
  EXPECT_FALSE(table.insert(a.key, std::vector<double>{1.0, 1.0}));
  const auto e = TextEmbedder::from_table(table);
  const auto h = e.embed_windows({{a, b}, {b}});
  EXPECT_DOUBLE_EQ(h[0], 0.3);
  EXPECT_DOUBLE_EQ(h[1], 0.9);
  EXPECT_DOUBLE_EQ(h[3], 1.0);
  try {
    e.embed(Description::of("gamma"));
    FAIL();
  } catch (const MissingKeyError& err) {
    EXPECT_NE(std::string(err.what()).find(key_hex(fnv1a64("gamma"))), std::string::npos);
  }
  const auto raw = TextEmbedder::from_table(table, false);
  EXPECT_EQ(raw.embed(a)[0], 3.0);
}

TEST(Descriptions, JsonlRoundTrip) {
  std::vector<Description> ds{Description::of("plain"), Description::of("quote \" and\nnewline")};
  const auto path = temp("desc.jsonl");
  write_descriptions(ds, path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "{\"key\":\"" + key_hex(ds[0].key) + "\",\"text\":\"plain\"}");
  const auto back = read_descriptions(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].text, ds[1].text);
  EXPECT_EQ(back[1].key, ds[1].key);

  std::ofstream(path) << "{\"key\":\"0000000000000000\",\"text\":\"x\"}\n";
  EXPECT_THROW(read_descriptions(path), data::DataError);
}
