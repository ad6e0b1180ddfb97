// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Arguments select a subset, e.g. "3 7".

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsmi/autodiff/ops.hpp"
#include "tsmi/check/gradcheck.hpp"
#include "tsmi/common/rng.hpp"
#include "tsmi/mi/benchmark.hpp"
#include "tsmi/mi/estimator.hpp"
#include "tsmi/reweight/weighting.hpp"
#include "tsmi/text/description.hpp"
#include "tsmi/text/embedding.hpp"
#include "tsmi/trainer/analysis.hpp"
#include "tsmi/trainer/study.hpp"

using namespace tsmi;
using ad::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kGradTol = 1e-4;
constexpr double kGradBudgetSeconds = 60.0;
constexpr std::size_t kToyMaxParameters = 30;
constexpr double kToyEta2 = 1e-4;
constexpr double kMiGapMin = 0.5;
constexpr double kMiBaselineTol = 0.1;
constexpr double kMiBudgetSeconds = 120.0;
constexpr std::size_t kReductionInstances = 100;
constexpr double kReductionTol = 1e-12;
constexpr double kDistributionTol = 1e-9;
constexpr std::size_t kAlphaDraws = 1000;
constexpr std::size_t kStudySeeds = 3;
constexpr double kStudyBudgetSeconds = 15.0 * 60.0;
constexpr double kCkaTol = 1e-9;
constexpr std::size_t kHygieneIterations = 50;

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void criterion1() {
  const auto t0 = Clock::now();
  const auto suite = check::run_gradcheck_suite(1);
  const double elapsed = seconds_since(t0);
  std::size_t failed = 0;
  for (const auto& c : suite.checks) {
    if (!(c.error < kGradTol)) ++failed;
  }
  const bool ok = failed == 0 && suite.max_error < kGradTol && elapsed < kGradBudgetSeconds && !suite.checks.empty();
  report(1, "gradient integrity", ok,
         fmt("%zu checks, %zu failed, max rel error %.3g (< %g), %.2f s (< %g s)", suite.checks.size(), failed,
             suite.max_error, kGradTol, elapsed, kGradBudgetSeconds));
}

void criterion2() {
  const auto toy = check::bilevel_toy(1, kToyEta2);
  const bool ok = toy.parameters <= kToyMaxParameters && toy.gradient_error < kGradTol &&
                  toy.loss_after < toy.loss_before;
  report(2, "bi-level oracle", ok,
         fmt("%zu parameters, outer gradient rel error %.3g (< %g), L_V %.12g -> %.12g at eta2 %g", toy.parameters,
             toy.gradient_error, kGradTol, toy.loss_before, toy.loss_after, kToyEta2));
}

void criterion3() {
  const auto t0 = Clock::now();
  const auto bench = mi::run_correlated_benchmark({});
  const double elapsed = seconds_since(t0);
  const double baseline = -2.0 * std::numbers::ln2;
  const double gap = bench.jsd_correlated - bench.jsd_independent;
  bool mine_zero = true;
  for (double c : {-3.0, 0.0, 0.7, 50.0, 1000.0}) {
    for (std::size_t n : {2u, 5u, 64u}) {
      const double v = mi::mine_from_scores(Tensor::full({n, n}, c)).item();
      if (v != 0.0) mine_zero = false;
    }
  }
  const bool ok = gap >= kMiGapMin && std::abs(bench.jsd_independent - baseline) <= kMiBaselineTol && mine_zero &&
                  elapsed < kMiBudgetSeconds;
  report(3, "MI estimator sanity", ok,
         fmt("correlated %.4f, independent %.4f (baseline %.4f +- %g), gap %.4f (>= %g), MINE constant = 0: %s, "
             "%.1f s (< %g s)",
             bench.jsd_correlated, bench.jsd_independent, baseline, kMiBaselineTol, gap, kMiGapMin,
             mine_zero ? "yes" : "no", elapsed, kMiBudgetSeconds));
}

Tensor normal_tensor(Rng& rng, ad::Shape shape, double scale) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return Tensor::constant(std::move(shape), std::move(v));
}

void criterion4() {
  Rng rng(404);
  double max_reduction = 0.0, max_p = 0.0, max_hat = 0.0;
  for (std::size_t k = 0; k < kReductionInstances; ++k) {
    const std::size_t n = 2 + rng.index(31), d = 1 + rng.index(8), dim_l = 1 + rng.index(24);
    const auto beta = mi::init_discriminator(d, dim_l, rng.next_u64());
    const Tensor h_m = normal_tensor(rng, {n, d}, 1.5);
    const Tensor h_l = normal_tensor(rng, {n, dim_l}, 1.5);
    const double plain = mi::jsd_mi(beta, h_m, h_l).item();
    const double weighted = mi::weighted_jsd_mi(beta, h_m, h_l, mi::WeightDistribution::uniform(n)).item();
    max_reduction = std::max(max_reduction, std::abs(plain - weighted));

    std::vector<double> p(n);
    double total = 0.0;
    for (double& x : p) total += (x = rng.uniform(0.01, 1.0));
    for (double& x : p) x /= total;
    const auto dist = mi::WeightDistribution::from_probabilities(Tensor::constant({n}, p));
    double p_sum = 0.0, hat_sum = 0.0;
    for (double x : dist.p.values()) p_sum += x;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) hat_sum += dist.p_hat[i * n + j];
      }
    }
    max_p = std::max(max_p, std::abs(p_sum - 1.0));
    max_hat = std::max(max_hat, std::abs(hat_sum - 1.0));
  }
  const bool ok = max_reduction <= kReductionTol && max_p <= kDistributionTol && max_hat <= kDistributionTol;
  report(4, "weighted-MI reduction", ok,
         fmt("%zu instances, max |uniform weighted - plain| %.3g (<= %g), max |sum p - 1| %.3g, max |sum p_hat - 1| "
             "%.3g (<= %g)",
             kReductionInstances, max_reduction, kReductionTol, max_p, max_hat, kDistributionTol));
}

// Latent layer in U(+-1/sqrt(hidden)), every other entry in U(+-1).
ad::ParameterSet random_alpha(Rng& rng) {
  const std::size_t hidden = reweight::kHiddenSize;
  const auto base = reweight::init_weighting_net(rng.next_u64());
  std::vector<Tensor> ts;
  for (const auto& t : base.tensors()) {
    const double bound = t.shape() == ad::Shape{hidden, 1} ? 1.0 / std::sqrt(double(hidden)) : 1.0;
    std::vector<double> v(t.numel());
    for (double& x : v) x = rng.uniform(-bound, bound);
    ts.push_back(Tensor::leaf(t.shape(), std::move(v)));
  }
  return base.with_tensors(ts);
}

void criterion5() {
  Rng rng(505);
  std::size_t sign = 0, range = 0, coupling = 0;
  for (std::size_t k = 0; k < kAlphaDraws; ++k) {
    const auto alpha = random_alpha(rng);
    if (!(reweight::m_o(alpha).item() > 0.0)) ++sign;
    if (!(reweight::m_i(alpha).item() < 0.0)) ++sign;
    const double a = rng.uniform(0.0, 5.0), b = rng.uniform(0.0, 5.0);
    const auto w = reweight::weighting_forward(alpha, Tensor::constant({2}, {a, b}));
    for (std::size_t i = 0; i < 2; ++i) {
      for (double v : {w.omega_o[i], w.omega_i[i]}) {
        if (!(v > 0.0 && v < 1.0)) ++range;
      }
    }
    if ((w.omega_o[0] - w.omega_o[1]) * (w.omega_i[0] - w.omega_i[1]) > 0.0) ++coupling;
  }
  report(5, "reweighting structure", sign + range + coupling == 0,
         fmt("%zu draws; violations: sign %zu, range %zu, anti-coupling %zu", kAlphaDraws, sign, range, coupling));
}

void criterion6() {
  const auto t0 = Clock::now();
  const auto cfg = trainer::synthetic_study_defaults();
  double full = 0.0, backbone = 0.0, no_reweight = 0.0;
  std::string per_seed;
  bool all_ok = true;
  for (std::uint64_t seed = 1; seed <= kStudySeeds; ++seed) {
    const auto f = trainer::run_study(cfg, trainer::Variant::kFull, seed);
    const auto b = trainer::run_study(cfg, trainer::Variant::kBackboneOnly, seed);
    const auto r = trainer::run_study(cfg, trainer::Variant::kNoReweight, seed);
    for (const auto* run : {&f, &b, &r}) all_ok = all_ok && run->result.report.status == "ok";
    full += f.test.mse / kStudySeeds;
    backbone += b.test.mse / kStudySeeds;
    no_reweight += r.test.mse / kStudySeeds;
    per_seed += fmt(" seed %llu: full %.4f, backbone_only %.4f, no_reweight %.4f;", (unsigned long long)seed,
                    f.test.mse, b.test.mse, r.test.mse);
    std::fprintf(stderr, "study%s\n", per_seed.c_str());
  }
  const double elapsed = seconds_since(t0);
  const bool ok = all_ok && full < backbone && no_reweight <= backbone && elapsed < kStudyBudgetSeconds;
  report(6, "synthetic case study", ok,
         fmt("mean test MSE full %.4f, backbone_only %.4f, no_reweight %.4f (need full < backbone_only and "
             "no_reweight <= backbone_only), %.0f s (< %g s);",
             full, backbone, no_reweight, elapsed, kStudyBudgetSeconds) +
             per_seed);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion7() {
  text::TemplateConfig cfg;
  cfg.task_description = "Hourly load of a feeder";
  const std::vector<double> w{1.5, -2.25, 0.0, 3.125, 0.5, -0.00004, 2.0, 1.0, -1.75, 0.25};
  const auto d = text::render_description(w, cfg);
  const std::string golden =
      "Hourly load of a feeder. The content is: 1.5000, -2.2500, 0.0000, 3.1250, 0.5000, 0.0000, 2.0000, 1.0000, "
      "-1.7500, 0.2500. Input statistics: min value -2.2500, max value 3.1250, median value 0.3750, top 5 lags "
      "[3, 4, 1, 2, 5].";
  const bool golden_ok = d.text == golden && text::key_hex(d.key) == "627e38afad191c3b";

  Rng rng(707);
  text::EmbeddingTable table(4096);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> v(4096);
    for (double& x : v) x = rng.normal();
    table.insert(rng.next_u64(), v);
  }
  const auto path = std::filesystem::temp_directory_path() / "tsmi_acceptance.ltse";
  text::write_embedding_file(table, path);
  const auto bytes = slurp(path);
  const auto loaded = text::load_embedding_file(path);
  text::write_embedding_file(loaded, path);
  const bool round_trip = loaded == table && slurp(path) == bytes && bytes.size() == 16 + 10 * (8 + 4096 * 4);
  std::filesystem::remove(path);

  std::vector<double> sine(96);
  for (std::size_t t = 0; t < sine.size(); ++t) sine[t] = std::sin(2.0 * std::numbers::pi * double(t) / 24.0);
  const auto lags = text::compute_lags(sine, 5);
  const bool lag_ok = !lags.lags.empty() && lags.lags.front() == 24;

  report(7, "template and formats", golden_ok && round_trip && lag_ok,
         fmt("golden bytes %s, LTSE round trip bit-exact %s, period-24 sine top lag %zu", golden_ok ? "match" : "DIFFER",
             round_trip ? "yes" : "no", lags.lags.empty() ? 0 : lags.lags.front()));
}

void criterion8() {
  Rng rng(808);
  const std::size_t n = 50, d = 6;
  const Tensor x = normal_tensor(rng, {n, d}, 1.0);
  Eigen::MatrixXd g(d, d);
  for (std::size_t i = 0; i < d * d; ++i) g.data()[i] = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  std::vector<double> xq(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += x[r * d + k] * q(k, c);
      xq[r * d + c] = s;
    }
  }
  const double self = trainer::cka_linear(x, x);
  const double rotated = trainer::cka_linear(x, Tensor::constant({n, d}, xq));
  const double scaled = trainer::cka_linear(x, ad::scale(x, 2.0));
  const Tensor y = normal_tensor(rng, {n, 4}, 1.0);
  const double base = trainer::cka_linear(x, y);
  const double base_inv = trainer::cka_linear(Tensor::constant({n, d}, xq), ad::scale(y, 3.5));
  const double err = std::max({std::abs(self - 1.0), std::abs(rotated - 1.0), std::abs(scaled - 1.0),
                               std::abs(base - base_inv)});
  report(8, "CKA invariances", err <= kCkaTol,
         fmt("CKA(X,X) %.15f, CKA(X,XQ) %.15f, CKA(X,2X) %.15f, |CKA(X,Y) - CKA(XQ,3.5Y)| %.3g; max deviation %.3g "
             "(<= %g)",
             self, rotated, scaled, std::abs(base - base_inv), err, kCkaTol));
}

void criterion9() {
  auto cfg = trainer::synthetic_study_defaults();
  cfg.train.iterations = kHygieneIterations;
  const auto data = trainer::make_study_data(cfg, 9);
  trainer::TextSource text{text::TextEmbedder::fallback(cfg.text_dim, 9), {}};
  std::size_t disc = 0, outer = 0, disc_bad = 0, outer_bad = 0;
  trainer::train(cfg.train, data.train, text, [&](const trainer::StageEvent& e) {
    if (e.stage == trainer::Stage::kDiscriminator) {
      ++disc;
      if (e.theta_before != e.theta_after) ++disc_bad;
    } else if (e.stage == trainer::Stage::kOuter) {
      ++outer;
      if (e.theta_before != e.theta_after || e.beta_before != e.beta_after) ++outer_bad;
    }
  });
  const bool ok = disc == kHygieneIterations && outer == kHygieneIterations && disc_bad == 0 && outer_bad == 0;
  report(9, "training-loop hygiene", ok,
         fmt("%zu discriminator steps (%zu changed theta), %zu outer steps (%zu changed theta or beta)", disc,
             disc_bad, outer, outer_bad));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto want = [&](int id) { return only.empty() || only.count(id) > 0; };
  void (*const criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                criterion6, criterion7, criterion8, criterion9};
  for (int id = 1; id <= 9; ++id) {
    if (!want(id)) continue;
    try {
      criteria[id - 1]();
    } catch (const std::exception& e) {
      report(id, "criterion", false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
