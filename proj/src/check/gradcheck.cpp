// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/check/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "tsmi/autodiff/grad.hpp"
#include "tsmi/autodiff/ops.hpp"
#include "tsmi/backbone/backbone.hpp"
#include "tsmi/common/rng.hpp"
#include "tsmi/mi/estimator.hpp"
#include "tsmi/reweight/weighting.hpp"

namespace tsmi::check {
namespace {

using ad::Tensor;
using Fn = std::function<Tensor(std::span<const Tensor>)>;

constexpr double kStep = 1e-5;

Tensor randn(Rng& rng, ad::Shape shape, double scale = 1.0, double offset = 0.0) {
  std::vector<double> v(ad::element_count(shape));
  for (double& x : v) x = offset + scale * rng.normal();
  return Tensor::leaf(std::move(shape), std::move(v));
}

// Entries bounded away from zero, for relu kinks, log and division.
Tensor away_from_zero(Rng& rng, ad::Shape shape, double lo, double hi, bool allow_negative) {
  std::vector<double> v(ad::element_count(shape));
  for (double& x : v) {
    x = rng.uniform(lo, hi);
    if (allow_negative && rng.uniform() < 0.5) x = -x;
  }
  return Tensor::leaf(std::move(shape), std::move(v));
}

std::size_t count(std::span<const Tensor> ts) {
  std::size_t n = 0;
  for (const auto& t : ts) n += t.numel();
  return n;
}

struct Primitive {
  std::string name;
  Fn op;  // any output shape
  std::vector<Tensor> point;
};

std::vector<Primitive> primitives(Rng& rng) {
  using S = std::span<const Tensor>;
  std::vector<Primitive> p;
  const auto a = [&] { return randn(rng, {3, 4}); };
  const auto row = [&] { return randn(rng, {4}); };
  p.push_back({"add", [](S x) { return x[0] + x[1]; }, {a(), row()}});
  p.push_back({"sub", [](S x) { return x[0] - x[1]; }, {a(), randn(rng, {3, 1})}});
  p.push_back({"mul", [](S x) { return x[0] * x[1]; }, {a(), row()}});
  p.push_back({"div", [](S x) { return x[0] / x[1]; }, {a(), away_from_zero(rng, {3, 4}, 0.5, 2.0, true)}});
  p.push_back({"neg", [](S x) { return -x[0]; }, {a()}});
  p.push_back({"scale", [](S x) { return x[0] * 2.5; }, {a()}});
  p.push_back({"add_scalar", [](S x) { return x[0] + 1.5; }, {a()}});
  p.push_back({"square", [](S x) { return ad::square(x[0]); }, {a()}});
  p.push_back({"exp", [](S x) { return ad::exp(x[0]); }, {a()}});
  p.push_back({"log", [](S x) { return ad::log(x[0]); }, {away_from_zero(rng, {3, 4}, 0.5, 3.0, false)}});
  p.push_back({"sigmoid", [](S x) { return ad::sigmoid(x[0]); }, {randn(rng, {3, 4}, 2.0)}});
  p.push_back({"softplus", [](S x) { return ad::softplus(x[0]); }, {randn(rng, {3, 4}, 3.0)}});
  p.push_back({"tanh", [](S x) { return ad::tanh(x[0]); }, {a()}});
  p.push_back({"relu", [](S x) { return ad::relu(x[0]); }, {away_from_zero(rng, {3, 4}, 0.1, 2.0, true)}});
  p.push_back({"matmul", [](S x) { return ad::matmul(x[0], x[1]); }, {randn(rng, {2, 3, 4}), randn(rng, {4, 5})}});
  for (int ta = 0; ta < 2; ++ta) {
    for (int tb = 0; tb < 2; ++tb) {
      const ad::Shape sa = ta ? ad::Shape{4, 3} : ad::Shape{3, 4};
      const ad::Shape sb = tb ? ad::Shape{5, 4} : ad::Shape{4, 5};
      p.push_back({"gemm(" + std::to_string(ta) + "," + std::to_string(tb) + ")",
                   [ta, tb](S x) { return ad::gemm(x[0], x[1], ta, tb); },
                   {randn(rng, sa), randn(rng, sb)}});
    }
  }
  p.push_back({"gemm(batched)", [](S x) { return ad::gemm(x[0], x[1], false, true); },
               {randn(rng, {2, 3, 4}), randn(rng, {5, 4})}});
  p.push_back({"transpose", [](S x) { return ad::transpose(x[0]); }, {randn(rng, {2, 3, 4})}});
  p.push_back({"reshape", [](S x) { return ad::reshape(x[0], {4, 3}); }, {a()}});
  p.push_back({"sum", [](S x) { return ad::sum(ad::square(x[0])); }, {a()}});
  p.push_back({"sum(axis)", [](S x) { return ad::sum(x[0], 1, false); }, {randn(rng, {2, 3, 4})}});
  p.push_back({"mean", [](S x) { return ad::mean(ad::square(x[0])); }, {a()}});
  p.push_back({"mean(axis)", [](S x) { return ad::mean(x[0], 0, true); }, {randn(rng, {2, 3, 4})}});
  p.push_back({"broadcast_to", [](S x) { return ad::broadcast_to(x[0], {2, 3, 4}); }, {randn(rng, {3, 1})}});
  p.push_back({"sum_to", [](S x) { return ad::sum_to(x[0], {3, 1}); }, {randn(rng, {2, 3, 4})}});
  p.push_back({"slice", [](S x) { return ad::slice(x[0], 1, 1, 2); }, {a()}});
  p.push_back({"pad", [](S x) { return ad::pad(x[0], 1, 2, 1); }, {a()}});
  p.push_back({"concat", [](S x) { return ad::concat(x, 1); }, {a(), randn(rng, {3, 2})}});
  p.push_back({"gather", [](S x) { return ad::gather(x[0], 0, std::vector<std::size_t>{2, 0, 2, 1}); }, {a()}});
  p.push_back({"scatter_add",
               [](S x) { return ad::scatter_add(x[0], 0, std::vector<std::size_t>{1, 1, 3}, 5); },
               {a()}});
  p.push_back({"softmax", [](S x) { return ad::softmax(x[0]); }, {randn(rng, {3, 4}, 2.0)}});
  return p;
}

// Weights the output with a fixed random tensor so every output entry counts.
Fn scalarize(const Fn& op, std::span<const Tensor> point, Rng& rng) {
  const Tensor probe = op(point);
  std::vector<double> w(probe.numel());
  for (double& v : w) v = rng.normal();
  const Tensor weights = Tensor::constant(probe.shape(), std::move(w));
  return [op, weights](std::span<const Tensor> x) { return ad::sum(op(x) * weights); };
}

// <grad f(x), v>, whose gradient is the Hessian-vector product.
Fn directional_gradient(const Fn& f, std::span<const Tensor> point, Rng& rng) {
  std::vector<Tensor> dirs;
  for (const auto& t : point) {
    std::vector<double> v(t.numel());
    for (double& e : v) e = rng.normal();
    dirs.push_back(Tensor::constant(t.shape(), std::move(v)));
  }
  return [f, dirs](std::span<const Tensor> x) {
    const auto g = ad::grad(f(x), x, {.create_graph = true});
    Tensor total = Tensor::scalar(0.0);
    for (std::size_t i = 0; i < g.size(); ++i) total = total + ad::sum(g[i] * dirs[i]);
    return total;
  };
}

struct Pipeline {
  backbone::BackboneConfig config;
  data::TimeSeriesBatch batch;
  ad::ParameterSet theta, beta, alpha;
  Tensor h_l;
  Tensor weight_input;
};

Pipeline tiny_pipeline(std::uint64_t seed) {
  constexpr std::size_t kN = 4, kL = 8, kH = 4, kD = 8, kText = 16;
  Rng rng(mix_seed(seed, 0x7069706eULL));
  Pipeline p;
  p.config.kind = backbone::Kind::kLinear;
  p.config.input_length = kL;
  p.config.horizon = kH;
  p.config.d_model = kD;
  p.theta = backbone::init_backbone(p.config, seed);
  p.beta = mi::init_discriminator(kD, kText, seed + 1);
  p.alpha = reweight::init_weighting_net(seed + 2);
  std::vector<Tensor> a(p.alpha.tensors().begin(), p.alpha.tensors().end());
  a[2] = randn(rng, {reweight::kHiddenSize, 1}, 0.1);
  a[3] = randn(rng, {1}, 0.1);
  a[4] = randn(rng, {1}, 0.3);
  a[5] = randn(rng, {1}, 0.3);
  p.alpha = p.alpha.with_tensors(a);
  p.batch.x = randn(rng, {kN, kL, 1}).detach();
  p.batch.y = randn(rng, {kN, kH, 1}).detach();
  p.batch.starts = {0, 1, 2, 3};
  p.h_l = randn(rng, {kN, kText}).detach();
  const auto base = reweight::compute_objective(p.theta, p.beta, p.alpha, p.config, p.batch, p.h_l, {});
  p.weight_input = base.sample_losses.detach();
  return p;
}

}  // namespace

std::vector<CheckResult> primitive_checks(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x7072696dULL));
  std::vector<CheckResult> out;
  for (auto& prim : primitives(rng)) {
    const Fn f = scalarize(prim.op, prim.point, rng);
    out.push_back({prim.name, ad::finite_difference_check(f, prim.point, kStep), count(prim.point)});
    const Fn second = directional_gradient(f, prim.point, rng);
    out.push_back({prim.name + " (second order)", ad::finite_difference_check(second, prim.point, kStep),
                   count(prim.point)});
  }
  return out;
}

std::vector<CheckResult> pipeline_checks(std::uint64_t seed) {
  const Pipeline p = tiny_pipeline(seed);
  const auto loss = [&p](const ad::ParameterSet& theta, const ad::ParameterSet& beta,
                         const ad::ParameterSet& alpha) {
    return reweight::compute_objective(theta, beta, alpha, p.config, p.batch, p.h_l, {}, p.weight_input).loss;
  };
  std::vector<CheckResult> out;
  const auto group = [&](const std::string& name, const ad::ParameterSet& set,
                         const std::function<Tensor(const ad::ParameterSet&)>& fn) {
    const Fn f = [&](std::span<const Tensor> x) { return fn(set.with_tensors({x.begin(), x.end()})); };
    out.push_back({"composite loss / " + name, ad::finite_difference_check(f, set.tensors(), kStep),
                   set.parameter_count()});
  };
  group("theta", p.theta, [&](const ad::ParameterSet& s) { return loss(s, p.beta, p.alpha); });
  group("beta", p.beta, [&](const ad::ParameterSet& s) { return loss(p.theta, s, p.alpha); });
  group("alpha", p.alpha, [&](const ad::ParameterSet& s) { return loss(p.theta, p.beta, s); });
  return out;
}

BilevelToy bilevel_toy(std::uint64_t seed, double eta2) {
  constexpr std::size_t kN = 4;
  constexpr double kEta1 = 0.1;
  Rng rng(mix_seed(seed, 0x746f7921ULL));
  const Tensor x = randn(rng, {kN, 2}).detach();
  const Tensor y = randn(rng, {kN}).detach();
  const Tensor u = randn(rng, {1, kN}).detach();
  const Tensor xv = randn(rng, {kN, 2}).detach();
  const Tensor yv = randn(rng, {kN}).detach();

  ad::ParameterSet theta;
  theta.add("w", randn(rng, {2, 1}));
  theta.add("b", randn(rng, {1}));
  auto alpha = reweight::init_weighting_net(seed, 3);
  std::vector<Tensor> a;
  for (const auto& t : alpha.tensors()) a.push_back(randn(rng, t.shape(), 0.7));
  alpha = alpha.with_tensors(a);

  const auto losses = [&](const ad::ParameterSet& th, const Tensor& in, const Tensor& target) {
    const Tensor pred = ad::reshape(ad::matmul(in, th.get("w")), {kN}) + th.get("b");
    return ad::square(pred - target);
  };
  const Tensor weight_input = losses(theta, x, y).detach();

  // alpha -> L_V(theta_hat(alpha)) with fresh theta leaves each call.
  const auto outer = [&](const ad::ParameterSet& al) {
    const auto th = theta.as_leaves();
    const Tensor l = losses(th, x, y);
    const Tensor scores = ad::matmul(ad::reshape(ad::matmul(x, th.get("w")), {kN, 1}), u);
    const Tensor total = reweight::overall_loss(l, scores, reweight::weighting_forward(al, weight_input));
    return ad::mean(losses(reweight::virtual_step(th, total, kEta1), xv, yv));
  };

  BilevelToy out;
  out.parameters = theta.parameter_count() + alpha.parameter_count();
  const Fn f = [&](std::span<const Tensor> t) { return outer(alpha.with_tensors({t.begin(), t.end()})); };
  out.gradient_error = ad::finite_difference_check(f, alpha.tensors(), kStep);
  const auto leaves = alpha.as_leaves();
  const auto step = reweight::outer_update(leaves, outer(leaves), eta2);
  out.loss_before = step.validation_loss;
  out.loss_after = outer(step.alpha).item();
  return out;
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

SuiteReport run_gradcheck_suite(std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SuiteReport report;
  report.checks = primitive_checks(seed);
  for (auto& c : pipeline_checks(seed)) report.checks.push_back(std::move(c));
  const auto toy = bilevel_toy(seed, 1e-4);
  report.checks.push_back({"outer gradient (bi-level toy)", toy.gradient_error, toy.parameters});
  for (const auto& c : report.checks) report.max_error = std::max(report.max_error, c.error);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tsmi::check
