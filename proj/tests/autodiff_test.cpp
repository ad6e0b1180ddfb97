// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <unordered_set>

#include "tsmi/autodiff/grad.hpp"
#include "tsmi/autodiff/ops.hpp"
#include "tsmi/autodiff/parameters.hpp"
#include "tsmi/common/rng.hpp"

using namespace tsmi;
using namespace tsmi::ad;

namespace {

Tensor random_leaf(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(element_count(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::leaf(std::move(shape), std::move(v));
}

Tensor random_const(Rng& rng, Shape shape) { return random_leaf(rng, std::move(shape)).detach(); }

using Fn = std::function<Tensor(std::span<const Tensor>)>;

}  // namespace

TEST(Primitives, AnalyticValues) {
  EXPECT_NEAR(softplus(Tensor::scalar(0.0)).item(), 0.693147, 1e-6);
  EXPECT_DOUBLE_EQ(softplus(Tensor::scalar(0.0)).item(), std::numbers::ln2);
  EXPECT_DOUBLE_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);

  auto x = Tensor::leaf({}, {0.0});
  auto g = grad(sigmoid(x), std::vector{x});
  EXPECT_DOUBLE_EQ(g[0].item(), 0.25);
}

TEST(Primitives, SoftplusIdentity) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform(-30, 30);
    const double lhs = softplus(Tensor::scalar(v)).item() - softplus(Tensor::scalar(-v)).item();
    EXPECT_NEAR(lhs, v, 1e-12 * std::max(1.0, std::abs(v)));
  }
}

TEST(Primitives, BroadcastMatchesManualLoop) {
  Rng rng(1);
  auto a = random_const(rng, {2, 3, 4});
  auto b = random_const(rng, {3, 1});
  auto c = add(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 3, 4}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        EXPECT_EQ(c[(i * 3 + j) * 4 + k], a[(i * 3 + j) * 4 + k] + b[j]);
}

TEST(Primitives, ShapeErrorNamesPrimitiveAndShapes) {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({4, 2});
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("matmul"), std::string::npos);
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos);
    EXPECT_NE(msg.find("[4, 2]"), std::string::npos);
  }
  EXPECT_THROW(add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), ShapeError);
  EXPECT_THROW(reshape(Tensor::zeros({2, 3}), {5}), ShapeError);
}

TEST(Primitives, MatmulGradientMatchesFiniteDifferences) {
  Rng rng(11);
  auto a = random_leaf(rng, {3, 4});
  auto b = random_leaf(rng, {4, 2});
  auto weights = random_const(rng, {3, 2});
  Fn f = [&](std::span<const Tensor> p) { return sum(mul(matmul(p[0], p[1]), weights)); };
  const std::vector<Tensor> point{a, b};
  EXPECT_LT(finite_difference_check(f, point, 1e-4), 1e-6);
}

TEST(Backward, SquareAtThree) {
  auto x = Tensor::leaf({}, {3.0});
  auto gm = backward(mul(x, x));
  EXPECT_DOUBLE_EQ(gm.at(x).item(), 6.0);
}

TEST(Backward, SecondDerivativeOfCube) {
  auto x = Tensor::leaf({}, {2.0});
  auto cube = mul(mul(x, x), x);
  auto first = grad(cube, std::vector{x}, {.create_graph = true});
  EXPECT_DOUBLE_EQ(first[0].item(), 12.0);  // 3x^2
  ASSERT_TRUE(first[0].requires_grad());
  auto second = grad(first[0], std::vector{x});
  EXPECT_DOUBLE_EQ(second[0].item(), 12.0);  // 6x
}

TEST(Backward, NonScalarOutputIsAnError) {
  auto x = Tensor::leaf({3}, {1, 2, 3});
  EXPECT_THROW(backward(mul(x, x)), ShapeError);
}

TEST(Backward, DetachedGraphReportsZeroGradients) {
  auto x = Tensor::leaf({2}, {1, 2});
  auto y = Tensor::leaf({2}, {3, 4});
  auto out = sum(mul(x.detach(), y));
  std::vector<std::size_t> unreachable;
  auto g = grad(out, std::vector{x, y}, {}, &unreachable);
  ASSERT_EQ(unreachable, std::vector<std::size_t>{0});
  EXPECT_EQ(g[0][0], 0.0);
  EXPECT_EQ(g[0][1], 0.0);
  EXPECT_EQ(g[1][0], 1.0);
  EXPECT_EQ(g[1][1], 2.0);
}

TEST(Backward, NonRequiresGradLeafNeverAccumulates) {
  auto x = Tensor::leaf({2}, {1, 2}, false);
  auto w = Tensor::leaf({2}, {3, 4});
  auto gm = backward(sum(mul(x, w)));
  EXPECT_FALSE(gm.contains(x));
  EXPECT_TRUE(gm.contains(w));
  EXPECT_FALSE(mul(x, x).requires_grad());
}

TEST(Backward, NoGradGuardStopsRecording) {
  auto x = Tensor::leaf({2}, {1, 2});
  Tensor y;
  {
    NoGradGuard guard;
    y = mul(x, x);
  }
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(mul(x, x).requires_grad());
}

TEST(Backward, AccumulationIsAdditive) {
  Rng rng(5);
  auto x = random_leaf(rng, {3, 2});
  auto w = random_const(rng, {2, 4});
  auto f = [&] { return sum(tanh(matmul(x, w))); };
  auto g = [&] { return sum(softplus(x)); };
  auto both = grad(add(f(), g()), std::vector{x})[0];
  auto gf = grad(f(), std::vector{x})[0];
  auto gg = grad(g(), std::vector{x})[0];
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(both[i], gf[i] + gg[i], 1e-14);
}

TEST(Backward, SharedSubexpressionVisitedOnce) {
  auto x = Tensor::leaf({}, {1.5});
  auto s = sigmoid(x);
  auto out = add(mul(s, s), s);
  const auto order = topological_order(out);
  std::unordered_set<const Node*> seen;
  for (const auto& n : order) EXPECT_TRUE(seen.insert(n.get()).second);
  // every input of a recorded op precedes it
  std::unordered_set<const Node*> before;
  for (const auto& n : order) {
    if (n->op) {
      for (const auto& in : n->op->inputs) {
        if (in.requires_grad()) EXPECT_TRUE(before.contains(in.node().get()));
      }
    }
    before.insert(n.get());
  }
  const double sv = 1.0 / (1.0 + std::exp(-1.5));
  EXPECT_NEAR(grad(out, std::vector{x})[0].item(), (2 * sv + 1) * sv * (1 - sv), 1e-15);
}

TEST(Backward, NestedThroughOneGradientStepMatchesFiniteDifferences) {
  // inner: f(theta; a) = sum(a * theta^2) + theta0*theta1; theta' = theta - lr df/dtheta
  // outer: g(a) = sum((theta' - target)^2)
  const auto theta = Tensor::constant({2}, {0.7, -1.2});
  const auto target = Tensor::constant({2}, {0.1, 0.3});
  const double lr = 0.15;
  Fn outer = [&](std::span<const Tensor> p) {
    auto th = theta.as_leaf(true);
    auto inner = add(sum(mul(p[0], square(th))),
                     mul(slice(th, 0, 0, 1), slice(th, 0, 1, 1)));
    auto g = grad(sum(inner), std::vector{th}, {.create_graph = true})[0];
    auto stepped = sub(th, scale(g, lr));
    return sum(square(sub(stepped, target)));
  };
  const std::vector<Tensor> point{Tensor::constant({2}, {0.4, 1.3})};
  EXPECT_LT(finite_difference_check(outer, point, 1e-4), 1e-5);
}

TEST(FiniteDifference, LinearFunctionIsExactToRounding) {
  Rng rng(2);
  auto w = random_const(rng, {5});
  Fn f = [&](std::span<const Tensor> p) { return sum(mul(p[0], w)); };
  const std::vector<Tensor> point{random_leaf(rng, {5})};
  EXPECT_LT(finite_difference_check(f, point, 1e-4), 1e-10);
}

TEST(FiniteDifference, CompositeSigmoidLayer) {
  Rng rng(4);
  auto x = random_const(rng, {6, 3});
  Fn f = [&](std::span<const Tensor> p) {
    return mean(square(sigmoid(add(matmul(x, p[0]), p[1]))));
  };
  const std::vector<Tensor> point{random_leaf(rng, {3, 4}), random_leaf(rng, {4})};
  EXPECT_LT(finite_difference_check(f, point, 1e-4), 1e-5);
}

TEST(FiniteDifference, ConstantFunctionHasZeroError) {
  Fn f = [](std::span<const Tensor>) { return Tensor::scalar(2.5); };
  const std::vector<Tensor> point{Tensor::constant({3}, {1, 2, 3})};
  EXPECT_EQ(finite_difference_check(f, point, 1e-4), 0.0);
}

TEST(FiniteDifference, RejectsNonFiniteValuesAndBadStep) {
  Fn f = [](std::span<const Tensor> p) { return sum(log(p[0])); };
  const std::vector<Tensor> point{Tensor::constant({2}, {1.0, 0.0})};
  EXPECT_THROW(finite_difference_check(f, point, 1e-4), std::runtime_error);
  const std::vector<Tensor> ok{Tensor::constant({1}, {1.0})};
  EXPECT_THROW(finite_difference_check(f, ok, 0.0), std::invalid_argument);
}

TEST(Determinism, IdenticalGraphsGiveBitIdenticalValues) {
  auto build = [] {
    Rng rng(77);
    auto a = random_leaf(rng, {4, 5});
    auto b = random_leaf(rng, {5, 3});
    return softmax(tanh(matmul(a, b)));
  };
  auto first = build();
  auto second = build();
  ASSERT_EQ(first.numel(), second.numel());
  for (std::size_t i = 0; i < first.numel(); ++i) EXPECT_EQ(first[i], second[i]);
}

TEST(Parameters, FingerprintTracksValues) {
  ParameterSet p;
  p.add("w", Tensor::leaf({2}, {1, 2}));
  ParameterSet q;
  q.add("w", Tensor::leaf({2}, {1, 2}));
  EXPECT_EQ(p.fingerprint(), q.fingerprint());
  auto r = p.with_tensors({Tensor::leaf({2}, {1, 2.0000001})});
  EXPECT_NE(p.fingerprint(), r.fingerprint());
  EXPECT_THROW(p.add("w", Tensor::zeros({1})), std::invalid_argument);
  EXPECT_THROW(p.get("missing"), std::out_of_range);
}
