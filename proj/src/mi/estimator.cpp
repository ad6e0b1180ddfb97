// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/mi/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "tsmi/autodiff/grad.hpp"
#include "tsmi/autodiff/ops.hpp"
#include "tsmi/common/rng.hpp"

namespace tsmi::mi {
namespace {

using ad::Tensor;

Tensor eye(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return Tensor::constant({n, n}, std::move(v));
}

Tensor off_diagonal(std::size_t n) {
  std::vector<double> v(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 0.0;
  return Tensor::constant({n, n}, std::move(v));
}

std::size_t check_scores(const Tensor& s) {
  if (s.rank() != 2 || s.dim(0) != s.dim(1)) throw ad::ShapeError("mi scores", s.shape(), "must be square");
  if (s.dim(0) < 2) throw std::invalid_argument("mutual information needs at least 2 samples (no negatives)");
  return s.dim(0);
}

Tensor diagonal(const Tensor& s) { return ad::sum(s * eye(s.dim(0)), 1, false); }

Tensor uniform_leaf(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(ad::element_count(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::leaf(std::move(shape), std::move(v));
}

}  // namespace

ad::ParameterSet init_discriminator(std::size_t d_model, std::size_t dim_l, std::uint64_t seed) {
  if (d_model == 0 || dim_l == 0) throw std::invalid_argument("discriminator dims must be positive");
  Rng rng(mix_seed(seed, 0x64697363ULL));
  ad::ParameterSet beta;
  beta.add("map1.weight", uniform_leaf({d_model, d_model}, d_model, rng));
  beta.add("map1.bias", uniform_leaf({d_model}, d_model, rng));
  beta.add("map2.weight", uniform_leaf({d_model, dim_l}, d_model, rng));
  beta.add("map2.bias", uniform_leaf({dim_l}, d_model, rng));
  return beta;
}

Tensor project(const ad::ParameterSet& beta, const Tensor& h_m) {
  const auto& w1 = beta.get("map1.weight");
  if (h_m.rank() != 2 || h_m.dim(1) != w1.dim(0)) throw ad::ShapeError("discriminator h_m", h_m.shape(), w1.shape());
  const Tensor hidden = ad::relu(ad::matmul(h_m, w1) + beta.get("map1.bias"));
  return ad::matmul(hidden, beta.get("map2.weight")) + beta.get("map2.bias");
}

Tensor score_matrix(const ad::ParameterSet& beta, const Tensor& h_m, const Tensor& h_l) {
  const Tensor p = project(beta, h_m);
  if (h_l.rank() != 2 || h_l.dim(1) != p.dim(1) || h_l.dim(0) != h_m.dim(0)) {
    throw ad::ShapeError("discriminator h_l", h_l.shape(), p.shape());
  }
  return ad::gemm(p, h_l, false, true);
}

Tensor discriminator_score(const ad::ParameterSet& beta, const Tensor& h_m, const Tensor& h_l) {
  if (h_m.rank() != 1 || h_l.rank() != 1) throw ad::ShapeError("discriminator_score", h_m.shape(), h_l.shape());
  const Tensor s = score_matrix(beta, ad::reshape(h_m, {1, h_m.numel()}), ad::reshape(h_l, {1, h_l.numel()}));
  return ad::reshape(s, {});
}

Tensor jsd_from_scores(const Tensor& scores) {
  const std::size_t n = check_scores(scores);
  const Tensor positive = -ad::mean(ad::softplus(-diagonal(scores)));
  const Tensor negative = ad::sum(ad::softplus(scores) * off_diagonal(n)) *
                          (1.0 / static_cast<double>(n * (n - 1)));
  return positive - negative;
}

Tensor jsd_mi(const ad::ParameterSet& beta, const Tensor& h_m, const Tensor& h_l) {
  return jsd_from_scores(score_matrix(beta, h_m, h_l));
}

WeightDistribution WeightDistribution::from_probabilities(const Tensor& p) {
  if (p.rank() != 1 || p.dim(0) < 2) throw ad::ShapeError("weight distribution", p.shape(), "need a vector of length >= 2");
  const std::size_t n = p.dim(0);
  const Tensor outer = ad::matmul(ad::reshape(p, {n, 1}), ad::reshape(p, {1, n})) * off_diagonal(n);
  return {p, outer / ad::sum(outer)};
}

WeightDistribution WeightDistribution::uniform(std::size_t n) {
  return from_probabilities(Tensor::full({n}, 1.0 / static_cast<double>(n)));
}

void WeightDistribution::validate() const {
  const std::size_t n = p.numel();
  if (p.rank() != 1 || n < 2 || p_hat.shape() != ad::Shape{n, n}) {
    throw std::invalid_argument("weight distribution: p must have length >= 2 and p_hat be N x N");
  }
  double total = 0.0;
  for (double v : p.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weight distribution: every p_i must be positive");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weight distribution: p does not sum to 1");
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p_hat[i * n + j];
      if (i == j && v != 0.0) throw std::invalid_argument("weight distribution: p_hat diagonal must be 0");
      if (i != j) off += v;
    }
  if (std::abs(off - 1.0) > 1e-9) throw std::invalid_argument("weight distribution: p_hat does not sum to 1");
}

Tensor weighted_jsd_from_scores(const Tensor& scores, const WeightDistribution& dist) {
  const std::size_t n = check_scores(scores);
  dist.validate();
  if (dist.p.numel() != n) throw ad::ShapeError("weighted_jsd_mi", scores.shape(), dist.p.shape());
  const Tensor positive = -ad::sum(dist.p * ad::softplus(-diagonal(scores)));
  const Tensor negative = ad::sum(dist.p_hat * ad::softplus(scores) * off_diagonal(n));
  return positive - negative;
}

Tensor weighted_jsd_mi(const ad::ParameterSet& beta, const Tensor& h_m, const Tensor& h_l,
                       const WeightDistribution& dist) {
  return weighted_jsd_from_scores(score_matrix(beta, h_m, h_l), dist);
}

Tensor mine_from_scores(const Tensor& scores) {
  const std::size_t n = check_scores(scores);
  double m = -INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m = std::max(m, scores[i * n + j]);
  const Tensor off = off_diagonal(n);
  const Tensor shifted = scores - m;
  const Tensor positive = ad::mean(diagonal(shifted));
  const Tensor tail = ad::exp(shifted * off) * off;
  return positive - ad::log(ad::sum(tail) * (1.0 / static_cast<double>(n * (n - 1))));
}

Tensor mine_mi(const ad::ParameterSet& beta, const Tensor& h_m, const Tensor& h_l) {
  return mine_from_scores(score_matrix(beta, h_m, h_l));
}

double eta0_for_epoch(std::size_t epoch) { return epoch == 0 ? 1e-3 : 1e-4; }

DiscriminatorStep update_discriminator(const ad::ParameterSet& beta, const Tensor& h_m,
                                       const Tensor& h_l, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("discriminator learning rate must be positive");
  const auto leaves = beta.as_leaves();
  const Tensor mi = jsd_mi(leaves, h_m.detach(), h_l.detach());
  const auto grads = ad::grad(mi, leaves.tensors());
  std::vector<Tensor> next;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& t = leaves.tensors()[i];
    std::vector<double> v(t.values().begin(), t.values().end());
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!std::isfinite(g[j])) throw std::runtime_error("discriminator: non-finite gradient in " + leaves.names()[i]);
      v[j] += lr * g[j];
    }
    next.push_back(Tensor::leaf(t.shape(), std::move(v)));
  }
  return {leaves.with_tensors(std::move(next)), mi.item()};
}

}  // namespace tsmi::mi
