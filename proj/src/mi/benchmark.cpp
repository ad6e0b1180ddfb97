// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/mi/benchmark.hpp"

#include <chrono>
#include <numeric>

#include "tsmi/autodiff/grad.hpp"
#include "tsmi/autodiff/ops.hpp"
#include "tsmi/autodiff/optim.hpp"
#include "tsmi/common/rng.hpp"
#include "tsmi/mi/estimator.hpp"

namespace tsmi::mi {
namespace {

using ad::Tensor;

ad::ParameterSet train_critic(const Tensor& h_m, const Tensor& h_l,
                              const CorrelatedBenchmarkConfig& config, bool mine) {
  auto beta = init_discriminator(config.d_model, config.dim_l, config.seed);
  ad::Adam adam(config.learning_rate);
  for (std::size_t s = 0; s < config.steps; ++s) {
    const auto leaves = beta.as_leaves();
    const Tensor bound = mine ? mine_mi(leaves, h_m, h_l) : jsd_mi(leaves, h_m, h_l);
    beta = adam.step(leaves, ad::grad(-bound, leaves.tensors()));
  }
  return beta;
}

}  // namespace

CorrelatedBenchmarkResult run_correlated_benchmark(const CorrelatedBenchmarkConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.samples, d = config.d_model, dl = config.dim_l;
  if (n < 2 || dl < d) throw std::invalid_argument("benchmark: need samples >= 2 and dim_l >= d_model");
  Rng rng(config.seed);
  std::vector<double> hm(n * d), hl(n * dl), shuffled(n * dl);
  for (double& v : hm) v = config.mean + rng.normal();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dl; ++j) hl[i * dl + j] = (j < d ? hm[i * d + j] : 0.0) + config.noise * rng.normal();

  // Sattolo's algorithm: a uniformly random single cycle, so no sample keeps its partner.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i)]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dl; ++j) shuffled[i * dl + j] = hl[perm[i] * dl + j];

  const Tensor h_m = Tensor::constant({n, d}, hm);
  const Tensor h_l = Tensor::constant({n, dl}, hl);
  const Tensor h_ind = Tensor::constant({n, dl}, shuffled);

  CorrelatedBenchmarkResult out;
  out.jsd_correlated = jsd_mi(train_critic(h_m, h_l, config, false), h_m, h_l).item();
  out.jsd_independent = jsd_mi(train_critic(h_m, h_ind, config, false), h_m, h_ind).item();
  out.mine_correlated = mine_mi(train_critic(h_m, h_l, config, true), h_m, h_l).item();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace tsmi::mi
