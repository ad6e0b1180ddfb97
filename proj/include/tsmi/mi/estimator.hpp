// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>

#include "tsmi/autodiff/parameters.hpp"

namespace tsmi::mi {

/// Tensors: map1.weight [d, d], map1.bias [d], map2.weight [d, dim_l],
/// map2.bias [dim_l]. Uniform(+-1/sqrt(fan_in)) initialization.
ad::ParameterSet init_discriminator(std::size_t d_model, std::size_t dim_l, std::uint64_t seed);

/// map2(relu(map1(H_m))): N x dim_l.
ad::Tensor project(const ad::ParameterSet& beta, const ad::Tensor& h_m);

/// S[i][j] = T(h_m^i, h_l^j) = <project(h_m^i), h_l^j>.
ad::Tensor score_matrix(const ad::ParameterSet& beta, const ad::Tensor& h_m, const ad::Tensor& h_l);

/// Single pair; h_m [d], h_l [dim_l].
ad::Tensor discriminator_score(const ad::ParameterSet& beta, const ad::Tensor& h_m,
                               const ad::Tensor& h_l);

/// Jensen-Shannon bound from a score matrix: mean_i -sp(-S_ii) - mean_{i!=j} sp(S_ij).
ad::Tensor jsd_from_scores(const ad::Tensor& scores);
ad::Tensor jsd_mi(const ad::ParameterSet& beta, const ad::Tensor& h_m, const ad::Tensor& h_l);

/// p_i over samples and the induced pair distribution
/// p_hat_ij = p_i p_j / sum_{k!=l} p_k p_l (zero diagonal).
struct WeightDistribution {
  ad::Tensor p;      // N
  ad::Tensor p_hat;  // N x N

  /// Builds p_hat from p; differentiable through p.
  static WeightDistribution from_probabilities(const ad::Tensor& p);
  static WeightDistribution uniform(std::size_t n);
  /// Throws std::invalid_argument unless p > 0, sum p = 1 and the
  /// off-diagonal of p_hat sums to 1 (tolerance 1e-9).
  void validate() const;
};

/// -sum_i p_i sp(-S_ii) - sum_{i!=j} p_hat_ij sp(S_ij).
ad::Tensor weighted_jsd_from_scores(const ad::Tensor& scores, const WeightDistribution& dist);
ad::Tensor weighted_jsd_mi(const ad::ParameterSet& beta, const ad::Tensor& h_m,
                           const ad::Tensor& h_l, const WeightDistribution& dist);

/// Donsker-Varadhan bound mean_i S_ii - log mean_{i!=j} exp(S_ij), shifted by
/// the largest off-diagonal score before exponentiating.
ad::Tensor mine_from_scores(const ad::Tensor& scores);
ad::Tensor mine_mi(const ad::ParameterSet& beta, const ad::Tensor& h_m, const ad::Tensor& h_l);

/// Discriminator learning rate: 0.001 in the first epoch, 0.0001 afterwards.
double eta0_for_epoch(std::size_t epoch);

struct DiscriminatorStep {
  ad::ParameterSet beta;  // fresh leaves
  double mi_before = 0.0;
};

/// One gradient-ascent step on the unweighted bound with respect to beta
/// only; h_m is detached. Throws std::runtime_error on a non-finite gradient.
DiscriminatorStep update_discriminator(const ad::ParameterSet& beta, const ad::Tensor& h_m,
                                       const ad::Tensor& h_l, double lr);

}  // namespace tsmi::mi
