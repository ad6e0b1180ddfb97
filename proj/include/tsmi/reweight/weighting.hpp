// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "tsmi/autodiff/parameters.hpp"
#include "tsmi/autodiff/tensor.hpp"
#include "tsmi/backbone/backbone.hpp"
#include "tsmi/data/dataset.hpp"
#include "tsmi/mi/estimator.hpp"

namespace tsmi::reweight {

inline constexpr std::size_t kHiddenSize = 100;

/// Weighting net: hidden.weight [1,h], hidden.bias [h], latent.weight [h,1],
/// latent.bias [1], head.a_o [1], head.a_i [1]. The latent layer and both
/// heads start at zero, so every initial weight is exactly 0.5.
ad::ParameterSet init_weighting_net(std::uint64_t seed, std::size_t hidden = kHiddenSize);

/// exp(a_o) > 0 and -exp(a_i) < 0, as scalars of shape [1].
ad::Tensor m_o(const ad::ParameterSet& alpha);
ad::Tensor m_i(const ad::ParameterSet& alpha);

struct DualWeights {
  ad::Tensor z;        // [N]
  ad::Tensor omega_o;  // [N], in (0, 1)
  ad::Tensor omega_i;  // [N], in (0, 1)
};

/// Losses must be finite and nonnegative, shape [N].
DualWeights weighting_forward(const ad::ParameterSet& alpha, const ad::Tensor& losses);

/// p = omega_i / sum(omega_i) and its off-diagonal pair distribution.
mi::WeightDistribution weights_to_distribution(const ad::Tensor& omega_i);

/// Per-sample mean squared error, [N]. For imputation only masked entries
/// (observed == 0) count.
ad::Tensor sample_losses(const ad::Tensor& prediction, const data::TimeSeriesBatch& batch);

/// mean(omega_o * l) + mean(omega_i) * (-I_w), I_w weighted by omega_i.
ad::Tensor overall_loss(const ad::Tensor& losses, const ad::Tensor& scores, const DualWeights& w);

/// (1 - lambda) * mean(l) - lambda * I.
ad::Tensor static_weight_loss(const ad::Tensor& losses, const ad::Tensor& scores, double lambda);

enum class Objective {
  kFull,            // weighted prediction + weighted MI
  kNoMutual,        // weighted prediction only
  kNoReweight,      // mean(l) - I
  kStatic,          // fixed ratio lambda
  kPredictionOnly,  // mean(l)
};

bool uses_weighting_net(Objective objective);
bool uses_mutual_information(Objective objective);

struct LossSpec {
  Objective objective = Objective::kFull;
  double lambda = 0.5;
};

struct LossParts {
  ad::Tensor loss;
  ad::Tensor sample_losses;
  ad::Tensor mi;  // undefined when the objective has no MI term
  DualWeights weights;  // undefined when the objective has no weighting net
  backbone::BackboneOutput output;
};

/// Backbone forward, per-sample losses, weights and the chosen objective.
/// The weighting net reads `weight_input` when given, otherwise the detached
/// per-sample losses.
LossParts compute_objective(const ad::ParameterSet& theta, const ad::ParameterSet& beta,
                            const ad::ParameterSet& alpha, const backbone::BackboneConfig& config,
                            const data::TimeSeriesBatch& batch, const ad::Tensor& h_l,
                            const LossSpec& spec, const ad::Tensor& weight_input = {});

/// theta - eta1 * dL/dtheta with the graph kept, so the result stays
/// differentiable in everything L depends on. `theta` must hold the leaves L
/// was built from.
ad::ParameterSet virtual_step(const ad::ParameterSet& theta, const ad::Tensor& loss, double eta1);

struct OuterStep {
  ad::ParameterSet alpha;
  double validation_loss = 0.0;
};

/// alpha - eta2 * dL_V/dalpha. `alpha` must hold the leaves L_V depends on.
OuterStep outer_update(const ad::ParameterSet& alpha, const ad::Tensor& validation_loss, double eta2);

/// Unweighted mean of the per-sample losses on the validation batch.
ad::Tensor validation_loss(const ad::ParameterSet& theta, const backbone::BackboneConfig& config,
                           const data::TimeSeriesBatch& batch);

/// One virtual step on the training batch followed by an outer update of
/// alpha on the validation batch. theta and beta are read, never changed.
OuterStep bilevel_step(const ad::ParameterSet& theta, const ad::ParameterSet& beta,
                       const ad::ParameterSet& alpha, const backbone::BackboneConfig& config,
                       const data::TimeSeriesBatch& batch, const ad::Tensor& h_l,
                       const data::TimeSeriesBatch& validation, const LossSpec& spec, double eta1,
                       double eta2);

}  // namespace tsmi::reweight
