// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/reweight/weighting.hpp"

#include <cmath>
#include <stdexcept>

#include "tsmi/autodiff/grad.hpp"
#include "tsmi/autodiff/ops.hpp"
#include "tsmi/autodiff/optim.hpp"
#include "tsmi/common/rng.hpp"

namespace tsmi::reweight {

using ad::Tensor;

ad::ParameterSet init_weighting_net(std::uint64_t seed, std::size_t hidden) {
  if (hidden == 0) throw std::invalid_argument("weighting net: hidden size must be positive");
  Rng rng(mix_seed(seed, 0x776e6574ULL));
  std::vector<double> w(hidden), b(hidden);
  for (double& v : w) v = rng.uniform(-1.0, 1.0);
  for (double& v : b) v = rng.uniform(-1.0, 1.0);
  ad::ParameterSet alpha;
  alpha.add("hidden.weight", Tensor::leaf({1, hidden}, std::move(w)));
  alpha.add("hidden.bias", Tensor::leaf({hidden}, std::move(b)));
  alpha.add("latent.weight", Tensor::leaf({hidden, 1}, std::vector<double>(hidden, 0.0)));
  alpha.add("latent.bias", Tensor::leaf({1}, {0.0}));
  alpha.add("head.a_o", Tensor::leaf({1}, {0.0}));
  alpha.add("head.a_i", Tensor::leaf({1}, {0.0}));
  return alpha;
}

Tensor m_o(const ad::ParameterSet& alpha) { return ad::exp(alpha.get("head.a_o")); }

Tensor m_i(const ad::ParameterSet& alpha) { return -ad::exp(alpha.get("head.a_i")); }

DualWeights weighting_forward(const ad::ParameterSet& alpha, const Tensor& losses) {
  if (losses.rank() != 1) throw ad::ShapeError("weighting_forward", losses.shape(), "expected [N]");
  for (double v : losses.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("weighting_forward: non-finite loss");
    if (v < 0.0) throw std::invalid_argument("weighting_forward: negative loss");
  }
  const std::size_t n = losses.dim(0);
  Tensor h = ad::relu(ad::matmul(ad::reshape(losses, {n, 1}), alpha.get("hidden.weight")) +
                      alpha.get("hidden.bias"));
  Tensor z = ad::reshape(ad::matmul(h, alpha.get("latent.weight")) + alpha.get("latent.bias"), {n});
  DualWeights out;
  out.omega_o = ad::sigmoid(z * m_o(alpha));
  out.omega_i = ad::sigmoid(z * m_i(alpha));
  out.z = z;
  return out;
}

mi::WeightDistribution weights_to_distribution(const Tensor& omega_i) {
  if (omega_i.rank() != 1 || omega_i.dim(0) < 2) {
    throw std::invalid_argument("weights_to_distribution: need at least 2 weights");
  }
  return mi::WeightDistribution::from_probabilities(omega_i / ad::sum(omega_i));
}

Tensor sample_losses(const Tensor& prediction, const data::TimeSeriesBatch& batch) {
  if (prediction.shape() != batch.y.shape()) {
    throw ad::ShapeError("sample_losses", prediction.shape(), batch.y.shape());
  }
  const std::size_t n = prediction.dim(0);
  const std::size_t per = prediction.numel() / n;
  const Tensor sq = ad::reshape(ad::square(prediction - batch.y), {n, per});
  if (batch.task == data::Task::kForecast || !batch.observed.defined()) return ad::mean(sq, 1, false);

  std::vector<double> mask(n * per), count(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < per; ++j) {
      mask[i * per + j] = 1.0 - batch.observed[i * per + j];
      count[i] += mask[i * per + j];
    }
    if (count[i] == 0.0) throw std::invalid_argument("sample_losses: sample without masked entries");
  }
  return ad::sum(sq * Tensor::constant({n, per}, std::move(mask)), 1, false) /
         Tensor::constant({n}, std::move(count));
}

Tensor overall_loss(const Tensor& losses, const Tensor& scores, const DualWeights& w) {
  const Tensor mi = mi::weighted_jsd_from_scores(scores, weights_to_distribution(w.omega_i));
  return ad::mean(w.omega_o * losses) - ad::mean(w.omega_i) * mi;
}

Tensor static_weight_loss(const Tensor& losses, const Tensor& scores, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("static_weight_loss: lambda must lie in [0, 1]");
  }
  return ad::mean(losses) * (1.0 - lambda) - mi::jsd_from_scores(scores) * lambda;
}

bool uses_weighting_net(Objective objective) {
  return objective == Objective::kFull || objective == Objective::kNoMutual;
}

bool uses_mutual_information(Objective objective) {
  return objective == Objective::kFull || objective == Objective::kNoReweight ||
         objective == Objective::kStatic;
}

LossParts compute_objective(const ad::ParameterSet& theta, const ad::ParameterSet& beta,
                            const ad::ParameterSet& alpha, const backbone::BackboneConfig& config,
                            const data::TimeSeriesBatch& batch, const Tensor& h_l,
                            const LossSpec& spec, const Tensor& weight_input) {
  LossParts parts;
  parts.output = backbone::forward(theta, config, batch);
  parts.sample_losses = sample_losses(parts.output.prediction, batch);
  const Tensor& l = parts.sample_losses;

  if (uses_weighting_net(spec.objective)) {
    parts.weights = weighting_forward(alpha, weight_input.defined() ? weight_input : l.detach());
  }
  Tensor scores;
  if (uses_mutual_information(spec.objective)) {
    scores = mi::score_matrix(beta, parts.output.h_m, h_l);
  }
  switch (spec.objective) {
    case Objective::kFull:
      parts.mi = mi::weighted_jsd_from_scores(scores, weights_to_distribution(parts.weights.omega_i));
      parts.loss = ad::mean(parts.weights.omega_o * l) - ad::mean(parts.weights.omega_i) * parts.mi;
      break;
    case Objective::kNoMutual:
      parts.loss = ad::mean(parts.weights.omega_o * l);
      break;
    case Objective::kNoReweight:
      parts.mi = mi::jsd_from_scores(scores);
      parts.loss = ad::mean(l) - parts.mi;
      break;
    case Objective::kStatic:
      parts.mi = mi::jsd_from_scores(scores);
      parts.loss = static_weight_loss(l, scores, spec.lambda);
      break;
    case Objective::kPredictionOnly:
      parts.loss = ad::mean(l);
      break;
  }
  return parts;
}

ad::ParameterSet virtual_step(const ad::ParameterSet& theta, const Tensor& loss, double eta1) {
  if (!(eta1 > 0.0)) throw std::invalid_argument("virtual_step: eta1 must be positive");
  const auto grads = ad::grad(loss, theta.tensors(), {.create_graph = true});
  std::vector<Tensor> next;
  next.reserve(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    for (double v : grads[i].values()) {
      if (!std::isfinite(v)) throw std::runtime_error("virtual_step: non-finite gradient in " + theta.names()[i]);
    }
    next.push_back(theta.tensors()[i] - grads[i] * eta1);
  }
  return theta.with_tensors(std::move(next));
}

OuterStep outer_update(const ad::ParameterSet& alpha, const Tensor& validation_loss, double eta2) {
  if (!(eta2 > 0.0)) throw std::invalid_argument("outer_update: eta2 must be positive");
  const auto grads = ad::grad(validation_loss, alpha.tensors());
  ad::Sgd sgd(eta2);
  try {
    return {sgd.step(alpha, grads), validation_loss.item()};
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("outer_update: ") + e.what());
  }
}

Tensor validation_loss(const ad::ParameterSet& theta, const backbone::BackboneConfig& config,
                       const data::TimeSeriesBatch& batch) {
  return ad::mean(sample_losses(backbone::forward(theta, config, batch).prediction, batch));
}

OuterStep bilevel_step(const ad::ParameterSet& theta, const ad::ParameterSet& beta,
                       const ad::ParameterSet& alpha, const backbone::BackboneConfig& config,
                       const data::TimeSeriesBatch& batch, const Tensor& h_l,
                       const data::TimeSeriesBatch& validation, const LossSpec& spec, double eta1,
                       double eta2) {
  if (!uses_weighting_net(spec.objective)) {
    throw std::invalid_argument("bilevel_step: objective has no weighting net");
  }
  const auto theta_leaves = theta.as_leaves();
  const auto alpha_leaves = alpha.as_leaves();
  const auto parts = compute_objective(theta_leaves, beta.detached(), alpha_leaves, config, batch, h_l, spec);
  const auto theta_hat = virtual_step(theta_leaves, parts.loss, eta1);
  return outer_update(alpha_leaves, validation_loss(theta_hat, config, validation), eta2);
}

}  // namespace tsmi::reweight
