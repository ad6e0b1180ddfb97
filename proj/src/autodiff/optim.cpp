// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/autodiff/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tsmi::ad {
namespace {

void check(const ParameterSet& params, std::span<const Tensor> grads) {
  if (grads.size() != params.size()) throw std::invalid_argument("optimizer: gradient count mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].numel() != params.tensors()[i].numel()) {
      throw ShapeError("optimizer", params.tensors()[i].shape(), grads[i].shape());
    }
    for (double g : grads[i].values()) {
      if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient for " + params.names()[i]);
    }
  }
}

}  // namespace

Sgd::Sgd(double lr) : lr_(lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

ParameterSet Sgd::step(const ParameterSet& params, std::span<const Tensor> grads) {
  check(params, grads);
  std::vector<Tensor> next;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& t = params.tensors()[i];
    std::vector<double> v(t.values().begin(), t.values().end());
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= lr_ * g[j];
    next.push_back(Tensor::leaf(t.shape(), std::move(v)));
  }
  return params.with_tensors(std::move(next));
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

ParameterSet Adam::step(const ParameterSet& params, std::span<const Tensor> grads) {
  check(params, grads);
  if (m_.empty()) {
    for (const auto& t : params.tensors()) {
      m_.emplace_back(t.numel(), 0.0);
      v_.emplace_back(t.numel(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam: parameter set changed size");
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  std::vector<Tensor> next;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const auto& t = params.tensors()[i];
    std::vector<double> v(t.values().begin(), t.values().end());
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) {
      m_[i][j] = beta1_ * m_[i][j] + (1 - beta1_) * g[j];
      v_[i][j] = beta2_ * v_[i][j] + (1 - beta2_) * g[j] * g[j];
      v[j] -= lr_ * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps_);
    }
    next.push_back(Tensor::leaf(t.shape(), std::move(v)));
  }
  return params.with_tensors(std::move(next));
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, double lr) {
  if (name == "sgd") return std::make_unique<Sgd>(lr);
  if (name == "adam") return std::make_unique<Adam>(lr);
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

}  // namespace tsmi::ad
