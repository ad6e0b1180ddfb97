// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tsmi/autodiff/parameters.hpp"

namespace tsmi::ad {

/// Produces the next parameter values as fresh leaves. Throws
/// std::runtime_error naming the tensor if a gradient is not finite.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual ParameterSet step(const ParameterSet& params, std::span<const Tensor> grads) = 0;
  virtual void set_learning_rate(double lr) = 0;
  virtual double learning_rate() const = 0;
};

/// theta <- theta - lr * g
class Sgd : public Optimizer {
 public:
  explicit Sgd(double lr);
  ParameterSet step(const ParameterSet& params, std::span<const Tensor> grads) override;
  void set_learning_rate(double lr) override { lr_ = lr; }
  double learning_rate() const override { return lr_; }

 private:
  double lr_;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  ParameterSet step(const ParameterSet& params, std::span<const Tensor> grads) override;
  void set_learning_rate(double lr) override { lr_ = lr; }
  double learning_rate() const override { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, double lr);

}  // namespace tsmi::ad
