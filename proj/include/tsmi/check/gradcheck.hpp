// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tsmi::check {

/// Tolerance for every entry of the suite (max relative error, L2 per leaf).
inline constexpr double kGradcheckTolerance = 1e-4;

struct CheckResult {
  std::string name;
  double error = 0.0;
  std::size_t parameters = 0;
  bool passed() const { return error < kGradcheckTolerance; }
};

/// Central differences against reverse mode for every differentiable
/// primitive, first order and through one create_graph backward.
std::vector<CheckResult> primitive_checks(std::uint64_t seed);

/// Composite training loss on a tiny pipeline (linear backbone, d_model 8,
/// dim_l 16, N 4), one entry per parameter group: theta, beta, alpha.
std::vector<CheckResult> pipeline_checks(std::uint64_t seed);

struct BilevelToy {
  double gradient_error = 0.0;   // outer gradient vs central differences
  double loss_before = 0.0;      // L_V(theta_hat(alpha))
  double loss_after = 0.0;       // same after one outer step
  std::size_t parameters = 0;    // theta plus alpha
};

/// Linear-regression model with a 3-unit weighting net.
BilevelToy bilevel_toy(std::uint64_t seed, double eta2);

struct SuiteReport {
  std::vector<CheckResult> checks;
  double max_error = 0.0;
  double seconds = 0.0;
  bool passed() const;
};

/// primitive_checks + pipeline_checks + the toy outer gradient.
SuiteReport run_gradcheck_suite(std::uint64_t seed);

}  // namespace tsmi::check
