// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace tsmi::mi {

/// Synthetic pairs: h_m ~ N(mean, I_d); h_l = [h_m, 0] + N(0, noise^2) in
/// dim_l dimensions. The independent condition pairs each h_m with another
/// sample's h_l (a fixed-point-free shuffle).
struct CorrelatedBenchmarkConfig {
  std::size_t samples = 512;
  std::size_t d_model = 8;
  std::size_t dim_l = 16;
  double mean = 2.0;
  double noise = 0.1;
  std::size_t steps = 200;
  double learning_rate = 0.02;  // Adam, full batch
  std::uint64_t seed = 1;
};

struct CorrelatedBenchmarkResult {
  double jsd_correlated = 0.0;
  double jsd_independent = 0.0;
  double mine_correlated = 0.0;  // critic trained on the MINE objective
  double seconds = 0.0;
};

CorrelatedBenchmarkResult run_correlated_benchmark(const CorrelatedBenchmarkConfig& config);

}  // namespace tsmi::mi
