// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "tsmi/autodiff/parameters.hpp"
#include "tsmi/autodiff/tensor.hpp"
#include "tsmi/backbone/backbone.hpp"
#include "tsmi/data/dataset.hpp"

namespace tsmi::trainer {

/// Linear CKA of two N x d feature matrices, columns centered internally.
double cka_linear(const ad::Tensor& a, const ad::Tensor& b);

/// CKA between the first- and last-layer representations over the windows
/// of `dataset` at `stride`.
double layer_cka(const ad::ParameterSet& theta, const backbone::BackboneConfig& config,
                 const data::TimeSeriesDataset& dataset, std::size_t stride, std::size_t batch_size);

struct WeightPoint {
  double loss = 0.0;
  double omega_o = 0.0;
  double omega_i = 0.0;
};

/// Needs at least two nonnegative grid points.
std::vector<WeightPoint> weight_curve(const ad::ParameterSet& alpha, std::span<const double> losses);

/// Header "loss,omega_o,omega_i", 17 significant digits.
void write_weight_curve_csv(const std::vector<WeightPoint>& curve, const std::filesystem::path& path);

}  // namespace tsmi::trainer
