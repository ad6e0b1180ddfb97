// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tsmi/autodiff/parameters.hpp"
#include "tsmi/data/dataset.hpp"

namespace tsmi::backbone {

enum class Kind { kPeriodMix, kLinear };

Kind parse_kind(const std::string& name);
std::string kind_name(Kind kind);

/// Raised when a layer produces NaN or infinity.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackboneConfig {
  Kind kind = Kind::kPeriodMix;
  data::Task task = data::Task::kForecast;
  std::size_t input_length = 96;
  std::size_t horizon = 336;  // ignored for imputation
  std::size_t channels = 1;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t top_k = 3;
  /// Per-window standardization of the input with statistics treated as
  /// constants; predictions are mapped back to the input scale.
  bool instance_norm = true;

  std::size_t output_length() const {
    return task == data::Task::kForecast ? horizon : input_length;
  }
  void validate() const;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization, deterministic in `seed`.
ad::ParameterSet init_backbone(const BackboneConfig& config, std::uint64_t seed);

struct BackboneOutput {
  ad::Tensor prediction;  // N x H x C, or N x L x C for imputation
  ad::Tensor h_first;     // N x d_model
  ad::Tensor h_last;      // N x d_model
  ad::Tensor h_m;         // N x d_model, the representation fed to the discriminator
};

/// Dispatches on config.kind.
BackboneOutput forward(const ad::ParameterSet& params, const BackboneConfig& config,
                       const data::TimeSeriesBatch& batch);

/// Period-mixing model. Periods are detected once per batch on the
/// standardized input and shared by every layer.
BackboneOutput forward_period_mix(const ad::ParameterSet& params, const BackboneConfig& config,
                                  const data::TimeSeriesBatch& batch);

/// One affine map L -> H per channel; h_m is an affine pooling of the input.
BackboneOutput forward_linear(const ad::ParameterSet& params, const BackboneConfig& config,
                              const data::TimeSeriesBatch& batch);

}  // namespace tsmi::backbone
