// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tsmi/autodiff/parameters.hpp"
#include "tsmi/backbone/backbone.hpp"
#include "tsmi/data/dataset.hpp"
#include "tsmi/reweight/weighting.hpp"
#include "tsmi/text/description.hpp"
#include "tsmi/text/embedding.hpp"

namespace tsmi::trainer {

enum class Variant { kFull, kNoMutual, kNoReweight, kNoTemplate, kStatic, kBackboneOnly };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant variant);
reweight::Objective objective_for(Variant variant);

struct TrainConfig {
  backbone::BackboneConfig backbone;
  std::size_t batch_size = 64;
  /// T. Zero trains nothing and returns the initialization.
  std::size_t iterations = 1000;
  /// Main model learning rate; also eta_1 of the virtual step.
  double learning_rate = 0.05;
  std::string optimizer = "sgd";
  double eta0_first_epoch = 1e-3;
  double eta0_later = 1e-4;
  double eta2 = 1e-3;
  /// Discriminator update every k iterations.
  std::size_t discriminator_every = 1;
  /// Validation batch size M for the outer step.
  std::size_t validation_batch = 64;
  Variant variant = Variant::kFull;
  double lambda = 0.5;
  double mask_ratio = 0.25;
  double divergence_limit = 1e6;
  /// Stride of the windows used for per-epoch validation loss.
  std::size_t eval_stride = 1;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t iterations_per_epoch(std::size_t train_windows) const;
};

/// Normalized regions plus the raw training rows the descriptions are
/// rendered from.
struct TrainData {
  data::TimeSeriesDataset train;
  data::TimeSeriesDataset validation;
  data::TimeSeriesDataset train_raw;
};

struct TextSource {
  text::TextEmbedder embedder;
  text::TemplateConfig templ;
};

struct ModelState {
  ad::ParameterSet theta;
  ad::ParameterSet beta;
  ad::ParameterSet alpha;
};

ModelState init_model(const TrainConfig& config, std::size_t text_dim);

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t iterations = 0;
  double train_loss = 0.0;       // objective value
  double prediction_loss = 0.0;  // mean l_O
  double validation_loss = 0.0;
  std::optional<double> mi;       // discriminator estimate
  std::optional<double> mean_omega_o;
  std::optional<double> mean_omega_i;
};

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  std::size_t count = 0;
};

struct RunReport {
  std::string status = "ok";  // ok | diverged
  std::string message;
  std::size_t iterations_run = 0;
  std::vector<EpochRecord> epochs;
  std::optional<Metrics> test;
  double seconds = 0.0;
  TrainConfig config;
};

enum class Stage { kDiscriminator, kOuter, kModel };

struct StageEvent {
  std::size_t iteration = 0;
  Stage stage = Stage::kModel;
  std::uint64_t theta_before = 0, theta_after = 0;
  std::uint64_t beta_before = 0, beta_after = 0;
  std::uint64_t alpha_before = 0, alpha_after = 0;
};

struct TrainResult {
  ModelState state;
  RunReport report;
};

/// Alternating loop: discriminator step, outer step, model step per
/// iteration. Missing embedding keys raise text::MissingKeyError; a loss
/// above the divergence limit stops training with status "diverged".
TrainResult train(const TrainConfig& config, const TrainData& data, const TextSource& text,
                  const std::function<void(const StageEvent&)>& observer = {});

/// Continues from `state` (same rules as train).
TrainResult train_from(ModelState state, const TrainConfig& config, const TrainData& data,
                       const TextSource& text, const std::function<void(const StageEvent&)>& observer = {});

/// Elementwise MSE and MAE; `mask` (optional) selects entries with value 1.
Metrics compute_metrics(std::span<const double> prediction, std::span<const double> target,
                        std::span<const double> mask = {});

/// All windows of `dataset` at `stride`. Imputation masks are drawn from
/// `mask_seed` and only masked entries count.
Metrics evaluate(const ad::ParameterSet& theta, const backbone::BackboneConfig& config,
                 const data::TimeSeriesDataset& dataset, std::size_t stride, std::size_t batch_size,
                 double mask_ratio = 0.25, std::uint64_t mask_seed = 0);

/// Wall time is left out, so equal runs give equal bytes.
std::string report_to_json(const RunReport& report);

}  // namespace tsmi::trainer
