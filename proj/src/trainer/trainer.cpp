// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "tsmi/autodiff/grad.hpp"
#include "tsmi/autodiff/ops.hpp"
#include "tsmi/autodiff/optim.hpp"
#include "tsmi/common/rng.hpp"
#include "tsmi/mi/estimator.hpp"
#include "tsmi/trainer/config_io.hpp"

namespace tsmi::trainer {
namespace {

using ad::Tensor;

std::size_t target_horizon(const backbone::BackboneConfig& cfg) {
  return cfg.task == data::Task::kForecast ? cfg.horizon : 0;
}

std::size_t window_count(const data::TimeSeriesDataset& ds, const backbone::BackboneConfig& cfg) {
  if (ds.length() < cfg.input_length + target_horizon(cfg)) return 0;
  return data::window_starts(ds.length(), cfg.input_length, target_horizon(cfg), 1).size();
}

// h_l rows per window start, computed once.
class TextCache {
 public:
  TextCache(const data::TimeSeriesDataset& raw, const TextSource& text, std::size_t input_length)
      : raw_(raw), text_(text), input_length_(input_length) {}

  Tensor rows(std::span<const std::size_t> starts) {
    const std::size_t dim = text_.embedder.dim();
    std::vector<double> out;
    out.reserve(starts.size() * dim);
    for (std::size_t s : starts) {
      auto it = cache_.find(s);
      if (it == cache_.end()) it = cache_.emplace(s, compute(s)).first;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return Tensor::constant({starts.size(), dim}, std::move(out));
  }

 private:
  std::vector<double> compute(std::size_t start) const {
    const std::size_t c = raw_.channels();
    std::vector<double> window(raw_.values.begin() + static_cast<std::ptrdiff_t>(start * c),
                               raw_.values.begin() + static_cast<std::ptrdiff_t>((start + input_length_) * c));
    const auto descs = text::describe_window(window, c, text_.templ);
    const Tensor row = text_.embedder.embed_windows({descs});
    return {row.values().begin(), row.values().end()};
  }

  const data::TimeSeriesDataset& raw_;
  const TextSource& text_;
  std::size_t input_length_;
  std::unordered_map<std::size_t, std::vector<double>> cache_;
};

data::TimeSeriesBatch sample_batch(const data::TimeSeriesDataset& ds, const TrainConfig& cfg,
                                   std::size_t windows, std::size_t size, Rng& rng, std::uint64_t mask_seed) {
  const auto starts = data::sample_starts(windows, size, rng);
  auto batch = data::make_batch(ds, starts, cfg.backbone.input_length, cfg.backbone.horizon, cfg.backbone.task);
  if (cfg.backbone.task == data::Task::kImpute) batch = data::mask_for_imputation(batch, cfg.mask_ratio, mask_seed);
  return batch;
}

double mean_of(const Tensor& t) { return ad::mean(t).item(); }

struct EpochAccumulator {
  std::size_t count = 0, mi_count = 0;
  double loss = 0, pred = 0, mi = 0, omega_o = 0, omega_i = 0;
  bool weighted = false;
};

}  // namespace

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "no_mutual") return Variant::kNoMutual;
  if (name == "no_reweight") return Variant::kNoReweight;
  if (name == "no_template") return Variant::kNoTemplate;
  if (name == "static") return Variant::kStatic;
  if (name == "backbone_only") return Variant::kBackboneOnly;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected full, no_mutual, no_reweight, no_template, static, backbone_only)");
}

std::string variant_name(Variant variant) {
  switch (variant) {
    case Variant::kFull: return "full";
    case Variant::kNoMutual: return "no_mutual";
    case Variant::kNoReweight: return "no_reweight";
    case Variant::kNoTemplate: return "no_template";
    case Variant::kStatic: return "static";
    case Variant::kBackboneOnly: return "backbone_only";
  }
  return "full";
}

reweight::Objective objective_for(Variant variant) {
  switch (variant) {
    case Variant::kFull:
    case Variant::kNoTemplate: return reweight::Objective::kFull;
    case Variant::kNoMutual: return reweight::Objective::kNoMutual;
    case Variant::kNoReweight: return reweight::Objective::kNoReweight;
    case Variant::kStatic: return reweight::Objective::kStatic;
    case Variant::kBackboneOnly: return reweight::Objective::kPredictionOnly;
  }
  return reweight::Objective::kFull;
}

void TrainConfig::validate() const {
  backbone.validate();
  for (double rate : {learning_rate, eta0_first_epoch, eta0_later, eta2}) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("train config: learning rates must be positive");
  }
  if (optimizer != "sgd" && optimizer != "adam") {
    throw std::invalid_argument("train config: optimizer must be sgd or adam");
  }
  const bool needs_pairs = reweight::uses_mutual_information(objective_for(variant));
  if (batch_size < (needs_pairs ? 2u : 1u)) throw std::invalid_argument("train config: batch_size too small");
  if (validation_batch == 0) throw std::invalid_argument("train config: validation_batch must be positive");
  if (discriminator_every == 0) throw std::invalid_argument("train config: discriminator_every must be positive");
  if (eval_stride == 0) throw std::invalid_argument("train config: eval_stride must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("train config: lambda must lie in [0, 1]");
  if (backbone.task == data::Task::kImpute && !(mask_ratio > 0.0 && mask_ratio < 1.0)) {
    throw std::invalid_argument("train config: mask_ratio must lie in (0, 1)");
  }
  if (!(divergence_limit > 0.0)) throw std::invalid_argument("train config: divergence_limit must be positive");
}

std::size_t TrainConfig::iterations_per_epoch(std::size_t train_windows) const {
  return std::max<std::size_t>(1, (train_windows + batch_size - 1) / batch_size);
}

ModelState init_model(const TrainConfig& config, std::size_t text_dim) {
  return {backbone::init_backbone(config.backbone, mix_seed(config.seed, 3)),
          mi::init_discriminator(config.backbone.d_model, text_dim, mix_seed(config.seed, 4)),
          reweight::init_weighting_net(mix_seed(config.seed, 5))};
}

TrainResult train(const TrainConfig& config, const TrainData& data, const TextSource& text,
                  const std::function<void(const StageEvent&)>& observer) {
  config.validate();
  return train_from(init_model(config, text.embedder.dim()), config, data, text, observer);
}

TrainResult train_from(ModelState state, const TrainConfig& config, const TrainData& data,
                       const TextSource& text, const std::function<void(const StageEvent&)>& observer) {
  config.validate();
  const auto start_time = std::chrono::steady_clock::now();
  const auto& bcfg = config.backbone;
  if (data.train.channels() != bcfg.channels || data.validation.channels() != bcfg.channels) {
    throw data::DataError("train: dataset channels differ from config");
  }
  if (data.train_raw.length() != data.train.length()) {
    throw data::DataError("train: raw and normalized training regions differ in length");
  }
  const std::size_t train_windows = window_count(data.train, bcfg);
  const std::size_t val_windows = window_count(data.validation, bcfg);
  if (train_windows == 0) throw data::DataError("train: training region shorter than one window");

  const auto objective = objective_for(config.variant);
  const reweight::LossSpec spec{objective, config.lambda};
  const bool use_mi = reweight::uses_mutual_information(objective);
  const bool use_alpha = reweight::uses_weighting_net(objective);
  if (use_alpha && val_windows == 0) throw data::DataError("train: validation region shorter than one window");

  TextSource source = text;
  if (config.variant == Variant::kNoTemplate) source.templ.use_template = false;
  TextCache cache(data.train_raw, source, bcfg.input_length);

  Rng sample_rng(mix_seed(config.seed, 1));
  Rng val_rng(mix_seed(config.seed, 2));
  auto optimizer = ad::make_optimizer(config.optimizer, config.learning_rate);
  const std::size_t per_epoch = config.iterations_per_epoch(train_windows);

  RunReport report;
  report.config = config;
  EpochAccumulator acc;

  const auto close_epoch = [&](std::size_t epoch) {
    if (acc.count == 0) return;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.iterations = acc.count;
    rec.train_loss = acc.loss / acc.count;
    rec.prediction_loss = acc.pred / acc.count;
    if (val_windows > 0) {
      rec.validation_loss = evaluate(state.theta, bcfg, data.validation, config.eval_stride, config.batch_size,
                                     config.mask_ratio, mix_seed(config.seed, 6)).mse;
    }
    if (acc.mi_count) rec.mi = acc.mi / acc.mi_count;
    if (acc.weighted) {
      rec.mean_omega_o = acc.omega_o / acc.count;
      rec.mean_omega_i = acc.omega_i / acc.count;
    }
    report.epochs.push_back(rec);
    acc = {};
  };

  const auto emit = [&](std::size_t it, Stage stage, const ModelState& before) {
    if (!observer) return;
    observer({it, stage, before.theta.fingerprint(), state.theta.fingerprint(), before.beta.fingerprint(),
              state.beta.fingerprint(), before.alpha.fingerprint(), state.alpha.fingerprint()});
  };

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const std::size_t epoch = it / per_epoch;
    if (it > 0 && it % per_epoch == 0) close_epoch(epoch - 1);
    const auto batch = sample_batch(data.train, config, train_windows, config.batch_size, sample_rng,
                                    mix_seed(config.seed, 100 + it));
    const Tensor h_l = use_mi ? cache.rows(batch.starts) : Tensor{};

    try {
      if (use_mi && it % config.discriminator_every == 0) {
        const ModelState before = state;
        Tensor h_m;
        {
          ad::NoGradGuard no_grad;
          h_m = backbone::forward(state.theta, bcfg, batch).h_m;
        }
        const double eta0 = epoch == 0 ? config.eta0_first_epoch : config.eta0_later;
        auto step = mi::update_discriminator(state.beta, h_m, h_l, eta0);
        state.beta = step.beta;
        acc.mi += step.mi_before;
        ++acc.mi_count;
        emit(it, Stage::kDiscriminator, before);
      }

      if (use_alpha) {
        const ModelState before = state;
        const auto val = sample_batch(data.validation, config, val_windows, config.validation_batch, val_rng,
                                      mix_seed(config.seed, 1u << 30 | it));
        state.alpha = reweight::bilevel_step(state.theta, state.beta, state.alpha, bcfg, batch, h_l, val, spec,
                                             config.learning_rate, config.eta2).alpha;
        emit(it, Stage::kOuter, before);
      }

      const ModelState before = state;
      const auto theta = state.theta.as_leaves();
      const auto parts = reweight::compute_objective(theta, state.beta.detached(), state.alpha.detached(), bcfg,
                                                     batch, h_l, spec);
      const double loss = parts.loss.item();
      if (!std::isfinite(loss) || std::abs(loss) > config.divergence_limit) {
        report.status = "diverged";
        report.message = "loss " + std::to_string(loss) + " at iteration " + std::to_string(it);
        break;
      }
      state.theta = optimizer->step(theta, ad::grad(parts.loss, theta.tensors()));
      emit(it, Stage::kModel, before);

      acc.loss += loss;
      acc.pred += mean_of(parts.sample_losses);
      if (parts.weights.omega_o.defined()) {
        acc.weighted = true;
        acc.omega_o += mean_of(parts.weights.omega_o);
        acc.omega_i += mean_of(parts.weights.omega_i);
      }
      ++acc.count;
      report.iterations_run = it + 1;
    } catch (const backbone::NumericError& e) {
      report.status = "diverged";
      report.message = std::string(e.what()) + " at iteration " + std::to_string(it);
      break;
    }
  }
  if (report.iterations_run > 0) close_epoch((report.iterations_run - 1) / per_epoch);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return {std::move(state), std::move(report)};
}

Metrics compute_metrics(std::span<const double> prediction, std::span<const double> target,
                        std::span<const double> mask) {
  if (prediction.size() != target.size() || (!mask.empty() && mask.size() != target.size())) {
    throw std::invalid_argument("compute_metrics: size mismatch");
  }
  Metrics m;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!mask.empty() && mask[i] != 1.0) continue;
    const double e = prediction[i] - target[i];
    m.mse += e * e;
    m.mae += std::abs(e);
    ++m.count;
  }
  if (m.count == 0) throw std::invalid_argument("compute_metrics: no entries to score");
  m.mse /= static_cast<double>(m.count);
  m.mae /= static_cast<double>(m.count);
  return m;
}

Metrics evaluate(const ad::ParameterSet& theta, const backbone::BackboneConfig& config,
                 const data::TimeSeriesDataset& dataset, std::size_t stride, std::size_t batch_size,
                 double mask_ratio, std::uint64_t mask_seed) {
  if (stride == 0 || batch_size == 0) throw std::invalid_argument("evaluate: stride and batch size must be positive");
  if (window_count(dataset, config) == 0) throw data::DataError("evaluate: empty test set");
  const auto starts = data::window_starts(dataset.length(), config.input_length, target_horizon(config), stride);
  ad::NoGradGuard no_grad;
  double se = 0, ae = 0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < starts.size(); b += batch_size) {
    const std::size_t n = std::min(batch_size, starts.size() - b);
    auto batch = data::make_batch(dataset, std::span(starts).subspan(b, n), config.input_length, config.horizon,
                                  config.task);
    std::vector<double> mask;
    if (config.task == data::Task::kImpute) {
      batch = data::mask_for_imputation(batch, mask_ratio, mix_seed(mask_seed, b));
      for (double o : batch.observed.values()) mask.push_back(1.0 - o);
    }
    const Tensor pred = backbone::forward(theta, config, batch).prediction;
    const auto m = compute_metrics(pred.values(), batch.y.values(), mask);
    se += m.mse * static_cast<double>(m.count);
    ae += m.mae * static_cast<double>(m.count);
    count += m.count;
  }
  return {se / static_cast<double>(count), ae / static_cast<double>(count), count};
}

std::string report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["status"] = report.status;
  if (!report.message.empty()) j["message"] = report.message;
  j["variant"] = variant_name(report.config.variant);
  j["seed"] = report.config.seed;
  j["iterations_run"] = report.iterations_run;
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"iterations", e.iterations},
                      {"train_loss", e.train_loss},
                      {"prediction_loss", e.prediction_loss},
                      {"validation_loss", e.validation_loss},
                      {"mi", opt(e.mi)},
                      {"mean_omega_o", opt(e.mean_omega_o)},
                      {"mean_omega_i", opt(e.mean_omega_i)}});
  }
  j["epochs"] = std::move(epochs);
  if (report.test) j["test"] = {{"mse", report.test->mse}, {"mae", report.test->mae}, {"count", report.test->count}};
  j["config"] = train_config_to_json(report.config);
  return j.dump(2);
}

}  // namespace tsmi::trainer
