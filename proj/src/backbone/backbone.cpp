// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/backbone/backbone.hpp"

#include <cmath>

#include "tsmi/autodiff/ops.hpp"
#include "tsmi/backbone/spectral.hpp"
#include "tsmi/common/rng.hpp"

namespace tsmi::backbone {
namespace {

using ad::Tensor;

constexpr double kNormEps = 1e-5;

Tensor uniform_leaf(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(ad::element_count(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::leaf(std::move(shape), std::move(v));
}

void check_finite(const Tensor& t, const std::string& where) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) throw NumericError("backbone: non-finite activation in " + where);
  }
}

void check_batch(const BackboneConfig& config, const data::TimeSeriesBatch& batch) {
  const ad::Shape want{batch.size(), config.input_length, config.channels};
  if (batch.x.shape() != want) {
    throw ad::ShapeError("backbone input", batch.x.shape(), want);
  }
  if (batch.task != config.task) throw std::invalid_argument("backbone: batch task differs from config");
}

struct Standardized {
  std::vector<double> x;     // N x L x C
  std::vector<double> mean;  // N x C
  std::vector<double> std;   // N x C
};

// Statistics over observed entries only; unobserved inputs stay at zero.
Standardized standardize(const data::TimeSeriesBatch& batch, std::size_t n, std::size_t l,
                         std::size_t c) {
  const bool masked = batch.task == data::Task::kImpute && batch.observed.defined();
  const auto x = batch.x.values();
  Standardized out{std::vector<double>(n * l * c, 0.0), std::vector<double>(n * c),
                   std::vector<double>(n * c)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double count = 0.0, total = 0.0;
      for (std::size_t t = 0; t < l; ++t) {
        const std::size_t idx = (i * l + t) * c + ch;
        const double w = masked ? batch.observed[idx] : 1.0;
        count += w;
        total += w * x[idx];
      }
      const double mu = count > 0 ? total / count : 0.0;
      double var = 0.0;
      for (std::size_t t = 0; t < l; ++t) {
        const std::size_t idx = (i * l + t) * c + ch;
        const double w = masked ? batch.observed[idx] : 1.0;
        var += w * (x[idx] - mu) * (x[idx] - mu);
      }
      const double sd = std::sqrt((count > 0 ? var / count : 0.0) + kNormEps);
      out.mean[i * c + ch] = mu;
      out.std[i * c + ch] = sd;
      for (std::size_t t = 0; t < l; ++t) {
        const std::size_t idx = (i * l + t) * c + ch;
        const double w = masked ? batch.observed[idx] : 1.0;
        out.x[idx] = w * (x[idx] - mu) / sd;
      }
    }
  }
  return out;
}

// features: N x d x L
Tensor mix_layer(const Tensor& features, const Tensor& period_mix, const Tensor& cycle_mix,
                 const BatchPeriods& periods, std::size_t n, std::size_t l) {
  const std::size_t d = features.dim(1);
  const std::size_t k = periods.periods.size();
  Tensor total;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t p = periods.periods[j];
    const std::size_t cycles = (l + p - 1) / p;
    Tensor grid = ad::pad(features, 2, 0, cycles * p - l);
    grid = ad::reshape(grid, {n, d, cycles, p});
    const Tensor a = ad::slice(ad::slice(period_mix, 0, 0, p), 1, 0, p);
    const Tensor b = ad::slice(ad::slice(cycle_mix, 0, 0, cycles), 1, 0, cycles);
    grid = ad::tanh(ad::matmul(grid, a));
    grid = ad::transpose(ad::matmul(ad::transpose(grid), b));
    Tensor back = ad::slice(ad::reshape(grid, {n, d, cycles * p}), 2, 0, l);

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = periods.weights[i * k + j];
    back = back * Tensor::constant({n, 1, 1}, std::move(w));
    total = total.defined() ? total + back : back;
  }
  return features + total;
}

}  // namespace

Kind parse_kind(const std::string& name) {
  if (name == "period_mix") return Kind::kPeriodMix;
  if (name == "linear") return Kind::kLinear;
  throw std::invalid_argument("unknown backbone kind '" + name + "' (expected period_mix or linear)");
}

std::string kind_name(Kind kind) { return kind == Kind::kLinear ? "linear" : "period_mix"; }

void BackboneConfig::validate() const {
  if (input_length < 4) throw std::invalid_argument("backbone: input_length must be >= 4");
  if (task == data::Task::kForecast && horizon == 0) {
    throw std::invalid_argument("backbone: horizon must be positive");
  }
  if (channels == 0 || d_model == 0) throw std::invalid_argument("backbone: channels and d_model must be positive");
  if (kind == Kind::kPeriodMix && (layers == 0 || top_k == 0)) {
    throw std::invalid_argument("backbone: layers and top_k must be positive");
  }
}

ad::ParameterSet init_backbone(const BackboneConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(mix_seed(seed, 0x6261636bULL));
  const std::size_t l = config.input_length, c = config.channels, d = config.d_model;
  const std::size_t out = config.output_length();
  ad::ParameterSet params;
  if (config.kind == Kind::kLinear) {
    params.add("linear.weight", uniform_leaf({l, out}, l, rng));
    params.add("linear.bias", uniform_leaf({out}, l, rng));
    params.add("pool.weight", uniform_leaf({l * c, d}, l * c, rng));
    params.add("pool.bias", uniform_leaf({d}, l * c, rng));
    return params;
  }
  const std::size_t max_cycles = (l + 1) / 2;
  params.add("embed.weight", uniform_leaf({c, d}, c, rng));
  params.add("embed.bias", uniform_leaf({d}, c, rng));
  for (std::size_t i = 0; i < config.layers; ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    params.add(prefix + ".period_mix", uniform_leaf({l, l}, l, rng));
    params.add(prefix + ".cycle_mix", uniform_leaf({max_cycles, max_cycles}, max_cycles, rng));
  }
  params.add("head.channel.weight", uniform_leaf({d, c}, d, rng));
  params.add("head.channel.bias", uniform_leaf({c}, d, rng));
  if (config.task == data::Task::kForecast) {
    params.add("head.time.weight", uniform_leaf({l, out}, l, rng));
    params.add("head.time.bias", uniform_leaf({out}, l, rng));
  }
  return params;
}

BackboneOutput forward(const ad::ParameterSet& params, const BackboneConfig& config,
                       const data::TimeSeriesBatch& batch) {
  return config.kind == Kind::kLinear ? forward_linear(params, config, batch)
                                      : forward_period_mix(params, config, batch);
}

BackboneOutput forward_period_mix(const ad::ParameterSet& params, const BackboneConfig& config,
                                  const data::TimeSeriesBatch& batch) {
  check_batch(config, batch);
  const std::size_t n = batch.size(), l = config.input_length, c = config.channels;

  Standardized norm;
  Tensor input = batch.x;
  if (config.instance_norm) {
    norm = standardize(batch, n, l, c);
    input = Tensor::constant({n, l, c}, norm.x);
  }
  const auto periods = detect_batch_periods(input.values(), n, l, c, config.top_k);

  Tensor features = ad::matmul(input, params.get("embed.weight")) + params.get("embed.bias");
  features = ad::transpose(features);  // N x d x L
  check_finite(features, "embedding");

  BackboneOutput out;
  for (std::size_t i = 0; i < config.layers; ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    features = mix_layer(features, params.get(prefix + ".period_mix"),
                         params.get(prefix + ".cycle_mix"), periods, n, l);
    check_finite(features, "layer " + std::to_string(i + 1));
    if (i == 0) out.h_first = ad::mean(features, 2, false);
  }
  out.h_last = ad::mean(features, 2, false);
  out.h_m = out.h_last;

  Tensor pred = ad::matmul(ad::transpose(features), params.get("head.channel.weight")) +
                params.get("head.channel.bias");  // N x L x C
  if (config.task == data::Task::kForecast) {
    pred = ad::matmul(ad::transpose(pred), params.get("head.time.weight")) +
           params.get("head.time.bias");  // N x C x H
    pred = ad::transpose(pred);
  }
  if (config.instance_norm) {
    pred = pred * Tensor::constant({n, 1, c}, norm.std) + Tensor::constant({n, 1, c}, norm.mean);
  }
  check_finite(pred, "output head");
  out.prediction = pred;
  return out;
}

BackboneOutput forward_linear(const ad::ParameterSet& params, const BackboneConfig& config,
                              const data::TimeSeriesBatch& batch) {
  check_batch(config, batch);
  const std::size_t n = batch.size(), l = config.input_length, c = config.channels;
  BackboneOutput out;
  Tensor pred = ad::matmul(ad::transpose(batch.x), params.get("linear.weight")) +
                params.get("linear.bias");  // N x C x H
  out.prediction = ad::transpose(pred);
  check_finite(out.prediction, "linear map");
  out.h_m = ad::matmul(ad::reshape(batch.x, {n, l * c}), params.get("pool.weight")) +
            params.get("pool.bias");
  check_finite(out.h_m, "pooling");
  out.h_first = out.h_m;
  out.h_last = out.h_m;
  return out;
}

}  // namespace tsmi::backbone
