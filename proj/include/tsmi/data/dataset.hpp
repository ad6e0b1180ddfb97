// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsmi/autodiff/tensor.hpp"

namespace tsmi {
class Rng;
}

namespace tsmi::data {

enum class Task { kForecast, kImpute };

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// T timesteps x C channels, row-major. Immutable once loaded.
struct TimeSeriesDataset {
  std::vector<std::string> channel_names;
  std::vector<std::string> timestamps;  // empty when the source had none
  std::vector<double> values;

  std::size_t channels() const { return channel_names.size(); }
  std::size_t length() const { return channels() ? values.size() / channels() : 0; }
  double at(std::size_t t, std::size_t c) const { return values[t * channels() + c]; }
  std::vector<double> channel(std::size_t c) const;
  /// Rows [begin, end).
  TimeSeriesDataset segment(std::size_t begin, std::size_t end) const;
};

TimeSeriesDataset load_csv(const std::filesystem::path& path, bool has_timestamp_column);
void write_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path);

struct WindowPair {
  std::size_t start = 0;
  std::vector<double> x;  // L x C
  std::vector<double> y;  // H x C
};

/// Window start offsets ordered ascending; count = floor((T - L - H) / stride) + 1.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t input_length,
                                       std::size_t horizon, std::size_t stride);
std::vector<WindowPair> make_windows(const TimeSeriesDataset& dataset, std::size_t input_length,
                                     std::size_t horizon, std::size_t stride);

struct SplitConfig {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const;
};

struct Splits {
  TimeSeriesDataset train;
  TimeSeriesDataset validation;
  TimeSeriesDataset test;
};

/// Contiguous chronological split: train first, then validation, then test.
Splits split_chronological(const TimeSeriesDataset& dataset, const SplitConfig& config);

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::string> warnings;
};

/// Per-channel mean and population standard deviation. Zero-variance channels
/// get stddev 1 and a warning.
NormalizationStats fit_normalization(const TimeSeriesDataset& train_region);
TimeSeriesDataset normalize(const TimeSeriesDataset& dataset, const NormalizationStats& stats);
TimeSeriesDataset denormalize(const TimeSeriesDataset& dataset, const NormalizationStats& stats);

/// x: N x L x C, y: N x H x C (forecast) or N x L x C (impute).
/// observed: N x L x C, 1 = observed, 0 = masked (impute only).
struct TimeSeriesBatch {
  ad::Tensor x;
  ad::Tensor y;
  ad::Tensor observed;
  std::vector<std::size_t> starts;
  Task task = Task::kForecast;

  std::size_t size() const { return starts.size(); }
};

/// Builds a batch from window starts. For imputation y is the unmasked input
/// window and no mask is applied yet.
TimeSeriesBatch make_batch(const TimeSeriesDataset& dataset, std::span<const std::size_t> starts,
                           std::size_t input_length, std::size_t horizon, Task task);

/// Uniform sampling with replacement over `window_count` starts (stride 1).
std::vector<std::size_t> sample_starts(std::size_t window_count, std::size_t batch_size, Rng& rng);

/// Masks exactly round(ratio * L) timepoints per (sample, channel); masked
/// entries of x become 0.
TimeSeriesBatch mask_for_imputation(const TimeSeriesBatch& batch, double ratio, std::uint64_t seed);

struct SynthParams {
  std::vector<double> weights{0.1, 0.2, 0.3, 0.4};
  std::vector<double> frequencies{1.0 / 40, 1.0 / 45, 1.0 / 50, 1.0 / 55};
  std::vector<double> phases{0.0, 1.0, 2.0, 3.0};
  double noise = 0.1;
  std::size_t length = 10000;
  std::uint64_t seed = 0;

  /// Held-out single sinusoid used for the shifted-frequency test set.
  static SynthParams test_defaults();
};

/// values[t] = sum_i w_i sin(f_i t + p_i) + noise * g_t, g_t ~ N(0, 1).
TimeSeriesDataset synth_generate(const SynthParams& params);

}  // namespace tsmi::data
