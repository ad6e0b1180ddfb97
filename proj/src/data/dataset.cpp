// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tsmi/common/rng.hpp"

namespace tsmi::data {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_real(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<double> TimeSeriesDataset::channel(std::size_t c) const {
  std::vector<double> out(length());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = at(t, c);
  return out;
}

TimeSeriesDataset TimeSeriesDataset::segment(std::size_t begin, std::size_t end) const {
  if (begin > end || end > length()) throw DataError("segment: range out of bounds");
  TimeSeriesDataset out;
  out.channel_names = channel_names;
  const std::size_t c = channels();
  out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin * c),
                    values.begin() + static_cast<std::ptrdiff_t>(end * c));
  if (!timestamps.empty()) {
    out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                          timestamps.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

TimeSeriesDataset load_csv(const std::filesystem::path& path, bool has_timestamp_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  auto header = split_fields(trim(line));
  const std::size_t skip = has_timestamp_column ? 1 : 0;
  if (header.size() <= skip) throw DataError(path.string() + ": header has no value columns");

  TimeSeriesDataset ds;
  for (std::size_t i = skip; i < header.size(); ++i) ds.channel_names.push_back(trim(header[i]));

  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    ++row;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    if (has_timestamp_column) ds.timestamps.push_back(trim(fields[0]));
    for (std::size_t i = skip; i < fields.size(); ++i) {
      const std::string cell = trim(fields[i]);
      double v = 0.0;
      if (!parse_real(cell, v)) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", column " +
                        std::to_string(i + 1) + " ('" + header[i] + "'): cannot parse '" + cell +
                        "'");
      }
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", column " +
                        std::to_string(i + 1) + ": non-finite value");
      }
      ds.values.push_back(v);
    }
  }
  return ds;
}

void write_csv(const TimeSeriesDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const bool stamps = !dataset.timestamps.empty();
  if (stamps) out << "date";
  for (std::size_t c = 0; c < dataset.channels(); ++c) {
    if (stamps || c) out << ',';
    out << dataset.channel_names[c];
  }
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < dataset.length(); ++t) {
    if (stamps) out << dataset.timestamps[t];
    for (std::size_t c = 0; c < dataset.channels(); ++c) {
      if (stamps || c) out << ',';
      // shortest round-trip representation
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, dataset.at(t, c));
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::size_t> window_starts(std::size_t length, std::size_t input_length,
                                       std::size_t horizon, std::size_t stride) {
  if (input_length == 0 || stride == 0) {
    throw DataError("make_windows: input length and stride must be at least 1");
  }
  if (length < input_length + horizon) {
    throw DataError("make_windows: series of length " + std::to_string(length) +
                    " is too short; need at least " + std::to_string(input_length + horizon) +
                    " timesteps");
  }
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + input_length + horizon <= length; s += stride) starts.push_back(s);
  return starts;
}

std::vector<WindowPair> make_windows(const TimeSeriesDataset& dataset, std::size_t input_length,
                                     std::size_t horizon, std::size_t stride) {
  if (horizon == 0) throw DataError("make_windows: horizon must be at least 1");
  const std::size_t c = dataset.channels();
  std::vector<WindowPair> out;
  for (auto s : window_starts(dataset.length(), input_length, horizon, stride)) {
    WindowPair w;
    w.start = s;
    auto base = dataset.values.begin() + static_cast<std::ptrdiff_t>(s * c);
    w.x.assign(base, base + static_cast<std::ptrdiff_t>(input_length * c));
    w.y.assign(base + static_cast<std::ptrdiff_t>(input_length * c),
               base + static_cast<std::ptrdiff_t>((input_length + horizon) * c));
    out.push_back(std::move(w));
  }
  return out;
}

void SplitConfig::validate() const {
  for (double f : {train, validation, test}) {
    if (!(f > 0.0 && f < 1.0)) throw DataError("split fractions must lie in (0, 1)");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw DataError("split fractions must sum to 1");
  }
}

Splits split_chronological(const TimeSeriesDataset& dataset, const SplitConfig& config) {
  config.validate();
  const auto n = static_cast<double>(dataset.length());
  const auto train_end = static_cast<std::size_t>(std::llround(n * config.train));
  const auto val_end = static_cast<std::size_t>(std::llround(n * (config.train + config.validation)));
  return {dataset.segment(0, train_end), dataset.segment(train_end, val_end),
          dataset.segment(val_end, dataset.length())};
}

NormalizationStats fit_normalization(const TimeSeriesDataset& train_region) {
  const std::size_t c = train_region.channels();
  const std::size_t t = train_region.length();
  if (t == 0) throw DataError("fit_normalization: empty training region");
  NormalizationStats stats;
  stats.mean.assign(c, 0.0);
  stats.stddev.assign(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double m = 0.0;
    for (std::size_t i = 0; i < t; ++i) m += train_region.at(i, ch);
    m /= static_cast<double>(t);
    double var = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      const double d = train_region.at(i, ch) - m;
      var += d * d;
    }
    var /= static_cast<double>(t);
    stats.mean[ch] = m;
    stats.stddev[ch] = std::sqrt(var);
    if (!(stats.stddev[ch] > 0.0)) {
      stats.stddev[ch] = 1.0;
      stats.warnings.push_back("channel '" + train_region.channel_names[ch] +
                               "' has zero variance; using stddev 1");
    }
  }
  return stats;
}

TimeSeriesDataset normalize(const TimeSeriesDataset& dataset, const NormalizationStats& stats) {
  if (stats.mean.size() != dataset.channels()) throw DataError("normalize: channel count mismatch");
  TimeSeriesDataset out = dataset;
  const std::size_t c = dataset.channels();
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (out.values[i] - stats.mean[i % c]) / stats.stddev[i % c];
  }
  return out;
}

TimeSeriesDataset denormalize(const TimeSeriesDataset& dataset, const NormalizationStats& stats) {
  if (stats.mean.size() != dataset.channels()) {
    throw DataError("denormalize: channel count mismatch");
  }
  TimeSeriesDataset out = dataset;
  const std::size_t c = dataset.channels();
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = out.values[i] * stats.stddev[i % c] + stats.mean[i % c];
  }
  return out;
}

TimeSeriesBatch make_batch(const TimeSeriesDataset& dataset, std::span<const std::size_t> starts,
                           std::size_t input_length, std::size_t horizon, Task task) {
  const std::size_t c = dataset.channels();
  const std::size_t n = starts.size();
  const std::size_t target_len = task == Task::kForecast ? horizon : input_length;
  const std::size_t span = task == Task::kForecast ? input_length + horizon : input_length;
  std::vector<double> x(n * input_length * c);
  std::vector<double> y(n * target_len * c);
  for (std::size_t i = 0; i < n; ++i) {
    if (starts[i] + span > dataset.length()) throw DataError("make_batch: window out of range");
    const double* src = dataset.values.data() + starts[i] * c;
    std::copy(src, src + input_length * c, x.begin() + static_cast<std::ptrdiff_t>(i * input_length * c));
    const double* ysrc = task == Task::kForecast ? src + input_length * c : src;
    std::copy(ysrc, ysrc + target_len * c, y.begin() + static_cast<std::ptrdiff_t>(i * target_len * c));
  }
  TimeSeriesBatch batch;
  batch.x = ad::Tensor::constant({n, input_length, c}, std::move(x));
  batch.y = ad::Tensor::constant({n, target_len, c}, std::move(y));
  batch.starts.assign(starts.begin(), starts.end());
  batch.task = task;
  return batch;
}

std::vector<std::size_t> sample_starts(std::size_t window_count, std::size_t batch_size, Rng& rng) {
  if (window_count == 0) throw DataError("sample_starts: no windows available");
  std::vector<std::size_t> starts(batch_size);
  for (auto& s : starts) s = rng.index(window_count);
  return starts;
}

TimeSeriesBatch mask_for_imputation(const TimeSeriesBatch& batch, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("mask ratio must lie in (0, 1)");
  const auto& shape = batch.x.shape();
  const std::size_t n = shape[0], l = shape[1], c = shape[2];
  const auto masked = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(l)));
  Rng rng(seed);
  std::vector<double> x(batch.x.values().begin(), batch.x.values().end());
  std::vector<double> observed(x.size(), 1.0);
  std::vector<std::size_t> order(l);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      // partial Fisher-Yates: the first `masked` entries are a uniform subset
      for (std::size_t k = 0; k < masked; ++k) {
        std::swap(order[k], order[k + rng.index(l - k)]);
        const std::size_t idx = (i * l + order[k]) * c + ch;
        x[idx] = 0.0;
        observed[idx] = 0.0;
      }
    }
  TimeSeriesBatch out = batch;
  out.x = ad::Tensor::constant(shape, std::move(x));
  out.observed = ad::Tensor::constant(shape, std::move(observed));
  out.task = Task::kImpute;
  return out;
}

SynthParams SynthParams::test_defaults() {
  SynthParams p;
  p.weights = {1.0};
  p.frequencies = {1.0 / 20};
  p.phases = {2.5};
  return p;
}

TimeSeriesDataset synth_generate(const SynthParams& params) {
  if (params.weights.size() != params.frequencies.size() ||
      params.weights.size() != params.phases.size()) {
    throw DataError("synth_generate: weights, frequencies and phases must have equal length");
  }
  if (!(params.noise >= 0.0)) throw DataError("synth_generate: noise must be non-negative");
  Rng rng(params.seed);
  TimeSeriesDataset ds;
  ds.channel_names = {"value"};
  ds.values.resize(params.length);
  for (std::size_t t = 0; t < params.length; ++t) {
    double v = 0.0;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
      v += params.weights[i] * std::sin(params.frequencies[i] * static_cast<double>(t) + params.phases[i]);
    }
    if (params.noise > 0.0) v += params.noise * rng.normal();
    ds.values[t] = v;
  }
  return ds;
}

}  // namespace tsmi::data
