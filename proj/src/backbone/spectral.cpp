// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/backbone/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tsmi::backbone {
namespace {

struct Twiddles {
  std::size_t length = 0;
  std::vector<double> cos, sin;  // (L/2 + 1) x L
};

Twiddles make_twiddles(std::size_t length) {
  Twiddles tw;
  tw.length = length;
  const std::size_t bins = length / 2 + 1;
  tw.cos.resize(bins * length);
  tw.sin.resize(bins * length);
  for (std::size_t f = 0; f < bins; ++f)
    for (std::size_t t = 0; t < length; ++t) {
      // reduce f*t mod L first so the angle stays in [0, 2pi)
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((f * t) % length) /
                           static_cast<double>(length);
      tw.cos[f * length + t] = std::cos(angle);
      tw.sin[f * length + t] = std::sin(angle);
    }
  return tw;
}

std::vector<double> amplitudes(const Twiddles& tw, std::span<const double> series) {
  const std::size_t bins = tw.length / 2 + 1;
  std::vector<double> out(bins);
  for (std::size_t f = 0; f < bins; ++f) {
    double re = 0.0, im = 0.0;
    const double* c = tw.cos.data() + f * tw.length;
    const double* s = tw.sin.data() + f * tw.length;
    for (std::size_t t = 0; t < tw.length; ++t) {
      re += series[t] * c[t];
      im -= series[t] * s[t];
    }
    out[f] = std::hypot(re, im);
  }
  return out;
}

std::vector<double> channel_mean(std::span<const double> window, std::size_t length,
                                 std::size_t channels) {
  std::vector<double> out(length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t c = 0; c < channels; ++c) out[t] += window[t * channels + c];
    out[t] /= static_cast<double>(channels);
  }
  return out;
}

// Non-DC bins sorted by descending amplitude, ties to the lower bin.
std::vector<std::size_t> rank_bins(const std::vector<double>& amp) {
  std::vector<std::size_t> bins(amp.size() > 0 ? amp.size() - 1 : 0);
  std::iota(bins.begin(), bins.end(), std::size_t{1});
  std::stable_sort(bins.begin(), bins.end(),
                   [&](std::size_t a, std::size_t b) { return amp[a] > amp[b]; });
  return bins;
}

double content_tolerance(std::span<const double> series) {
  double scale = 0.0;
  for (double v : series) scale += std::abs(v);
  return 1e-9 * (1.0 + scale);
}

std::size_t period_of(std::size_t length, std::size_t bin) {
  const auto p = static_cast<std::size_t>(
      std::llround(static_cast<double>(length) / static_cast<double>(bin)));
  return std::clamp<std::size_t>(p, 2, length);
}

}  // namespace

std::vector<double> amplitude_spectrum(std::span<const double> series) {
  return amplitudes(make_twiddles(series.size()), series);
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                     std::sin(angle * static_cast<double>(k)));
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& v : data) v /= static_cast<double>(n);
  }
}

PeriodSet detect_periods(std::span<const double> window, std::size_t channels, std::size_t k) {
  if (channels == 0 || window.size() % channels != 0) {
    throw std::invalid_argument("detect_periods: window size is not a multiple of channels");
  }
  const std::size_t length = window.size() / channels;
  if (length < 4) throw std::invalid_argument("detect_periods: need at least 4 timesteps");
  if (k == 0) throw std::invalid_argument("detect_periods: k must be positive");

  const auto series = channel_mean(window, length, channels);
  const auto amp = amplitude_spectrum(series);
  const auto ranked = rank_bins(amp);

  PeriodSet out;
  if (ranked.empty() || amp[ranked.front()] <= content_tolerance(series)) {
    out.periods = {length};
    out.amplitudes = {0.0};
    out.frequencies = {0};
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    out.frequencies.push_back(ranked[i]);
    out.periods.push_back(period_of(length, ranked[i]));
    out.amplitudes.push_back(amp[ranked[i]]);
  }
  return out;
}

BatchPeriods detect_batch_periods(std::span<const double> batch, std::size_t samples,
                                  std::size_t length, std::size_t channels, std::size_t k) {
  if (batch.size() != samples * length * channels) {
    throw std::invalid_argument("detect_batch_periods: size mismatch");
  }
  if (length < 4 || k == 0) throw std::invalid_argument("detect_batch_periods: bad arguments");
  const auto tw = make_twiddles(length);
  const std::size_t bins = length / 2 + 1;
  std::vector<double> per_sample(samples * bins);
  std::vector<double> avg(bins, 0.0);
  double tolerance = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const auto series = channel_mean(batch.subspan(n * length * channels, length * channels),
                                     length, channels);
    tolerance = std::max(tolerance, content_tolerance(series));
    const auto amp = amplitudes(tw, series);
    std::copy(amp.begin(), amp.end(), per_sample.begin() + static_cast<std::ptrdiff_t>(n * bins));
    for (std::size_t f = 0; f < bins; ++f) avg[f] += amp[f] / static_cast<double>(samples);
  }
  const auto ranked = rank_bins(avg);

  BatchPeriods out;
  if (ranked.empty() || avg[ranked.front()] <= tolerance) {
    out.periods = {length};
    out.weights.assign(samples, 1.0);
    return out;
  }
  const std::size_t chosen = std::min(k, ranked.size());
  for (std::size_t i = 0; i < chosen; ++i) out.periods.push_back(period_of(length, ranked[i]));
  out.weights.resize(samples * chosen);
  for (std::size_t n = 0; n < samples; ++n) {
    double m = -INFINITY;
    for (std::size_t i = 0; i < chosen; ++i) m = std::max(m, per_sample[n * bins + ranked[i]]);
    double total = 0.0;
    for (std::size_t i = 0; i < chosen; ++i) {
      total += (out.weights[n * chosen + i] = std::exp(per_sample[n * bins + ranked[i]] - m));
    }
    for (std::size_t i = 0; i < chosen; ++i) out.weights[n * chosen + i] /= total;
  }
  return out;
}

}  // namespace tsmi::backbone
