// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/text/description.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "tsmi/backbone/spectral.hpp"

namespace tsmi::text {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string key_hex(std::uint64_t key) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, key >>= 4) out[static_cast<std::size_t>(i)] = kDigits[key & 0xf];
  return out;
}

std::uint64_t parse_key_hex(std::string_view hex) {
  std::uint64_t key = 0;
  if (hex.size() != 16) throw std::invalid_argument("key must be 16 hex digits: '" + std::string(hex) + "'");
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else {
      throw std::invalid_argument("key must be lowercase hex: '" + std::string(hex) + "'");
    }
    key = (key << 4) | static_cast<std::uint64_t>(v);
  }
  return key;
}

Description Description::of(std::string text) {
  Description d;
  d.key = fnv1a64(text);
  d.text = std::move(text);
  return d;
}

void TemplateConfig::validate() const {
  if (precision < 0) throw std::invalid_argument("template precision must be >= 0");
  if (lag_count < 1) throw std::invalid_argument("template lag_count must be >= 1");
}

std::string format_fixed(double value, int precision) {
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
  if (ec != std::errc()) throw std::invalid_argument("value too large to format");
  std::string s(buf, end);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

LagResult compute_lags(std::span<const double> series, std::size_t k) {
  const std::size_t l = series.size();
  if (k == 0 || l < 2 * k) {
    throw std::invalid_argument("compute_lags: need length >= 2k (length " + std::to_string(l) +
                                ", k " + std::to_string(k) + ")");
  }
  double mean = 0.0, energy = 0.0;
  for (double v : series) {
    mean += v;
    energy += v * v;
  }
  mean /= static_cast<double>(l);

  std::size_t n = 1;
  while (n < 2 * l) n <<= 1;
  std::vector<std::complex<double>> z(n);
  for (std::size_t t = 0; t < l; ++t) z[t] = series[t] - mean;
  backbone::fft_inplace(z, false);
  for (auto& v : z) v = std::norm(v);
  backbone::fft_inplace(z, true);

  // Linear autocorrelation folded into the circular one.
  const double r0 = z[0].real();
  LagResult out;
  if (!(r0 > 1e-12 * energy)) {
    for (std::size_t i = 1; i <= k; ++i) out.lags.push_back(i);
    out.degenerate = true;
    return out;
  }
  const std::size_t max_lag = l / 2;
  std::vector<double> r(max_lag + 1);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) r[lag] = z[lag].real() + z[l - lag].real();

  const double tol = 1e-9 * r0;
  std::vector<bool> taken(max_lag + 1, false);
  for (std::size_t pick = 0; pick < k; ++pick) {
    double best = -INFINITY;
    for (std::size_t lag = 1; lag <= max_lag; ++lag)
      if (!taken[lag]) best = std::max(best, r[lag]);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
      if (!taken[lag] && r[lag] >= best - tol) {
        taken[lag] = true;
        out.lags.push_back(lag);
        break;
      }
    }
  }
  return out;
}

Description render_description(std::span<const double> window, const TemplateConfig& cfg) {
  cfg.validate();
  for (double v : window) {
    if (!std::isfinite(v)) throw std::invalid_argument("render_description: non-finite value in window");
  }
  std::string values;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (i) values += ", ";
    values += format_fixed(window[i], cfg.precision);
  }
  if (!cfg.use_template) return Description::of(values);
  std::string text = cfg.task_description + ".";
  if (cfg.include_content) text += " The content is: " + values + ".";
  std::vector<std::string> clauses;
  if (cfg.include_stats && cfg.include_min_max_median && !window.empty()) {
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    clauses.push_back("min value " + format_fixed(*lo, cfg.precision) + ", max value " +
                      format_fixed(*hi, cfg.precision) + ", median value " +
                      format_fixed(median(window), cfg.precision));
  }
  if (cfg.include_stats && cfg.include_lags) {
    const auto lags = compute_lags(window, cfg.lag_count).lags;
    std::string list = "[";
    for (std::size_t i = 0; i < lags.size(); ++i) {
      if (i) list += ", ";
      list += std::to_string(lags[i]);
    }
    clauses.push_back("top " + std::to_string(cfg.lag_count) + " lags " + list + "]");
  }
  if (!clauses.empty()) {
    text += " Input statistics: ";
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (i) text += ", ";
      text += clauses[i];
    }
    text += ".";
  }
  return Description::of(std::move(text));
}

std::vector<Description> describe_window(std::span<const double> window, std::size_t channels,
                                         const TemplateConfig& cfg) {
  if (channels == 0 || window.size() % channels != 0) {
    throw std::invalid_argument("describe_window: window size is not a multiple of channels");
  }
  const std::size_t l = window.size() / channels;
  std::vector<Description> out;
  std::vector<double> series(l);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < l; ++t) series[t] = window[t * channels + c];
    out.push_back(render_description(series, cfg));
  }
  return out;
}

}  // namespace tsmi::text
