// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsmi::text {

/// FNV-1a 64-bit over the UTF-8 bytes.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string key_hex(std::uint64_t key);
/// Inverse of key_hex; throws std::invalid_argument.
std::uint64_t parse_key_hex(std::string_view hex);

struct Description {
  std::uint64_t key = 0;
  std::string text;

  static Description of(std::string text);
};

struct TemplateConfig {
  std::string task_description = "A time series";
  int precision = 4;
  bool include_content = true;
  bool include_stats = true;
  bool include_min_max_median = true;
  bool include_lags = true;
  std::size_t lag_count = 5;
  /// false: the text is only the comma-joined values, no context or statistics.
  bool use_template = true;

  void validate() const;
};

/// Fixed-point with `precision` decimals; negative zero prints unsigned.
std::string format_fixed(double value, int precision);

/// Median; the mean of the two middle values for even sizes.
double median(std::span<const double> values);

struct LagResult {
  std::vector<std::size_t> lags;
  bool degenerate = false;
};

/// Lags in [1, L/2] with the largest circular autocorrelation of the
/// mean-removed series, best first. Values within 1e-9 of r(0) of each other
/// count as tied and the smaller lag wins. A constant series gives 1..k with
/// the degenerate flag set. Requires L >= 2k.
LagResult compute_lags(std::span<const double> series, std::size_t k);

/// Pure function of (window, cfg). Throws std::invalid_argument on
/// non-finite values.
Description render_description(std::span<const double> window, const TemplateConfig& cfg);

/// One description per channel of an L x C row-major window.
std::vector<Description> describe_window(std::span<const double> window, std::size_t channels,
                                         const TemplateConfig& cfg);

}  // namespace tsmi::text
