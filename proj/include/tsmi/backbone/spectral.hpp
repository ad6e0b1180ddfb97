// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tsmi::backbone {

/// Amplitudes |X_f| of the real DFT, f = 0 .. L/2.
std::vector<double> amplitude_spectrum(std::span<const double> series);

/// In-place radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

/// Dominant periods of a window, sorted by descending amplitude.
struct PeriodSet {
  std::vector<std::size_t> periods;
  std::vector<double> amplitudes;
  std::vector<std::size_t> frequencies;  // DFT bin of each period
  bool degenerate = false;
};

/// Period detection on the channel-mean of an L x C row-major window. The
/// zero-frequency bin is excluded. A window with no spectral content off DC
/// yields the single period L with amplitude 0.
PeriodSet detect_periods(std::span<const double> window, std::size_t channels, std::size_t k);

/// Periods shared by a batch (N x L x C, row-major): bins are ranked by the
/// batch-mean amplitude; `weights` (N x periods) is the per-sample softmax of
/// amplitudes at the chosen bins.
struct BatchPeriods {
  std::vector<std::size_t> periods;
  std::vector<double> weights;
};

BatchPeriods detect_batch_periods(std::span<const double> batch, std::size_t samples,
                                  std::size_t length, std::size_t channels, std::size_t k);

}  // namespace tsmi::backbone
