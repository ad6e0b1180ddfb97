// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "tsmi/data/dataset.hpp"
#include "tsmi/trainer/trainer.hpp"

namespace tsmi::trainer {

/// Sum-of-sinusoids training series, shifted-frequency test series.
struct StudyConfig {
  TrainConfig train;
  data::SynthParams train_series;
  data::SynthParams test_series;
  std::size_t test_length = 2000;
  double validation_fraction = 0.1;
  std::size_t text_dim = 4096;
  std::size_t test_stride = 1;
};

/// L 96, H 336, batch 64, 1000 iterations; train series of length 10000.
StudyConfig synthetic_study_defaults();

struct StudyData {
  TrainData train;
  data::TimeSeriesDataset test;  // normalized with the training statistics
};

/// Series noise is drawn from `seed`.
StudyData make_study_data(const StudyConfig& config, std::uint64_t seed);

struct StudyRun {
  TrainResult result;
  Metrics test;
};

StudyRun run_study(const StudyConfig& config, Variant variant, std::uint64_t seed);

}  // namespace tsmi::trainer
