// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tsmi/data/dataset.hpp"
#include "tsmi/text/description.hpp"
#include "tsmi/trainer/config_io.hpp"
#include "tsmi/trainer/trainer.hpp"

namespace tsmi::trainer {

struct PreparedData {
  TrainData train;
  data::TimeSeriesDataset test;  // normalized with the training statistics
  data::NormalizationStats stats;
};

/// Loads data.path (or generates config.synth when it is empty), splits it
/// chronologically and normalizes every region with the training statistics.
/// A data.path that does not exist is a ConfigError.
PreparedData prepare_data(const RunConfig& config);

/// Table from embeddings.path, otherwise the fallback embedder.
TextSource make_text_source(const RunConfig& config);

/// One description per (training window, channel), windows ascending.
/// These are exactly the texts the trainer looks up.
std::vector<text::Description> training_descriptions(const RunConfig& config, const TrainData& data);

}  // namespace tsmi::trainer
