// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/trainer/pipeline.hpp"

#include <filesystem>

#include "tsmi/text/embedding.hpp"

namespace tsmi::trainer {

PreparedData prepare_data(const RunConfig& config) {
  data::TimeSeriesDataset series;
  if (config.data.path.empty()) {
    series = data::synth_generate(config.synth);
  } else {
    if (!std::filesystem::exists(config.data.path)) {
      throw ConfigError("config.data.path does not exist: " + config.data.path);
    }
    series = data::load_csv(config.data.path, config.data.timestamp_column);
  }
  if (series.channels() != config.train.backbone.channels) {
    throw ConfigError("config.channels is " + std::to_string(config.train.backbone.channels) + " but the data has " +
                      std::to_string(series.channels()));
  }
  const auto split = data::split_chronological(series, config.data.split);
  PreparedData out;
  out.stats = data::fit_normalization(split.train);
  out.train.train_raw = split.train;
  out.train.train = data::normalize(split.train, out.stats);
  out.train.validation = data::normalize(split.validation, out.stats);
  out.test = data::normalize(split.test, out.stats);
  return out;
}

TextSource make_text_source(const RunConfig& config) {
  const auto& e = config.embeddings;
  TextSource source{e.path.empty() ? text::TextEmbedder::fallback(e.fallback_dim, e.fallback_seed, e.normalize)
                                   : text::TextEmbedder::from_table(text::load_embedding_file(e.path), e.normalize),
                    config.templ};
  return source;
}

std::vector<text::Description> training_descriptions(const RunConfig& config, const TrainData& data) {
  const auto& b = config.train.backbone;
  const auto& raw = data.train_raw;
  const std::size_t horizon = b.task == data::Task::kForecast ? b.horizon : 0;
  const std::size_t c = raw.channels();
  auto templ = config.templ;
  if (config.train.variant == Variant::kNoTemplate) templ.use_template = false;
  std::vector<text::Description> out;
  if (raw.length() < b.input_length + horizon) return out;
  for (std::size_t s : data::window_starts(raw.length(), b.input_length, horizon, 1)) {
    std::span<const double> window(raw.values.data() + s * c, b.input_length * c);
    for (auto& d : text::describe_window(window, c, templ)) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace tsmi::trainer
