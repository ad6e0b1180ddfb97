// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "tsmi/data/dataset.hpp"
#include "tsmi/text/description.hpp"
#include "tsmi/trainer/trainer.hpp"

namespace tsmi::trainer {

/// Invalid or unknown configuration entries.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSection {
  std::string path;  // CSV; empty selects the synthetic generator
  bool timestamp_column = true;
  data::SplitConfig split;
  std::size_t test_stride = 1;
};

struct EmbeddingSection {
  std::string path;  // LTSE file; empty selects the fallback embedder
  std::size_t fallback_dim = 4096;
  std::uint64_t fallback_seed = 0;
  bool normalize = true;
};

/// Everything a command reads from --config.
struct RunConfig {
  TrainConfig train;
  text::TemplateConfig templ;
  DataSection data;
  EmbeddingSection embeddings;
  data::SynthParams synth;
  std::string output_dir = "out";
};

nlohmann::ordered_json train_config_to_json(const TrainConfig& config);
/// Unknown keys and wrongly typed values raise ConfigError.
void apply_train_config(const nlohmann::json& j, TrainConfig& config);

nlohmann::ordered_json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
/// Missing file is a ConfigError as well.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace tsmi::trainer
