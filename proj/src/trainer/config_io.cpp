// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/trainer/config_io.hpp"

#include <fstream>
#include <set>

namespace tsmi::trainer {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Reads typed keys from one JSON object and rejects any it was not asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      const auto& v = j_.at(key);
      if (!v.is_number_unsigned()) throw ConfigError(where_ + "." + key + ": expected a non-negative integer");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename Fn>
  void nested(const char* key, Fn&& fn) {
    seen_.insert(key);
    if (j_.contains(key)) fn(Section(j_.at(key), where_ + "." + key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename Fn>
void guarded(const std::string& what, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

std::string task_name(data::Task t) { return t == data::Task::kImpute ? "impute" : "forecast"; }

data::Task parse_task(const std::string& s) {
  if (s == "forecast") return data::Task::kForecast;
  if (s == "impute") return data::Task::kImpute;
  throw ConfigError("task must be forecast or impute, got '" + s + "'");
}

}  // namespace

ojson train_config_to_json(const TrainConfig& c) {
  const auto& b = c.backbone;
  return ojson{{"task", task_name(b.task)},
               {"backbone", backbone::kind_name(b.kind)},
               {"input_length", b.input_length},
               {"horizon", b.horizon},
               {"channels", b.channels},
               {"d_model", b.d_model},
               {"layers", b.layers},
               {"top_k", b.top_k},
               {"instance_norm", b.instance_norm},
               {"batch_size", c.batch_size},
               {"iterations", c.iterations},
               {"learning_rate", c.learning_rate},
               {"optimizer", c.optimizer},
               {"eta0_first_epoch", c.eta0_first_epoch},
               {"eta0_later", c.eta0_later},
               {"eta2", c.eta2},
               {"discriminator_every", c.discriminator_every},
               {"validation_batch", c.validation_batch},
               {"variant", variant_name(c.variant)},
               {"lambda", c.lambda},
               {"mask_ratio", c.mask_ratio},
               {"divergence_limit", c.divergence_limit},
               {"eval_stride", c.eval_stride},
               {"seed", c.seed}};
}

namespace {

void read_train(Section& s, TrainConfig& c) {
  auto& b = c.backbone;
  std::string task = task_name(b.task), kind = backbone::kind_name(b.kind), variant = variant_name(c.variant);
  s.read("task", task);
  s.read("backbone", kind);
  s.read("input_length", b.input_length);
  s.read("horizon", b.horizon);
  s.read("channels", b.channels);
  s.read("d_model", b.d_model);
  s.read("layers", b.layers);
  s.read("top_k", b.top_k);
  s.read("instance_norm", b.instance_norm);
  s.read("batch_size", c.batch_size);
  s.read("iterations", c.iterations);
  s.read("learning_rate", c.learning_rate);
  s.read("optimizer", c.optimizer);
  s.read("eta0_first_epoch", c.eta0_first_epoch);
  s.read("eta0_later", c.eta0_later);
  s.read("eta2", c.eta2);
  s.read("discriminator_every", c.discriminator_every);
  s.read("validation_batch", c.validation_batch);
  s.read("variant", variant);
  s.read("lambda", c.lambda);
  s.read("mask_ratio", c.mask_ratio);
  s.read("divergence_limit", c.divergence_limit);
  s.read("eval_stride", c.eval_stride);
  s.read("seed", c.seed);
  b.task = parse_task(task);
  guarded("backbone", [&] { b.kind = backbone::parse_kind(kind); });
  guarded("variant", [&] { c.variant = parse_variant(variant); });
}

}  // namespace

void apply_train_config(const json& j, TrainConfig& config) {
  Section s(j, "config");
  read_train(s, config);
  s.finish();
}

ojson run_config_to_json(const RunConfig& c) {
  ojson j = train_config_to_json(c.train);
  const auto& t = c.templ;
  j["template"] = {{"task_description", t.task_description},
                   {"precision", t.precision},
                   {"include_content", t.include_content},
                   {"include_stats", t.include_stats},
                   {"include_min_max_median", t.include_min_max_median},
                   {"include_lags", t.include_lags},
                   {"lag_count", t.lag_count},
                   {"use_template", t.use_template}};
  j["data"] = {{"path", c.data.path},
               {"timestamp_column", c.data.timestamp_column},
               {"split", {c.data.split.train, c.data.split.validation, c.data.split.test}},
               {"test_stride", c.data.test_stride}};
  j["embeddings"] = {{"path", c.embeddings.path},
                     {"fallback_dim", c.embeddings.fallback_dim},
                     {"fallback_seed", c.embeddings.fallback_seed},
                     {"normalize", c.embeddings.normalize}};
  j["synth"] = {{"weights", c.synth.weights},
                {"frequencies", c.synth.frequencies},
                {"phases", c.synth.phases},
                {"noise", c.synth.noise},
                {"length", c.synth.length},
                {"seed", c.synth.seed}};
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Section s(j, "config");
  read_train(s, c.train);
  s.nested("template", [&](Section t) {
    t.read("task_description", c.templ.task_description);
    t.read("precision", c.templ.precision);
    t.read("include_content", c.templ.include_content);
    t.read("include_stats", c.templ.include_stats);
    t.read("include_min_max_median", c.templ.include_min_max_median);
    t.read("include_lags", c.templ.include_lags);
    t.read("lag_count", c.templ.lag_count);
    t.read("use_template", c.templ.use_template);
    t.finish();
  });
  s.nested("data", [&](Section d) {
    std::vector<double> split{c.data.split.train, c.data.split.validation, c.data.split.test};
    d.read("path", c.data.path);
    d.read("timestamp_column", c.data.timestamp_column);
    d.read("split", split);
    d.read("test_stride", c.data.test_stride);
    d.finish();
    if (split.size() != 3) throw ConfigError("config.data.split: expected [train, validation, test]");
    c.data.split = {split[0], split[1], split[2]};
  });
  s.nested("embeddings", [&](Section e) {
    e.read("path", c.embeddings.path);
    e.read("fallback_dim", c.embeddings.fallback_dim);
    e.read("fallback_seed", c.embeddings.fallback_seed);
    e.read("normalize", c.embeddings.normalize);
    e.finish();
  });
  s.nested("synth", [&](Section y) {
    y.read("weights", c.synth.weights);
    y.read("frequencies", c.synth.frequencies);
    y.read("phases", c.synth.phases);
    y.read("noise", c.synth.noise);
    y.read("length", c.synth.length);
    y.read("seed", c.synth.seed);
    y.finish();
  });
  s.read("output_dir", c.output_dir);
  s.finish();

  guarded("config", [&] { c.train.validate(); });
  guarded("config.template", [&] { c.templ.validate(); });
  guarded("config.data.split", [&] { c.data.split.validate(); });
  if (c.data.test_stride == 0) throw ConfigError("config.data.test_stride must be positive");
  if (c.embeddings.fallback_dim == 0) throw ConfigError("config.embeddings.fallback_dim must be positive");
  const auto& y = c.synth;
  if (y.weights.empty() || y.weights.size() != y.frequencies.size() || y.weights.size() != y.phases.size()) {
    throw ConfigError("config.synth: weights, frequencies and phases must be non-empty and equally long");
  }
  if (y.length == 0) throw ConfigError("config.synth.length must be positive");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace tsmi::trainer
