// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/trainer/study.hpp"

#include <cmath>

#include "tsmi/common/rng.hpp"

namespace tsmi::trainer {

StudyConfig synthetic_study_defaults() {
  StudyConfig c;
  auto& b = c.train.backbone;
  b.kind = backbone::Kind::kPeriodMix;
  b.task = data::Task::kForecast;
  b.input_length = 96;
  b.horizon = 336;
  b.channels = 1;
  b.d_model = 16;
  b.layers = 1;
  b.top_k = 2;
  c.train.batch_size = 64;
  c.train.validation_batch = 64;
  c.train.iterations = 1000;
  c.train.eval_stride = 16;
  c.train_series = data::SynthParams{};
  c.test_series = data::SynthParams::test_defaults();
  return c;
}

StudyData make_study_data(const StudyConfig& config, std::uint64_t seed) {
  auto train_params = config.train_series;
  train_params.seed = mix_seed(seed, 0x747261696eULL);
  auto test_params = config.test_series;
  test_params.length = config.test_length;
  test_params.seed = mix_seed(seed, 0x74657374ULL);

  const auto series = data::synth_generate(train_params);
  const auto split = static_cast<std::size_t>(
      std::llround(static_cast<double>(series.length()) * (1.0 - config.validation_fraction)));
  StudyData out;
  out.train.train_raw = series.segment(0, split);
  const auto stats = data::fit_normalization(out.train.train_raw);
  out.train.train = data::normalize(out.train.train_raw, stats);
  out.train.validation = data::normalize(series.segment(split, series.length()), stats);
  out.test = data::normalize(data::synth_generate(test_params), stats);
  return out;
}

StudyRun run_study(const StudyConfig& config, Variant variant, std::uint64_t seed) {
  TrainConfig cfg = config.train;
  cfg.variant = variant;
  cfg.seed = seed;
  const auto data = make_study_data(config, seed);
  TextSource text{text::TextEmbedder::fallback(config.text_dim, seed), {}};
  text.templ.task_description = "A synthetic sum of sinusoids";
  StudyRun run{train(cfg, data.train, text), {}};
  run.test = evaluate(run.result.state.theta, cfg.backbone, data.test, config.test_stride, cfg.batch_size);
  run.result.report.test = run.test;
  return run;
}

}  // namespace tsmi::trainer
