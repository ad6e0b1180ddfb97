// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

// tsmi command-line tool. Results go to stdout as one JSON document,
// diagnostics to stderr. Exit codes: 0 ok, 1 failed check or diverged run,
// 2 configuration error, 3 I/O error.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tsmi/backbone/checkpoint.hpp"
#include "tsmi/check/gradcheck.hpp"
#include "tsmi/common/rng.hpp"
#include "tsmi/data/dataset.hpp"
#include "tsmi/text/embedding.hpp"
#include "tsmi/trainer/analysis.hpp"
#include "tsmi/trainer/config_io.hpp"
#include "tsmi/trainer/pipeline.hpp"
#include "tsmi/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace tsmi;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kIo = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<double> lambda;
  std::optional<std::string> out;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--config", c.config, "JSON config file");
  cmd.add_option("--seed", c.seed, "Run seed (training, synthetic data and fallback embeddings)");
  cmd.add_option("--variant", c.variant, "full|no_mutual|no_reweight|no_template|static|backbone_only");
  cmd.add_option("--lambda", c.lambda, "Weight of the static variant");
  cmd.add_option("--out", c.out, "Output directory");
}

trainer::RunConfig load(const Common& c) {
  trainer::RunConfig cfg = c.config.empty() ? trainer::RunConfig{} : trainer::load_run_config(c.config);
  if (c.seed) {
    cfg.train.seed = *c.seed;
    cfg.synth.seed = *c.seed;
    cfg.embeddings.fallback_seed = *c.seed;
  }
  if (c.variant) cfg.train.variant = trainer::parse_variant(*c.variant);
  if (c.lambda) cfg.train.lambda = *c.lambda;
  if (c.out) cfg.output_dir = *c.out;
  cfg.train.validate();
  return cfg;
}

fs::path out_dir(const trainer::RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) throw data::IoError("cannot write " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw data::IoError("cannot rename into " + path.string() + ": " + ec.message());
}

int cmd_describe(const Common& c) {
  const auto cfg = load(c);
  const auto prepared = trainer::prepare_data(cfg);
  const auto descriptions = trainer::training_descriptions(cfg, prepared.train);
  const fs::path path = out_dir(cfg) / "descriptions.jsonl";
  text::write_descriptions(descriptions, path);
  std::cout << ojson{{"count", descriptions.size()}, {"path", path.string()}}.dump() << '\n';
  return kOk;
}

int cmd_embed_fallback(const Common& c, const std::string& descriptions_path, std::optional<std::size_t> dim) {
  const auto cfg = load(c);
  const fs::path dir = out_dir(cfg);
  const fs::path input = descriptions_path.empty() ? dir / "descriptions.jsonl" : fs::path(descriptions_path);
  const auto descriptions = text::read_descriptions(input);
  const std::size_t d = dim.value_or(cfg.embeddings.fallback_dim);
  if (d == 0 || d > UINT32_MAX) throw trainer::ConfigError("--dim must be in [1, 2^32)");
  text::EmbeddingTable table(static_cast<std::uint32_t>(d));
  std::size_t duplicates = 0;
  for (const auto& desc : descriptions) {
    if (table.contains(desc.key)) {
      ++duplicates;
      continue;
    }
    table.insert(desc.key, text::fallback_embed(desc, d, cfg.embeddings.fallback_seed));
  }
  if (duplicates) std::cerr << "embed-fallback: collapsed " << duplicates << " duplicate description(s)\n";
  const fs::path path = dir / "embeddings.ltse";
  text::write_embedding_file(table, path);
  std::cout << ojson{{"entries", table.size()}, {"duplicates", duplicates}, {"dim", d}, {"path", path.string()}}.dump()
            << '\n';
  return kOk;
}

int cmd_train(const Common& c) {
  const auto cfg = load(c);
  const fs::path dir = out_dir(cfg);
  const auto prepared = trainer::prepare_data(cfg);
  const auto source = trainer::make_text_source(cfg);
  std::cerr << "train: variant " << trainer::variant_name(cfg.train.variant) << ", " << cfg.train.iterations
            << " iterations, text dim " << source.embedder.dim() << '\n';
  auto result = trainer::train(cfg.train, prepared.train, source);
  auto& report = result.report;
  if (report.status == "ok") {
    report.test = trainer::evaluate(result.state.theta, cfg.train.backbone, prepared.test, cfg.data.test_stride,
                                    cfg.train.batch_size, cfg.train.mask_ratio, mix_seed(cfg.train.seed, 7));
  }
  const auto& s = result.state;
  backbone::write_checkpoint(
      backbone::merge(backbone::merge(backbone::with_prefix(s.theta, "backbone/"), backbone::with_prefix(s.beta, "disc/")),
                      backbone::with_prefix(s.alpha, "wnet/")),
      dir / "checkpoint.ltsp");
  const std::string json = trainer::report_to_json(report);
  write_text(dir / "report.json", json + "\n");
  std::cout << json << '\n';
  std::cerr << "train: " << report.iterations_run << " iterations in " << report.seconds << " s\n";
  if (report.status != "ok") {
    std::cerr << "train: " << report.status << ": " << report.message << '\n';
    return kFailed;
  }
  return kOk;
}

ad::ParameterSet section(const ad::ParameterSet& all, const std::string& prefix) {
  return backbone::strip_prefix(all, prefix);
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& predictions,
             const std::string& targets) {
  const auto cfg = load(c);
  trainer::Metrics m;
  if (!predictions.empty() || !targets.empty()) {
    if (predictions.empty() || targets.empty()) {
      throw trainer::ConfigError("--predictions and --targets go together");
    }
    const auto p = data::load_csv(predictions, cfg.data.timestamp_column);
    const auto t = data::load_csv(targets, cfg.data.timestamp_column);
    if (p.channels() != t.channels() || p.length() != t.length()) {
      throw data::DataError("predictions and targets differ in shape");
    }
    m = trainer::compute_metrics(p.values, t.values);
  } else {
    if (checkpoint.empty()) throw trainer::ConfigError("eval needs --checkpoint or --predictions/--targets");
    const auto theta = section(backbone::read_checkpoint(checkpoint), "backbone/");
    const auto prepared = trainer::prepare_data(cfg);
    m = trainer::evaluate(theta, cfg.train.backbone, prepared.test, cfg.data.test_stride, cfg.train.batch_size,
                          cfg.train.mask_ratio, mix_seed(cfg.train.seed, 7));
  }
  std::cout << "{\"mse\":" << number(m.mse) << ",\"mae\":" << number(m.mae) << "}\n";
  return kOk;
}

int cmd_synth(const Common& c) {
  const auto cfg = load(c);
  const auto series = data::synth_generate(cfg.synth);
  const fs::path path = out_dir(cfg) / "synth.csv";
  data::write_csv(series, path);
  std::cout << ojson{{"rows", series.length()}, {"path", path.string()}}.dump() << '\n';
  return kOk;
}

int cmd_analyze(const Common& c, const std::string& checkpoint, double grid_max, std::size_t grid_points) {
  const auto cfg = load(c);
  if (checkpoint.empty()) throw trainer::ConfigError("analyze needs --checkpoint");
  if (grid_points < 2 || !(grid_max > 0.0)) throw trainer::ConfigError("weight grid needs >= 2 points and max > 0");
  const fs::path dir = out_dir(cfg);
  const auto all = backbone::read_checkpoint(checkpoint);
  const auto prepared = trainer::prepare_data(cfg);
  const double cka = trainer::layer_cka(section(all, "backbone/"), cfg.train.backbone, prepared.test,
                                        cfg.data.test_stride, cfg.train.batch_size);
  ojson result{{"cka", cka}, {"weight_curve", nullptr}};
  const auto alpha = section(all, "wnet/");
  if (alpha.size() > 0) {
    std::vector<double> grid(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
      grid[i] = grid_max * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    }
    const fs::path path = dir / "weight_curve.csv";
    trainer::write_weight_curve_csv(trainer::weight_curve(alpha, grid), path);
    result["weight_curve"] = path.string();
  } else {
    std::cerr << "analyze: checkpoint has no weighting network; no weight curve written\n";
  }
  std::cout << result.dump() << '\n';
  return kOk;
}

int cmd_gradcheck(const Common& c) {
  const auto cfg = load(c);
  const auto report = check::run_gradcheck_suite(cfg.train.seed);
  for (const auto& r : report.checks) {
    if (!r.passed()) std::cerr << "gradcheck FAILED: " << r.name << " error " << r.error << '\n';
  }
  std::cout << ojson{{"passed", report.passed()},
                     {"checks", report.checks.size()},
                     {"max_error", report.max_error},
                     {"tolerance", check::kGradcheckTolerance},
                     {"seconds", report.seconds}}
                   .dump()
            << '\n';
  return report.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time series training with text-aligned mutual information and learned sample weights"};
  app.require_subcommand(1);

  Common common;
  std::string descriptions, checkpoint, predictions, targets;
  std::optional<std::size_t> dim;
  double grid_max = 5.0;
  std::size_t grid_points = 101;

  auto* describe = app.add_subcommand("describe", "Write one description per training window and channel");
  auto* embed = app.add_subcommand("embed-fallback", "Embed a descriptions file with the fallback embedder");
  embed->add_option("--descriptions", descriptions, "Descriptions JSONL (default <out>/descriptions.jsonl)");
  embed->add_option("--dim", dim, "Embedding dimension (default embeddings.fallback_dim)");
  auto* train = app.add_subcommand("train", "Train a model and write report.json and checkpoint.ltsp");
  auto* eval = app.add_subcommand("eval", "Print test MSE/MAE of a checkpoint, or of a predictions file");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train");
  eval->add_option("--predictions", predictions, "Predictions CSV");
  eval->add_option("--targets", targets, "Targets CSV");
  auto* synth = app.add_subcommand("synth", "Write the synthetic sum-of-sinusoids series as CSV");
  auto* analyze = app.add_subcommand("analyze", "Layer CKA on the test split and the weight curve");
  analyze->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  analyze->add_option("--grid-max", grid_max, "Largest loss on the weight-curve grid");
  analyze->add_option("--grid-points", grid_points, "Number of grid points");
  auto* gradcheck = app.add_subcommand("gradcheck", "Run the finite-difference gradient suite");
  for (auto* cmd : {describe, embed, train, eval, synth, analyze, gradcheck}) add_common(*cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*describe) return cmd_describe(common);
    if (*embed) return cmd_embed_fallback(common, descriptions, dim);
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(common, checkpoint, predictions, targets);
    if (*synth) return cmd_synth(common);
    if (*analyze) return cmd_analyze(common, checkpoint, grid_max, grid_points);
    if (*gradcheck) return cmd_gradcheck(common);
  } catch (const trainer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const text::MissingKeyError& e) {
    std::cerr << "config error: " << e.what() << " (embeddings do not cover the training descriptions)\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const data::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const data::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kFailed;
}
