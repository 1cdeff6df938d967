// SPDX-License-Identifier: Apache-2.0
// lgi: generate synthetic corpora, train, evaluate, check gradients and
// score baselines.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgi/checkpoint.hpp"
#include "lgi/data_synth.hpp"
#include "lgi/errors.hpp"
#include "lgi/gradcheck_suite.hpp"
#include "lgi/metrics.hpp"
#include "lgi/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr double kGradTolerance = 1e-4;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw lgi::DataError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw lgi::FormatError(path.filename().string() + ": " + e.what(), e.byte);
  }
}

// Turns the leftover "--key value" / "--key=value" arguments into config
// overrides.
void apply_overrides(lgi::TrainConfig& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      throw CLI::ExtrasError("unexpected argument '" + arg + "'", CLI::ExitCodes::ExtrasError);
    }
    std::string key = arg.substr(2), value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      throw CLI::ExtrasError("missing value for --" + key, CLI::ExitCodes::ExtrasError);
    }
    try {
      lgi::apply_override(config, key, value);
    } catch (const lgi::ConfigInvalid& e) {
      throw CLI::ValidationError(e.what());
    }
  }
}

int run_generate(const fs::path& out, const fs::path& config_path, std::size_t n_train,
                 std::size_t n_val, const std::optional<std::uint64_t>& seed) {
  lgi::SynthConfig config;
  if (!config_path.empty()) config = read_json_file(config_path).get<lgi::SynthConfig>();
  if (seed) config.seed = *seed;
  const lgi::Corpus corpus = lgi::generate(config, n_train, n_val);
  lgi::save_corpus(corpus, out);
  std::cout << corpus.manifest.dump(2) << '\n';
  return 0;
}

int run_train(const fs::path& data, const fs::path& out, const fs::path& config_path,
              const std::vector<std::string>& extras) {
  lgi::TrainConfig config;
  if (!config_path.empty()) config = read_json_file(config_path).get<lgi::TrainConfig>();
  apply_overrides(config, extras);
  if (const char* env = std::getenv("LGI_SEED")) lgi::apply_override(config, "seed", env);

  const lgi::LoadedCorpus corpus = lgi::load_corpus(data);
  if (corpus.train.empty() || corpus.val.empty()) throw lgi::DataError("corpus has an empty split");
  config.model.vocab_size = corpus.vocab.size();
  config.model.d_v = corpus.train.front().features.dims;
  config.validate();

  const auto train_set = lgi::prepare(corpus.train, corpus.vocab, config.model.segments);
  const auto val_set = lgi::prepare(corpus.val, corpus.vocab, config.model.segments);

  fs::create_directories(out);
  lgi::TrainOptions options;
  options.checkpoint_path = out / "checkpoint.bin";
  options.log_path = out / "metrics.jsonl";
  options.on_epoch = [](const lgi::EpochLog& log) {
    std::cerr << "epoch " << log.epoch << "  loss " << log.train.total << "  l_reg " << log.train.reg
              << "  l_tag " << log.train.tag << "  l_dqa " << log.train.dqa << "  val R@0.5 "
              << log.val.recall(0.5) << "  mIoU " << log.val.miou << std::endl;
  };
  const lgi::TrainResult result = lgi::train(config, train_set, val_set, corpus.vocab, options);

  json summary = {{"config", config},
                  {"best_epoch", result.best_epoch},
                  {"best_val", lgi::to_json(result.best_val)},
                  {"checkpoint", options.checkpoint_path->string()}};
  std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int run_eval(const fs::path& checkpoint_path, const fs::path& data, const std::string& split,
             bool csv) {
  const lgi::Checkpoint ck = lgi::load_checkpoint(checkpoint_path);
  const auto samples = lgi::load_split(data / (split + ".jsonl"), data / "features");
  if (samples.empty()) throw lgi::DataError("split '" + split + "' is empty");
  const auto prepared = lgi::prepare(samples, ck.vocab, ck.config.model.segments);
  const lgi::Evaluation eval = lgi::evaluate_model(ck.params, ck.config.model, prepared);
  if (csv) {
    std::cout << lgi::csv_header(eval.report) << '\n' << lgi::to_csv(eval.report) << '\n';
  } else {
    std::cout << lgi::to_json(eval.report).dump(2) << '\n';
  }
  return 0;
}

int run_gradcheck(const lgi::ModelCheckShape& shape, double eps, std::uint64_t seed,
                  std::size_t points) {
  double worst = 0.0;
  auto report = [&](const lgi::GradCheckCase& c) {
    worst = std::max(worst, c.max_rel_error);
    std::cout << (c.max_rel_error < kGradTolerance ? "ok   " : "FAIL ") << c.name
              << "  max_rel_error=" << c.max_rel_error << "  coords=" << c.coords << '\n';
  };
  for (const auto& c : lgi::check_primitives(points, seed, eps)) report(c);
  for (const auto& c : lgi::check_models(shape, seed, eps)) report(c);
  std::cout << "max relative error: " << worst << '\n';
  return worst < kGradTolerance ? 0 : kExitNumeric;
}

int run_baseline(const std::string& kind_name, const fs::path& data, std::uint64_t seed,
                 const std::string& split) {
  const lgi::BaselineKind kind = lgi::parse_baseline(kind_name);
  const auto samples = lgi::load_split(data / (split + ".jsonl"), data / "features");
  std::vector<lgi::Interval> truths;
  for (const auto& s : samples) truths.push_back(s.gt);

  json out = {{"kind", kind_name}, {"split", split}};
  std::vector<lgi::Interval> predictions;
  if (kind == lgi::BaselineKind::kRandom) {
    predictions = lgi::random_intervals(truths.size(), seed);
    out["seed"] = seed;
  } else {
    std::vector<lgi::Interval> fit;
    for (const auto& s : lgi::load_split(data / "train.jsonl", data / "features")) fit.push_back(s.gt);
    const lgi::Interval prior = lgi::fit_center_prior(fit);
    predictions.assign(truths.size(), prior);
    out["interval"] = {prior.start, prior.end};
  }
  out["report"] = lgi::to_json(lgi::evaluate(predictions, truths));
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LGI temporal grounding: data, training and evaluation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate-data", "Write a synthetic corpus");
  fs::path gen_out, gen_config;
  std::size_t n_train = 2000, n_val = 400;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--config", gen_config, "Synthesis config (JSON)");
  gen->add_option("--train", n_train, "Training samples");
  gen->add_option("--val", n_val, "Validation samples");
  gen->add_option("--seed", gen_seed, "Generator seed");

  auto* train = app.add_subcommand("train", "Train a model; extra --key value pairs override the config");
  fs::path train_data, train_out, train_config;
  train->add_option("--data", train_data, "Corpus directory")->required();
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--config", train_config, "Training config (JSON)");
  train->allow_extras();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  fs::path eval_ckpt, eval_data;
  std::string eval_split = "val";
  bool eval_csv = false;
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--split", eval_split)->check(CLI::IsMember({"train", "val"}));
  eval->add_flag("--csv", eval_csv, "Print a CSV row instead of JSON");

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  lgi::ModelCheckShape shape;
  double eps = 1e-5;
  std::uint64_t grad_seed = 1;
  std::size_t points = 20;
  grad->add_option("--d", shape.d);
  grad->add_option("--t", shape.segments);
  grad->add_option("--l", shape.words);
  grad->add_option("--n", shape.phrases);
  grad->add_option("--eps", eps);
  grad->add_option("--seed", grad_seed);
  grad->add_option("--points", points, "Random points per primitive");

  auto* base = app.add_subcommand("baseline", "Score a baseline predictor");
  std::string base_kind;
  fs::path base_data;
  std::uint64_t base_seed = 1;
  std::string base_split = "val";
  base->add_option("--kind", base_kind)->required()->check(CLI::IsMember({"random", "center_prior"}));
  base->add_option("--data", base_data)->required();
  base->add_option("--seed", base_seed);
  base->add_option("--split", base_split)->check(CLI::IsMember({"train", "val"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return run_generate(gen_out, gen_config, n_train, n_val, gen_seed);
    if (*train) return run_train(train_data, train_out, train_config, train->remaining());
    if (*eval) return run_eval(eval_ckpt, eval_data, eval_split, eval_csv);
    if (*grad) return run_gradcheck(shape, eps, grad_seed, points);
    if (*base) return run_baseline(base_kind, base_data, base_seed, base_split);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const lgi::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const lgi::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const lgi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
