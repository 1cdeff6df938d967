// SPDX-License-Identifier: Apache-2.0
#include "lgi/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "lgi/errors.hpp"
#include "lgi/ops.hpp"

namespace lgi {

std::vector<PreparedSample> prepare(std::span<const GroundingSample> samples,
                                    const Vocabulary& vocab, std::size_t steps) {
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    SampledVideo sampled = sample_segments(s.features, steps);
    out.push_back({vocab.encode(s.tokens), std::move(sampled.features), std::move(sampled.valid), s.gt});
  }
  return out;
}

double attention_overlap(const Tensor& attn) {
  if (!attn.defined() || attn.rank() != 2 || attn.dim(1) < 2) return 0.0;
  const std::size_t rows = attn.dim(0), cols = attn.dim(1);
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < cols; ++a) {
    for (std::size_t b = a + 1; b < cols; ++b) {
      double dot = 0.0;
      for (std::size_t r = 0; r < rows; ++r) dot += attn.at(r, a) * attn.at(r, b);
      total += dot;
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

Evaluation evaluate_model(const ModelParams& params, const ModelConfig& config,
                          std::span<const PreparedSample> samples) {
  NoGradGuard no_grad;
  Evaluation eval;
  std::vector<Interval> truths;
  truths.reserve(samples.size());
  double overlap = 0.0;
  for (const auto& s : samples) {
    const ForwardOutput out = forward(params, config, s.input());
    eval.predictions.push_back(canonicalize(out.prediction.start(), out.prediction.end()));
    truths.push_back(s.gt);
    overlap += attention_overlap(out.phrases.attn);
  }
  eval.report = evaluate(eval.predictions, truths);
  eval.attention_overlap = samples.empty() ? 0.0 : overlap / static_cast<double>(samples.size());
  return eval;
}

nlohmann::json to_json(const EpochLog& log) {
  return {{"epoch", log.epoch},
          {"l_reg", log.train.reg},
          {"l_tag", log.train.tag},
          {"l_dqa", log.train.dqa},
          {"loss", log.train.total},
          {"val", to_json(log.val)},
          {"attention_overlap", log.attention_overlap}};
}

TrainResult train(const TrainConfig& config, std::span<const PreparedSample> train_set,
                  std::span<const PreparedSample> val_set, const Vocabulary& vocab,
                  const TrainOptions& options) {
  config.validate();
  if (train_set.empty() || val_set.empty()) throw EmptyInput("train: empty split");
  if (config.model.vocab_size != vocab.size()) {
    throw ConfigInvalid("vocab_size " + std::to_string(config.model.vocab_size) +
                        " differs from the corpus vocabulary (" + std::to_string(vocab.size()) + ")");
  }

  ModelParams params = ModelParams::init(config.model, config.seed);
  const NamedParams named = params.named();
  AdamState optimizer = AdamState::zeros(named);
  const AdamConfig adam{config.learning_rate};

  std::ofstream log_file;
  if (options.log_path) {
    log_file.open(*options.log_path, std::ios::trunc);
    if (!log_file) throw DataError("cannot write " + options.log_path->string());
  }

  TrainResult result;
  bool have_best = false;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5eed5eed5eed5eedULL);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown sums;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      zero_grads(named);
      for (std::size_t i = begin; i < end; ++i) {
        const PreparedSample& s = train_set[order[i]];
        const ForwardOutput out = forward(params, config.model, s.input());
        const LossTerms terms = total_loss(out.prediction.raw, out.prediction.attention,
                                           out.phrases.attn, s.gt, config.loss);
        if (!std::isfinite(terms.values.total)) {
          Tape::current().clear();
          throw NonFiniteValue("training loss became non-finite at epoch " + std::to_string(epoch) +
                               " on sample " + std::to_string(order[i]));
        }
        backward(ops::scale(terms.total, inv_batch));
        sums.reg += terms.values.reg;
        sums.tag += terms.values.tag;
        sums.dqa += terms.values.dqa;
        sums.total += terms.values.total;
      }
      if (config.clip_norm > 0.0) clip_grad_norm(named, config.clip_norm);
      adam_step(named, optimizer, adam);
    }
    zero_grads(named);

    const double n = static_cast<double>(train_set.size());
    EpochLog log;
    log.epoch = epoch;
    log.train = {sums.reg / n, sums.tag / n, sums.dqa / n, sums.total / n};
    const Evaluation eval = evaluate_model(params, config.model, val_set);
    log.val = eval.report;
    log.attention_overlap = eval.attention_overlap;
    result.history.push_back(log);
    if (log_file) log_file << to_json(log).dump() << '\n' << std::flush;
    if (options.on_epoch) options.on_epoch(log);

    if (!have_best || log.val.recall(0.5) > result.best_val.recall(0.5)) {
      have_best = true;
      result.best_epoch = epoch;
      result.best_val = log.val;
      result.best_params = params.clone();
      if (options.checkpoint_path) {
        Checkpoint ck{config, vocab, result.best_params, optimizer,
                      {{"epoch", epoch}, {"val", to_json(log.val)}}};
        save_checkpoint(*options.checkpoint_path, ck);
      }
    }
  }
  result.optimizer = std::move(optimizer);
  return result;
}

}  // namespace lgi
