// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "lgi/checkpoint.hpp"
#include "lgi/data_synth.hpp"
#include "lgi/metrics.hpp"
#include "lgi/train_config.hpp"

namespace lgi {

// A sample resampled to T segments and tokenized once, ready for forward().
struct PreparedSample {
  std::vector<int> tokens;
  Tensor video;  // [d_v, T]
  std::vector<std::uint8_t> valid;
  Interval gt;

  ModelInput input() const { return {tokens, video, valid}; }
};

std::vector<PreparedSample> prepare(std::span<const GroundingSample> samples,
                                    const Vocabulary& vocab, std::size_t steps);

// Mean over column pairs n < m of the dot product a_n . a_m of the query
// attention matrix A [L, N]; 0 when N < 2.
double attention_overlap(const Tensor& attn);

struct Evaluation {
  EvalReport report;
  std::vector<Interval> predictions;
  double attention_overlap = 0.0;  // mean over samples
};

Evaluation evaluate_model(const ModelParams& params, const ModelConfig& config,
                          std::span<const PreparedSample> samples);

struct EpochLog {
  std::size_t epoch = 0;
  LossBreakdown train;  // means over the epoch's samples
  EvalReport val;
  double attention_overlap = 0.0;
};

nlohmann::json to_json(const EpochLog& log);

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint_path;  // best-by-val R@0.5
  std::optional<std::filesystem::path> log_path;         // JSON Lines, one per epoch
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  ModelParams best_params;
  std::size_t best_epoch = 0;
  EvalReport best_val;
  std::vector<EpochLog> history;
  AdamState optimizer;  // state after the final epoch
};

// Deterministic given config.seed: fixed init, fixed per-epoch shuffle and a
// fixed summation order. Each batch averages the per-sample losses. Throws
// NonFiniteValue when a loss turns NaN; the last good checkpoint stays on
// disk.
TrainResult train(const TrainConfig& config, std::span<const PreparedSample> train_set,
                  std::span<const PreparedSample> val_set, const Vocabulary& vocab,
                  const TrainOptions& options = {});

}  // namespace lgi
