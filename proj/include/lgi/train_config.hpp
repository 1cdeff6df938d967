// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "lgi/losses.hpp"
#include "lgi/model.hpp"

namespace lgi {

struct TrainConfig {
  ModelConfig model;
  LossOptions loss;
  double learning_rate = 4e-4;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;  // 0 disables clipping

  void validate() const;
};

// Flat JSON object: the model keys plus lambda, use_tag, use_dqa,
// learning_rate, batch_size, epochs, seed and clip_norm. Unknown keys are
// rejected with ConfigInvalid.
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Applies one `--key value` style override, parsing `value` according to the
// type of the existing entry.
void apply_override(TrainConfig& config, const std::string& key, const std::string& value);

}  // namespace lgi
