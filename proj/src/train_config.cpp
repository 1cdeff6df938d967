// SPDX-License-Identifier: Apache-2.0
#include "lgi/train_config.hpp"

#include <algorithm>
#include <cmath>

#include "lgi/errors.hpp"

namespace lgi {
namespace {

constexpr const char* kTrainKeys[] = {"lambda",     "use_tag", "use_dqa", "learning_rate",
                                      "batch_size", "epochs",  "seed",    "clip_norm"};

bool is_train_key(const std::string& key) {
  return std::find(std::begin(kTrainKeys), std::end(kTrainKeys), key) != std::end(kTrainKeys);
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate > 0.0)) throw ConfigInvalid("learning_rate must be positive");
  if (batch_size == 0) throw ConfigInvalid("batch_size must be positive");
  if (epochs == 0) throw ConfigInvalid("epochs must be positive");
  if (!(loss.lambda >= 0.0)) throw ConfigInvalid("lambda must be nonnegative");
  if (!(clip_norm >= 0.0)) throw ConfigInvalid("clip_norm must be nonnegative");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = c.model;
  j["lambda"] = c.loss.lambda;
  j["use_tag"] = c.loss.use_tag;
  j["use_dqa"] = c.loss.use_dqa;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["clip_norm"] = c.clip_norm;
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigInvalid("training config must be a JSON object");
  nlohmann::json model_part = nlohmann::json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!is_train_key(it.key())) model_part[it.key()] = it.value();
  }
  from_json(model_part, c.model);
  try {
    c.loss.lambda = j.value("lambda", c.loss.lambda);
    c.loss.use_tag = j.value("use_tag", c.loss.use_tag);
    c.loss.use_dqa = j.value("use_dqa", c.loss.use_dqa);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("training config: ") + e.what());
  }
}

void apply_override(TrainConfig& config, const std::string& key, const std::string& value) {
  nlohmann::json current = config;
  if (!current.contains(key)) throw ConfigInvalid("unknown config key '" + key + "'");
  nlohmann::json parsed;
  const auto& slot = current[key];
  try {
    if (slot.is_string()) {
      parsed = value;
    } else if (slot.is_boolean()) {
      if (value == "true" || value == "1" || value == "on") {
        parsed = true;
      } else if (value == "false" || value == "0" || value == "off") {
        parsed = false;
      } else {
        throw ConfigInvalid("--" + key + " expects a boolean, got '" + value + "'");
      }
    } else if (slot.is_number_unsigned() || slot.is_number_integer()) {
      std::size_t used = 0;
      if (!value.empty() && value[0] == '-') throw ConfigInvalid("--" + key + " must be nonnegative");
      const unsigned long long n = std::stoull(value, &used);
      if (used != value.size()) throw ConfigInvalid("--" + key + " expects an integer");
      parsed = n;
    } else {
      std::size_t used = 0;
      const double x = std::stod(value, &used);
      if (used != value.size() || !std::isfinite(x)) {
        throw ConfigInvalid("--" + key + " expects a number");
      }
      parsed = x;
    }
  } catch (const std::logic_error&) {
    throw ConfigInvalid("--" + key + ": cannot parse '" + value + "'");
  }
  current[key] = parsed;
  from_json(current, config);
}

}  // namespace lgi
