// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lgi/model.hpp"

namespace lgi {

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coords = 0;  // coordinates probed, summed over points
};

// Every primitive probed as sum(op(x) * W) with a fixed random W at `points`
// random inputs. relu and abs inputs are pushed away from their kinks.
std::vector<GradCheckCase> check_primitives(std::size_t points, std::uint64_t seed, double eps);

struct ModelCheckShape {
  std::size_t d = 8;
  std::size_t segments = 6;  // T
  std::size_t words = 5;     // L
  std::size_t phrases = 2;   // N
};

// The model configurations covered by the full-loss check: both variants,
// every fusion kind, the ResBlock and masked-NL local paths and every
// ordering, all with an NL global block.
std::vector<std::pair<std::string, ModelConfig>> model_check_configs(const ModelCheckShape& shape);

// Gradient of the full training loss (reg + tag + dqa) with respect to every
// parameter on one random sample.
GradCheckCase check_model(const std::string& name, const ModelConfig& config, std::size_t words,
                          std::uint64_t seed, double eps);

std::vector<GradCheckCase> check_models(const ModelCheckShape& shape, std::uint64_t seed, double eps);

}  // namespace lgi
