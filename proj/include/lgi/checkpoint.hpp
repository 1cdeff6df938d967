// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "lgi/adam.hpp"
#include "lgi/encoders.hpp"
#include "lgi/model.hpp"
#include "lgi/train_config.hpp"

namespace lgi {

struct Checkpoint {
  TrainConfig config;
  Vocabulary vocab;
  ModelParams params;
  AdamState optimizer;
  nlohmann::json info;  // free-form metadata such as the epoch and val report
};

// File layout: "LGICKPT1", u64 little-endian header length, JSON header
// (parameter names and shapes, config, vocabulary, optimizer step, FNV-1a
// digest of the payload), then the payload: every parameter followed by the
// Adam first and second moments, as little-endian f64 in header order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Rebuilds the parameters from the stored config and overwrites them by
// name. Throws FormatError on a damaged file and InvariantViolation when the
// digest or the parameter layout disagrees.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace lgi
