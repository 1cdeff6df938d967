// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lgi/encoders.hpp"
#include "lgi/grounding_head.hpp"
#include "lgi/lgvti.hpp"
#include "lgi/params.hpp"
#include "lgi/sqan.hpp"
#include "lgi/tensor.hpp"

namespace lgi {

enum class Variant { kLgi, kLgiSqan };

std::string_view to_string(Variant v);
std::string_view to_string(FusionKind k);
std::string_view to_string(LocalKind k);
std::string_view to_string(Ordering o);
Variant parse_variant(std::string_view s);
FusionKind parse_fusion(std::string_view s);
LocalKind parse_local(std::string_view s);
Ordering parse_ordering(std::string_view s);

struct ModelConfig {
  std::size_t d = 64;
  std::size_t d_v = 32;
  std::size_t segments = 32;  // T
  std::size_t phrases = 3;    // N
  std::size_t vocab_size = 2;
  Variant variant = Variant::kLgi;
  FusionKind fusion = FusionKind::kHadamard;
  LocalKind local = LocalKind::kResBlock;
  std::size_t kernel = 15;
  std::size_t window = 31;
  std::size_t local_blocks = 1;
  std::size_t global_blocks = 1;
  Ordering ordering = Ordering::kFusionLocalGlobal;
  bool position_embedding = true;
  bool mask_invalid = false;

  // Phrase steps actually run: 1 in the sentence-only variant.
  std::size_t steps() const { return variant == Variant::kLgiSqan ? 1 : phrases; }
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct ModelParams {
  QueryEncoderParams query;
  VideoEncoderParams video;
  SqanParams sqan;  // empty in the sentence-only variant
  LgvtiParams lgvti;
  HeadParams head;

  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  // Every learnable tensor under a stable dotted name, in a fixed order.
  NamedParams named() const;
  // Deep copy; the result shares no storage with *this.
  ModelParams clone() const;
};

// Parameter counts keyed by the first component of the parameter names.
std::map<std::string, std::size_t> param_census(const ModelParams& params);

struct ModelInput {
  std::span<const int> tokens;
  Tensor video;                            // sampled features [d_v, T]
  std::span<const std::uint8_t> valid;     // length T
};

struct ForwardOutput {
  QueryEncoding query;
  PhraseSet phrases;  // attn undefined in the sentence-only variant
  SegmentFeatures video;
  LgvtiOutput interaction;
  Prediction prediction;
};

ForwardOutput forward(const ModelParams& params, const ModelConfig& config, const ModelInput& input);

}  // namespace lgi
