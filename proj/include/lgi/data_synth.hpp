// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgi/encoders.hpp"
#include "lgi/features.hpp"
#include "lgi/interval.hpp"

namespace lgi {

struct GroundingSample {
  std::string video_id;
  FeatureMatrix features;
  std::vector<std::string> tokens;
  Interval gt;

  friend bool operator==(const GroundingSample&, const GroundingSample&) = default;
};

// Checks 0 <= start < end <= 1, a nonempty query and finite features.
// Throws InvariantViolation naming the sample.
void validate_sample(const GroundingSample& sample);

struct SynthConfig {
  std::size_t n_prototypes = 12;
  std::size_t d_v = 32;
  std::size_t frames_min = 40;  // T_raw range
  std::size_t frames_max = 96;
  std::size_t phrases_min = 1;  // prototypes named per query
  std::size_t phrases_max = 3;
  double noise_std = 0.8;
  double span_min = 0.1;  // ground-truth span as a fraction of the video
  double span_max = 0.5;
  std::size_t block_min = 3;  // distractor block length in raw segments
  std::size_t block_max = 10;
  std::uint64_t seed = 7;

  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

inline const std::vector<std::string> kConnectives{"then", "and"};

// Activity archetypes: a name token and a fixed feature anchor each.
struct PrototypeBank {
  std::vector<std::string> names;
  std::vector<std::vector<float>> anchors;

  static PrototypeBank make(std::size_t count, std::size_t d_v, std::mt19937_64& rng);
  // Index of the anchor nearest to `features` row `t` (squared distance).
  std::size_t nearest(const FeatureMatrix& features, std::size_t t) const;
};

struct Block {
  std::size_t prototype;
  std::size_t begin;  // raw segment range [begin, end)
  std::size_t end;
};

// Block layout of one synthetic video. The target blocks are contiguous and
// listed in temporal order; everything else is a distractor.
struct SampleLayout {
  std::size_t frames = 0;
  std::vector<Block> blocks;
  std::size_t first_target = 0;  // index into blocks
  std::size_t target_count = 0;

  Interval span() const;
};

SampleLayout draw_layout(const SynthConfig& config, std::mt19937_64& rng);

// Features are anchor + N(0, noise_std) rounded to f32; the query names the
// target prototypes in order joined by connectives.
GroundingSample render_sample(std::string video_id, const SampleLayout& layout,
                              const PrototypeBank& bank, double noise_std, std::mt19937_64& rng);

struct Corpus {
  SynthConfig config;
  PrototypeBank bank;
  std::vector<GroundingSample> train;
  std::vector<GroundingSample> val;
  Vocabulary vocab;
  nlohmann::json manifest;
};

// Deterministic given config.seed. The manifest records the config, split
// sizes and the baseline numbers on the validation split.
Corpus generate(const SynthConfig& config, std::size_t n_train, std::size_t n_val);

// Binary feature blob: "LGIFEAT1", u32 T_raw, u32 d_v, then T_raw * d_v f32,
// all little-endian and time-major.
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_features(const std::filesystem::path& path, const std::string& video_id);

// Directory layout: train.jsonl, val.jsonl, features/<video_id>.bin,
// vocab.json, manifest.json.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// Streams a JSON Lines annotation file, loading each sample's features from
// `features_dir`.
std::vector<GroundingSample> load_split(const std::filesystem::path& annotations,
                                        const std::filesystem::path& features_dir);

struct LoadedCorpus {
  std::vector<GroundingSample> train;
  std::vector<GroundingSample> val;
  Vocabulary vocab;
  nlohmann::json manifest;
};

LoadedCorpus load_corpus(const std::filesystem::path& dir);

}  // namespace lgi
