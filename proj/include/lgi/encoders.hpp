// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lgi/features.hpp"
#include "lgi/params.hpp"
#include "lgi/tensor.hpp"

namespace lgi {

// Lower-cases ASCII letters and splits on whitespace and punctuation, which
// is dropped.
std::vector<std::string> tokenize(std::string_view text);

// Token <-> index map. Index 0 is padding and index 1 collects every token
// that was never added.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();

  int add(const std::string& token);
  int index_of(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.contains(token); }
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }

  std::vector<int> encode(std::span<const std::string> tokens) const;

  // UTF-8 JSON object {token: index}.
  std::string to_json() const;
  static Vocabulary from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// One direction of one LSTM layer. Gates are ordered input, forget, cell,
// output.
struct LstmDirectionParams {
  std::array<Tensor, 4> w_x;   // [h, in]
  std::array<Tensor, 4> w_h;   // [h, h]
  std::array<Tensor, 4> bias;  // [h, 1]
};

struct BiLstmLayerParams {
  LstmDirectionParams forward;
  LstmDirectionParams backward;
};

// Word embeddings feeding a two-layer bidirectional LSTM whose directions
// each have d/2 units.
struct QueryEncoderParams {
  Tensor embedding;  // [|V|, d]
  std::array<BiLstmLayerParams, 2> layers;

  static QueryEncoderParams init(std::size_t vocab_size, std::size_t d, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
  std::size_t dim() const { return embedding.dim(1); }
};

struct QueryEncoding {
  Tensor words;     // E: [d, L], column l is [h_fwd_l; h_bwd_l] of the top layer
  Tensor sentence;  // q: [d, 1] = [h_fwd_L; h_bwd_1]
};

QueryEncoding encode_query(std::span<const int> tokens, const QueryEncoderParams& params);

struct VideoEncoderParams {
  Tensor w_seg;  // [d, d_v]
  Tensor w_pos;  // [d, T]; undefined when position embedding is disabled

  static VideoEncoderParams init(std::size_t d, std::size_t d_v, std::size_t steps,
                                 bool position_embedding, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct SampledVideo {
  Tensor features;                  // [d_v, T]
  std::vector<std::uint8_t> valid;  // 1 where a real segment was sampled
};

// Uniformly resamples `raw` to exactly `steps` segments. Longer videos take
// indices round(i * (T_raw - 1) / (T - 1)); shorter ones are copied
// left-aligned and zero-filled.
SampledVideo sample_segments(const FeatureMatrix& raw, std::size_t steps);

struct SegmentFeatures {
  Tensor segments;                  // S: [d, T]
  std::vector<std::uint8_t> valid;  // carried through from sampling
};

// S = relu(W_seg x) + W_pos. Zero-filled columns still receive their position
// embedding.
SegmentFeatures encode_video(const Tensor& sampled, std::span<const std::uint8_t> valid,
                             const VideoEncoderParams& params);

}  // namespace lgi
