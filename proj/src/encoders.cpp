// SPDX-License-Identifier: Apache-2.0
#include "lgi/encoders.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lgi/errors.hpp"
#include "lgi/ops.hpp"

namespace lgi {
namespace {

constexpr std::array<const char*, 4> kGateNames = {"i", "f", "g", "o"};

LstmDirectionParams init_direction(std::size_t in, std::size_t hidden, ParamFactory& factory) {
  LstmDirectionParams p;
  for (std::size_t g = 0; g < 4; ++g) {
    p.w_x[g] = factory.uniform({hidden, in}, in);
    p.w_h[g] = factory.uniform({hidden, hidden}, hidden);
    p.bias[g] = factory.uniform({hidden, 1}, hidden);
  }
  return p;
}

void collect_direction(const LstmDirectionParams& p, const std::string& prefix, NamedParams& out) {
  for (std::size_t g = 0; g < 4; ++g) {
    append_param(out, prefix + ".w_x_" + kGateNames[g], p.w_x[g]);
    append_param(out, prefix + ".w_h_" + kGateNames[g], p.w_h[g]);
    append_param(out, prefix + ".b_" + kGateNames[g], p.bias[g]);
  }
}

// Runs one direction over the columns of `inputs` [in, L] and returns the
// hidden states [h, L] in input order. Initial states are zero.
Tensor run_direction(const Tensor& inputs, const LstmDirectionParams& p, bool reverse) {
  const std::size_t steps = inputs.dim(1);
  std::array<Tensor, 4> projected;
  for (std::size_t g = 0; g < 4; ++g) {
    projected[g] = ops::add(ops::matmul(p.w_x[g], inputs), p.bias[g]);
  }

  Tensor h, c;
  std::vector<Tensor> outputs(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    std::array<Tensor, 4> z;
    for (std::size_t g = 0; g < 4; ++g) {
      z[g] = ops::slice_cols(projected[g], t, 1);
      // W_h h vanishes at the first step.
      if (h.defined()) z[g] = ops::add(z[g], ops::matmul(p.w_h[g], h));
    }
    Tensor in_gate = ops::sigmoid(z[0]);
    Tensor forget_gate = ops::sigmoid(z[1]);
    Tensor cell_in = ops::tanh(z[2]);
    Tensor out_gate = ops::sigmoid(z[3]);
    Tensor fresh = ops::hadamard(in_gate, cell_in);
    c = c.defined() ? ops::add(ops::hadamard(forget_gate, c), fresh) : fresh;
    h = ops::hadamard(out_gate, ops::tanh(c));
    outputs[t] = h;
  }
  return ops::concat(outputs, 1);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isspace(ch) || std::ispunct(ch)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnknownToken));
}

int Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(index_of(t));
  return ids;
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < tokens_.size(); ++i) obj[tokens_[i]] = i;
  return obj.dump();
}

Vocabulary Vocabulary::from_json(std::string_view text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("vocabulary: ") + e.what(), e.byte);
  }
  if (!obj.is_object()) throw FormatError("vocabulary: expected a JSON object", 0);

  std::vector<std::string> tokens(obj.size());
  std::vector<bool> seen(obj.size(), false);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_number_integer()) {
      throw InvariantViolation("vocabulary: index of '" + it.key() + "' is not an integer");
    }
    const auto id = it.value().get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= tokens.size() || seen[static_cast<std::size_t>(id)]) {
      throw InvariantViolation("vocabulary: indices must be a permutation of 0..n-1");
    }
    seen[static_cast<std::size_t>(id)] = true;
    tokens[static_cast<std::size_t>(id)] = it.key();
  }
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnknown] != kUnknownToken) {
    throw InvariantViolation("vocabulary: index 0 must be <pad> and index 1 <unk>");
  }
  Vocabulary vocab;
  for (std::size_t i = 2; i < tokens.size(); ++i) vocab.add(tokens[i]);
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

QueryEncoderParams QueryEncoderParams::init(std::size_t vocab_size, std::size_t d,
                                            ParamFactory& factory) {
  if (d == 0 || d % 2 != 0) throw InvalidArgument("query encoder: d must be even and positive");
  QueryEncoderParams p;
  // Lookup tables see a single active input, so fan_in is 1.
  p.embedding = factory.uniform({vocab_size, d}, 1);
  for (auto& layer : p.layers) {
    layer.forward = init_direction(d, d / 2, factory);
    layer.backward = init_direction(d, d / 2, factory);
  }
  return p;
}

void QueryEncoderParams::collect(const std::string& prefix, NamedParams& out) const {
  append_param(out, prefix + ".embedding", embedding);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = prefix + ".lstm" + std::to_string(l);
    collect_direction(layers[l].forward, base + ".fwd", out);
    collect_direction(layers[l].backward, base + ".bwd", out);
  }
}

QueryEncoding encode_query(std::span<const int> tokens, const QueryEncoderParams& params) {
  if (tokens.empty()) throw EmptyQuery("encode_query: query has no tokens");
  Tensor x = ops::transpose(ops::embedding_rows(params.embedding, tokens));
  Tensor fwd, bwd;
  for (const auto& layer : params.layers) {
    fwd = run_direction(x, layer.forward, false);
    bwd = run_direction(x, layer.backward, true);
    const std::array<Tensor, 2> both{fwd, bwd};
    x = ops::concat(both, 0);
  }
  const std::size_t last = tokens.size() - 1;
  const std::array<Tensor, 2> ends{ops::slice_cols(fwd, last, 1), ops::slice_cols(bwd, 0, 1)};
  return {x, ops::concat(ends, 0)};
}

VideoEncoderParams VideoEncoderParams::init(std::size_t d, std::size_t d_v, std::size_t steps,
                                            bool position_embedding, ParamFactory& factory) {
  VideoEncoderParams p;
  p.w_seg = factory.uniform({d, d_v}, d_v);
  if (position_embedding) p.w_pos = factory.uniform({d, steps}, 1);
  return p;
}

void VideoEncoderParams::collect(const std::string& prefix, NamedParams& out) const {
  append_param(out, prefix + ".w_seg", w_seg);
  append_param(out, prefix + ".w_pos", w_pos);
}

SampledVideo sample_segments(const FeatureMatrix& raw, std::size_t steps) {
  if (raw.frames == 0) throw InvalidArgument("sample_segments: video has no segments");
  if (steps == 0) throw InvalidArgument("sample_segments: T must be positive");
  const std::size_t d_v = raw.dims;
  const std::size_t frames = raw.frames;
  std::vector<double> data(d_v * steps, 0.0);
  std::vector<std::uint8_t> valid(steps, 0);

  auto copy_column = [&](std::size_t dst, std::size_t src) {
    for (std::size_t c = 0; c < d_v; ++c) data[c * steps + dst] = raw.at(src, c);
    valid[dst] = 1;
  };
  if (frames >= steps) {
    for (std::size_t i = 0; i < steps; ++i) {
      const std::size_t src =
          steps == 1 ? 0
                     : static_cast<std::size_t>(std::lround(
                           static_cast<double>(i) * static_cast<double>(frames - 1) /
                           static_cast<double>(steps - 1)));
      copy_column(i, src);
    }
  } else {
    for (std::size_t i = 0; i < frames; ++i) copy_column(i, i);
  }
  return {Tensor({d_v, steps}, std::move(data)), std::move(valid)};
}

SegmentFeatures encode_video(const Tensor& sampled, std::span<const std::uint8_t> valid,
                             const VideoEncoderParams& params) {
  if (sampled.rank() != 2 || sampled.dim(0) != params.w_seg.dim(1)) {
    throw ShapeMismatch("encode_video: sampled features " + shape_str(sampled.shape()) +
                        " do not match W_seg " + shape_str(params.w_seg.shape()));
  }
  if (valid.size() != sampled.dim(1)) {
    throw ShapeMismatch("encode_video: mask length differs from segment count");
  }
  Tensor s = ops::relu(ops::matmul(params.w_seg, sampled));
  if (params.w_pos.defined()) {
    if (params.w_pos.dim(1) != sampled.dim(1)) {
      throw ShapeMismatch("encode_video: position table covers " +
                          std::to_string(params.w_pos.dim(1)) + " segments, got " +
                          std::to_string(sampled.dim(1)));
    }
    s = ops::add(s, params.w_pos);
  }
  return {s, std::vector<std::uint8_t>(valid.begin(), valid.end())};
}

}  // namespace lgi
