// SPDX-License-Identifier: Apache-2.0
#include "lgi/model.hpp"

#include <array>
#include <set>

#include "lgi/errors.hpp"

namespace lgi {
namespace {

template <class Enum, std::size_t N>
using NameTable = std::array<std::pair<Enum, std::string_view>, N>;

constexpr NameTable<Variant, 2> kVariants{{{Variant::kLgi, "lgi"}, {Variant::kLgiSqan, "lgi_sqan"}}};
constexpr NameTable<FusionKind, 3> kFusions{{{FusionKind::kHadamard, "hadamard"},
                                             {FusionKind::kAddition, "addition"},
                                             {FusionKind::kConcat, "concat"}}};
constexpr NameTable<LocalKind, 3> kLocals{{{LocalKind::kResBlock, "resblock"},
                                           {LocalKind::kMaskedNl, "masked_nl"},
                                           {LocalKind::kNone, "none"}}};
constexpr NameTable<Ordering, 3> kOrderings{{{Ordering::kFusionLocalGlobal, "fusion_local_global"},
                                             {Ordering::kLocalFusionGlobal, "local_fusion_global"},
                                             {Ordering::kLocalGlobalFusion, "local_global_fusion"}}};

template <class Enum, std::size_t N>
std::string_view name_of(const NameTable<Enum, N>& table, Enum value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <class Enum, std::size_t N>
Enum parse_name(const NameTable<Enum, N>& table, std::string_view text, const char* what) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  std::string allowed;
  for (const auto& entry : table) allowed += (allowed.empty() ? "" : ", ") + std::string(entry.second);
  throw ConfigInvalid(std::string("unknown ") + what + " '" + std::string(text) + "' (expected " +
                      allowed + ")");
}

// splitmix64: decorrelates the per-sub-network seeds so toggling one
// sub-network leaves the initial values of the others untouched.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ScorerParams clone_scorer(const ScorerParams& s) {
  if (!s.defined()) return {};
  return {s.w_hidden.clone(), s.b_hidden.clone(), s.w_out.clone()};
}

}  // namespace

std::string_view to_string(Variant v) { return name_of(kVariants, v); }
std::string_view to_string(FusionKind k) { return name_of(kFusions, k); }
std::string_view to_string(LocalKind k) { return name_of(kLocals, k); }
std::string_view to_string(Ordering o) { return name_of(kOrderings, o); }
Variant parse_variant(std::string_view s) { return parse_name(kVariants, s, "variant"); }
FusionKind parse_fusion(std::string_view s) { return parse_name(kFusions, s, "fusion kind"); }
LocalKind parse_local(std::string_view s) { return parse_name(kLocals, s, "local context"); }
Ordering parse_ordering(std::string_view s) { return parse_name(kOrderings, s, "ordering"); }

void ModelConfig::validate() const {
  if (d == 0 || d % 2 != 0) throw ConfigInvalid("d must be even and positive");
  if (d_v == 0) throw ConfigInvalid("d_v must be positive");
  if (segments == 0) throw ConfigInvalid("T must be positive");
  if (phrases == 0) throw ConfigInvalid("N must be positive");
  if (vocab_size < 2) throw ConfigInvalid("vocab_size must cover <pad> and <unk>");
  if (local == LocalKind::kResBlock && kernel % 2 == 0) throw ConfigInvalid("kernel must be odd");
  if (local == LocalKind::kMaskedNl && (window % 2 == 0 || local_blocks == 0)) {
    throw ConfigInvalid("masked NL needs an odd window and at least one block");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d", c.d},
                     {"d_v", c.d_v},
                     {"T", c.segments},
                     {"N", c.phrases},
                     {"vocab_size", c.vocab_size},
                     {"variant", to_string(c.variant)},
                     {"fusion", to_string(c.fusion)},
                     {"local", to_string(c.local)},
                     {"kernel", c.kernel},
                     {"window", c.window},
                     {"local_blocks", c.local_blocks},
                     {"global_blocks", c.global_blocks},
                     {"ordering", to_string(c.ordering)},
                     {"position_embedding", c.position_embedding},
                     {"mask_invalid", c.mask_invalid}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  static const std::set<std::string> known = {
      "d",      "d_v",          "T",             "N",        "vocab_size",
      "variant", "fusion",      "local",         "kernel",   "window",
      "local_blocks", "global_blocks", "ordering", "position_embedding", "mask_invalid"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigInvalid("unknown model key '" + it.key() + "'");
  }
  try {
    c.d = j.value("d", c.d);
    c.d_v = j.value("d_v", c.d_v);
    c.segments = j.value("T", c.segments);
    c.phrases = j.value("N", c.phrases);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("fusion")) c.fusion = parse_fusion(j.at("fusion").get<std::string>());
    if (j.contains("local")) c.local = parse_local(j.at("local").get<std::string>());
    c.kernel = j.value("kernel", c.kernel);
    c.window = j.value("window", c.window);
    c.local_blocks = j.value("local_blocks", c.local_blocks);
    c.global_blocks = j.value("global_blocks", c.global_blocks);
    if (j.contains("ordering")) c.ordering = parse_ordering(j.at("ordering").get<std::string>());
    c.position_embedding = j.value("position_embedding", c.position_embedding);
    c.mask_invalid = j.value("mask_invalid", c.mask_invalid);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("model config: ") + e.what());
  }
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t d = config.d;
  const std::size_t steps = config.steps();

  ModelParams p;
  ParamFactory query_f(mix_seed(seed, 0));
  p.query = QueryEncoderParams::init(config.vocab_size, d, query_f);
  ParamFactory video_f(mix_seed(seed, 1));
  p.video = VideoEncoderParams::init(d, config.d_v, config.segments, config.position_embedding,
                                     video_f);
  if (config.variant == Variant::kLgi) {
    ParamFactory sqan_f(mix_seed(seed, 2));
    p.sqan = SqanParams::init(d, steps, sqan_f);
  }
  ParamFactory fusion_f(mix_seed(seed, 3));
  p.lgvti.fusion = FusionParams::init(d, steps, config.fusion, fusion_f);
  ParamFactory local_f(mix_seed(seed, 4));
  p.lgvti.local = LocalContextParams::init(d, config.local, config.kernel, config.window,
                                           config.local_blocks, local_f);
  ParamFactory global_f(mix_seed(seed, 5));
  if (config.variant == Variant::kLgi) {
    p.lgvti.global.phrase_scorer = ScorerParams::init(d, d / 2, global_f);
  }
  for (std::size_t b = 0; b < config.global_blocks; ++b) {
    p.lgvti.global.blocks.push_back(NlBlockParams::init(d, global_f));
  }
  ParamFactory head_f(mix_seed(seed, 6));
  p.head = HeadParams::init(d, head_f);
  return p;
}

NamedParams ModelParams::named() const {
  NamedParams out;
  query.collect("query", out);
  video.collect("video", out);
  sqan.collect("sqan", out);
  lgvti.fusion.collect("fusion", out);
  lgvti.local.collect("local", out);
  lgvti.global.collect("global", out);
  head.collect("head", out);
  return out;
}

ModelParams ModelParams::clone() const {
  auto copy = [](const Tensor& t) { return t.defined() ? t.clone() : Tensor(); };
  ModelParams p;
  p.query.embedding = copy(query.embedding);
  for (std::size_t l = 0; l < query.layers.size(); ++l) {
    for (auto [src, dst] : {std::pair{&query.layers[l].forward, &p.query.layers[l].forward},
                            std::pair{&query.layers[l].backward, &p.query.layers[l].backward}}) {
      for (std::size_t g = 0; g < 4; ++g) {
        dst->w_x[g] = copy(src->w_x[g]);
        dst->w_h[g] = copy(src->w_h[g]);
        dst->bias[g] = copy(src->bias[g]);
      }
    }
  }
  p.video = {copy(video.w_seg), copy(video.w_pos)};
  p.sqan.w_guide = copy(sqan.w_guide);
  for (const auto& w : sqan.w_step) p.sqan.w_step.push_back(copy(w));
  p.sqan.w_score = copy(sqan.w_score);
  p.sqan.w_guide_att = copy(sqan.w_guide_att);
  p.sqan.w_word_att = copy(sqan.w_word_att);

  p.lgvti.fusion.kind = lgvti.fusion.kind;
  for (const auto& s : lgvti.fusion.steps) {
    p.lgvti.fusion.steps.push_back({copy(s.w_m), copy(s.w_s), copy(s.w_e), copy(s.w_cat)});
  }
  const auto& local = lgvti.local;
  p.lgvti.local.kind = local.kind;
  p.lgvti.local.kernel = local.kernel;
  p.lgvti.local.window = local.window;
  p.lgvti.local.res = {copy(local.res.conv1_w), copy(local.res.conv1_b), copy(local.res.conv2_w),
                       copy(local.res.conv2_b)};
  for (const auto& b : local.masked) {
    p.lgvti.local.masked.push_back({copy(b.w_rq), copy(b.w_rk), copy(b.w_rv)});
  }
  p.lgvti.global.phrase_scorer = clone_scorer(lgvti.global.phrase_scorer);
  for (const auto& b : lgvti.global.blocks) {
    p.lgvti.global.blocks.push_back({copy(b.w_rq), copy(b.w_rk), copy(b.w_rv)});
  }
  p.head.temporal = clone_scorer(head.temporal);
  p.head.reg_w1 = copy(head.reg_w1);
  p.head.reg_b1 = copy(head.reg_b1);
  p.head.reg_w2 = copy(head.reg_w2);
  p.head.reg_b2 = copy(head.reg_b2);
  return p;
}

std::map<std::string, std::size_t> param_census(const ModelParams& params) {
  std::map<std::string, std::size_t> census;
  for (const auto& [name, tensor] : params.named()) {
    census[name.substr(0, name.find('.'))] += tensor.size();
  }
  return census;
}

ForwardOutput forward(const ModelParams& params, const ModelConfig& config, const ModelInput& input) {
  ForwardOutput out;
  out.query = encode_query(input.tokens, params.query);
  out.video = encode_video(input.video, input.valid, params.video);
  if (config.variant == Variant::kLgi) {
    out.phrases = extract_phrases(out.query.words, out.query.sentence, params.sqan, config.phrases);
  } else {
    out.phrases.phrases = out.query.sentence;
  }
  out.interaction = lgvti_forward(out.video.segments, out.phrases.phrases, params.lgvti,
                                  config.ordering);
  out.prediction = predict_interval(out.interaction.segments, params.head,
                                    config.mask_invalid ? input.valid
                                                        : std::span<const std::uint8_t>{});
  return out;
}

}  // namespace lgi
