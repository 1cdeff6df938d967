// SPDX-License-Identifier: Apache-2.0
#include "lgi/data_synth.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "lgi/errors.hpp"
#include "lgi/metrics.hpp"

namespace lgi {
namespace {

constexpr std::array<const char*, 24> kActionNames = {
    "jump",  "cook",  "sit",   "run",   "open",  "wash",  "read",   "pour",
    "drink", "sweep", "laugh", "climb", "throw", "write", "dance",  "sleep",
    "eat",   "push",  "carry", "fold",  "paint", "sing",  "stretch", "knock"};

constexpr char kFeatureMagic[8] = {'L', 'G', 'I', 'F', 'E', 'A', 'T', '1'};

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

nlohmann::ordered_json annotation_json(const GroundingSample& s) {
  nlohmann::ordered_json j;
  j["video_id"] = s.video_id;
  j["tokens"] = s.tokens;
  j["start"] = s.gt.start;
  j["end"] = s.gt.end;
  return j;
}

std::vector<Interval> truths_of(const std::vector<GroundingSample>& samples) {
  std::vector<Interval> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.gt);
  return out;
}

}  // namespace

void validate_sample(const GroundingSample& sample) {
  const auto fail = [&](const std::string& why) {
    throw InvariantViolation("sample '" + sample.video_id + "': " + why);
  };
  if (!(sample.gt.start >= 0.0 && sample.gt.start < sample.gt.end && sample.gt.end <= 1.0)) {
    fail("ground truth must satisfy 0 <= start < end <= 1");
  }
  if (sample.tokens.empty()) fail("query has no tokens");
  const auto& f = sample.features;
  if (f.frames == 0 || f.dims == 0) fail("empty feature matrix");
  if (f.values.size() != static_cast<std::size_t>(f.frames) * f.dims) {
    fail("feature matrix size does not match its header");
  }
  for (float v : f.values) {
    if (!std::isfinite(v)) fail("non-finite feature value");
  }
}

void SynthConfig::validate() const {
  if (n_prototypes < 2) throw ConfigInvalid("n_prototypes must be at least 2");
  if (d_v == 0) throw ConfigInvalid("d_v must be positive");
  if (frames_min == 0 || frames_min > frames_max) throw ConfigInvalid("bad T_raw range");
  if (phrases_min == 0 || phrases_min > phrases_max) throw ConfigInvalid("bad phrases range");
  if (phrases_max >= n_prototypes) {
    throw ConfigInvalid("phrases_max must leave at least one distractor prototype");
  }
  if (!(noise_std >= 0.0)) throw ConfigInvalid("noise_std must be nonnegative");
  if (!(span_min > 0.0 && span_min <= span_max && span_max <= 1.0)) {
    throw ConfigInvalid("span fractions must satisfy 0 < span_min <= span_max <= 1");
  }
  if (block_min == 0 || block_min > block_max) throw ConfigInvalid("bad distractor block range");
  if (2 * phrases_max > frames_min) throw ConfigInvalid("videos too short for the target blocks");
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"n_prototypes", c.n_prototypes}, {"d_v", c.d_v},
                     {"frames_min", c.frames_min},     {"frames_max", c.frames_max},
                     {"phrases_min", c.phrases_min},   {"phrases_max", c.phrases_max},
                     {"noise_std", c.noise_std},       {"span_min", c.span_min},
                     {"span_max", c.span_max},         {"block_min", c.block_min},
                     {"block_max", c.block_max},       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  nlohmann::json defaults = c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!defaults.contains(it.key())) throw ConfigInvalid("unknown synth key '" + it.key() + "'");
  }
  try {
    c.n_prototypes = j.value("n_prototypes", c.n_prototypes);
    c.d_v = j.value("d_v", c.d_v);
    c.frames_min = j.value("frames_min", c.frames_min);
    c.frames_max = j.value("frames_max", c.frames_max);
    c.phrases_min = j.value("phrases_min", c.phrases_min);
    c.phrases_max = j.value("phrases_max", c.phrases_max);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.span_min = j.value("span_min", c.span_min);
    c.span_max = j.value("span_max", c.span_max);
    c.block_min = j.value("block_min", c.block_min);
    c.block_max = j.value("block_max", c.block_max);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("synth config: ") + e.what());
  }
}

PrototypeBank PrototypeBank::make(std::size_t count, std::size_t d_v, std::mt19937_64& rng) {
  PrototypeBank bank;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t p = 0; p < count; ++p) {
    bank.names.push_back(p < kActionNames.size() ? kActionNames[p]
                                                 : "action" + std::to_string(p + 1));
    std::vector<float> anchor(d_v);
    for (float& v : anchor) v = static_cast<float>(unit(rng));
    bank.anchors.push_back(std::move(anchor));
  }
  return bank;
}

std::size_t PrototypeBank::nearest(const FeatureMatrix& features, std::size_t t) const {
  std::size_t best = 0;
  double best_dist = INFINITY;
  for (std::size_t p = 0; p < anchors.size(); ++p) {
    double dist = 0.0;
    for (std::size_t c = 0; c < features.dims; ++c) {
      const double diff = static_cast<double>(features.at(t, c)) - anchors[p][c];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

Interval SampleLayout::span() const {
  const Block& first = blocks.at(first_target);
  const Block& last = blocks.at(first_target + target_count - 1);
  return {static_cast<double>(first.begin) / static_cast<double>(frames),
          static_cast<double>(last.end) / static_cast<double>(frames)};
}

SampleLayout draw_layout(const SynthConfig& config, std::mt19937_64& rng) {
  SampleLayout layout;
  layout.frames = uniform_index(rng, config.frames_min, config.frames_max);
  const std::size_t count = uniform_index(rng, config.phrases_min, config.phrases_max);

  const double frac = std::uniform_real_distribution<double>(config.span_min, config.span_max)(rng);
  std::size_t span = static_cast<std::size_t>(std::lround(frac * static_cast<double>(layout.frames)));
  span = std::clamp(span, 2 * count, layout.frames);
  const std::size_t start = uniform_index(rng, 0, layout.frames - span);

  std::vector<std::size_t> order(config.n_prototypes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::vector<std::size_t> targets(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  const std::vector<std::size_t> distractors(order.begin() + static_cast<std::ptrdiff_t>(count), order.end());

  // Each target block gets 2 segments plus a random share of the remainder.
  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i + 1 < count; ++i) cuts.push_back(uniform_index(rng, 0, span - 2 * count));
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(span - 2 * count);

  auto fill_distractors = [&](std::size_t begin, std::size_t end) {
    std::size_t pos = begin;
    std::size_t previous = config.n_prototypes;
    while (pos < end) {
      const std::size_t len = std::min(uniform_index(rng, config.block_min, config.block_max), end - pos);
      std::size_t proto;
      do {
        proto = distractors[uniform_index(rng, 0, distractors.size() - 1)];
      } while (proto == previous && distractors.size() > 1);
      layout.blocks.push_back({proto, pos, pos + len});
      previous = proto;
      pos += len;
    }
  };

  fill_distractors(0, start);
  layout.first_target = layout.blocks.size();
  layout.target_count = count;
  std::size_t pos = start, previous_cut = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = 2 + cuts[i] - previous_cut;
    previous_cut = cuts[i];
    layout.blocks.push_back({targets[i], pos, pos + len});
    pos += len;
  }
  fill_distractors(start + span, layout.frames);
  return layout;
}

GroundingSample render_sample(std::string video_id, const SampleLayout& layout,
                              const PrototypeBank& bank, double noise_std, std::mt19937_64& rng) {
  GroundingSample s;
  s.video_id = std::move(video_id);
  const std::size_t d_v = bank.anchors.at(0).size();
  s.features.frames = static_cast<std::uint32_t>(layout.frames);
  s.features.dims = static_cast<std::uint32_t>(d_v);
  s.features.values.resize(layout.frames * d_v);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const Block& b : layout.blocks) {
    for (std::size_t t = b.begin; t < b.end; ++t) {
      for (std::size_t c = 0; c < d_v; ++c) {
        const double jitter = noise_std > 0.0 ? noise_std * noise(rng) : 0.0;
        s.features.at(t, c) = static_cast<float>(bank.anchors[b.prototype][c] + jitter);
      }
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, kConnectives.size() - 1);
  for (std::size_t i = 0; i < layout.target_count; ++i) {
    if (i > 0) s.tokens.push_back(kConnectives[pick(rng)]);
    s.tokens.push_back(bank.names[layout.blocks[layout.first_target + i].prototype]);
  }
  s.gt = layout.span();
  return s;
}

Corpus generate(const SynthConfig& config, std::size_t n_train, std::size_t n_val) {
  config.validate();
  if (n_train == 0 || n_val == 0) throw ConfigInvalid("split sizes must be positive");
  Corpus corpus;
  corpus.config = config;
  std::mt19937_64 rng(config.seed);
  corpus.bank = PrototypeBank::make(config.n_prototypes, config.d_v, rng);

  auto make_split = [&](const char* prefix, std::size_t count) {
    std::vector<GroundingSample> split;
    split.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      char id[48];
      std::snprintf(id, sizeof id, "%s_%06zu", prefix, i);
      const SampleLayout layout = draw_layout(config, rng);
      split.push_back(render_sample(id, layout, corpus.bank, config.noise_std, rng));
    }
    return split;
  };
  corpus.train = make_split("train", n_train);
  corpus.val = make_split("val", n_val);

  for (const auto& s : corpus.train) {
    for (const auto& t : s.tokens) corpus.vocab.add(t);
  }

  const auto train_truths = truths_of(corpus.train);
  const auto val_truths = truths_of(corpus.val);
  const Interval prior = fit_center_prior(train_truths);
  const std::vector<Interval> prior_preds(val_truths.size(), prior);
  const auto random_preds = random_intervals(val_truths.size(), config.seed);

  corpus.manifest = {
      {"format", "lgi-synth-1"},
      {"config", config},
      {"seed", config.seed},
      {"splits", {{"train", n_train}, {"val", n_val}}},
      {"prototypes", corpus.bank.names},
      {"baselines",
       {{"center_prior",
         {{"interval", {prior.start, prior.end}}, {"val", to_json(evaluate(prior_preds, val_truths))}}},
        {"random", {{"seed", config.seed}, {"val", to_json(evaluate(random_preds, val_truths))}}}}}};
  return corpus;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::string bytes(kFeatureMagic, sizeof kFeatureMagic);
  put_u32(bytes, features.frames);
  put_u32(bytes, features.dims);
  bytes.reserve(bytes.size() + 4 * features.values.size());
  for (float v : features.values) put_u32(bytes, std::bit_cast<std::uint32_t>(v));
  write_file(path, bytes);
}

FeatureMatrix read_features(const std::filesystem::path& path, const std::string& video_id) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < sizeof kFeatureMagic ||
      !std::equal(kFeatureMagic, kFeatureMagic + sizeof kFeatureMagic, bytes.data())) {
    throw FormatError("features of '" + video_id + "': bad magic", 0);
  }
  if (bytes.size() < 16) {
    throw FormatError("features of '" + video_id + "': truncated header", bytes.size());
  }
  FeatureMatrix f;
  f.frames = get_u32(p + 8);
  f.dims = get_u32(p + 12);
  const std::uint64_t expected = 16 + 4ULL * f.frames * f.dims;
  if (bytes.size() < expected) {
    throw FormatError("features of '" + video_id + "': truncated blob, expected " +
                          std::to_string(expected) + " bytes",
                      bytes.size());
  }
  if (bytes.size() > expected) {
    throw FormatError("features of '" + video_id + "': trailing bytes", expected);
  }
  f.values.resize(static_cast<std::size_t>(f.frames) * f.dims);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.values[i] = std::bit_cast<float>(get_u32(p + 16 + 4 * i));
  }
  return f;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  auto save_split = [&](const std::vector<GroundingSample>& split, const char* name) {
    std::string lines;
    for (const auto& s : split) {
      lines += annotation_json(s).dump() + "\n";
      write_features(dir / "features" / (s.video_id + ".bin"), s.features);
    }
    write_file(dir / name, lines);
  };
  save_split(corpus.train, "train.jsonl");
  save_split(corpus.val, "val.jsonl");
  corpus.vocab.save(dir / "vocab.json");
  write_file(dir / "manifest.json", corpus.manifest.dump(2) + "\n");
}

std::vector<GroundingSample> load_split(const std::filesystem::path& annotations,
                                        const std::filesystem::path& features_dir) {
  std::ifstream in(annotations, std::ios::binary);
  if (!in) throw DataError("cannot read " + annotations.string());
  std::vector<GroundingSample> samples;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    GroundingSample s;
    try {
      const auto j = nlohmann::json::parse(line);
      s.video_id = j.at("video_id").get<std::string>();
      s.tokens = j.at("tokens").get<std::vector<std::string>>();
      s.gt = {j.at("start").get<double>(), j.at("end").get<double>()};
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(annotations.filename().string() + ": " + e.what(), line_start + e.byte - 1);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(annotations.filename().string() + ": " + e.what(), line_start);
    }
    s.features = read_features(features_dir / (s.video_id + ".bin"), s.video_id);
    validate_sample(s);
    samples.push_back(std::move(s));
  }
  return samples;
}

LoadedCorpus load_corpus(const std::filesystem::path& dir) {
  LoadedCorpus corpus;
  corpus.train = load_split(dir / "train.jsonl", dir / "features");
  corpus.val = load_split(dir / "val.jsonl", dir / "features");
  corpus.vocab = Vocabulary::load(dir / "vocab.json");
  const std::filesystem::path manifest = dir / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    try {
      corpus.manifest = nlohmann::json::parse(read_file(manifest));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("manifest.json: " + std::string(e.what()), e.byte);
    }
  }
  return corpus;
}

}  // namespace lgi
