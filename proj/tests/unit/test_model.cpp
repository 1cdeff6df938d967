// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "lgi/errors.hpp"
#include "lgi/gradcheck_suite.hpp"
#include "lgi/model.hpp"

namespace lgi {
namespace {

ModelConfig base_config() {
  ModelConfig c;
  c.d = 8;
  c.d_v = 5;
  c.segments = 6;
  c.phrases = 2;
  c.vocab_size = 9;
  c.kernel = 3;
  c.window = 3;
  return c;
}

std::map<std::string, std::size_t> changed_groups(const ModelConfig& a, const ModelConfig& b) {
  const auto ca = param_census(ModelParams::init(a, 1));
  const auto cb = param_census(ModelParams::init(b, 1));
  std::map<std::string, std::size_t> diff;
  for (const auto& group : {"query", "video", "sqan", "fusion", "local", "global", "head"}) {
    const std::size_t x = ca.count(group) ? ca.at(group) : 0;
    const std::size_t y = cb.count(group) ? cb.at(group) : 0;
    if (x != y) diff[group] = x > y ? x - y : y - x;
  }
  return diff;
}

TEST(Census, AblationsTouchOnlyTheirSubNetwork) {
  const ModelConfig base = base_config();
  ModelConfig no_pos = base;
  no_pos.position_embedding = false;
  EXPECT_EQ(changed_groups(base, no_pos), (std::map<std::string, std::size_t>{{"video", 8 * 6}}));

  ModelConfig concat = base;
  concat.fusion = FusionKind::kConcat;
  EXPECT_EQ(changed_groups(base, concat), (std::map<std::string, std::size_t>{{"fusion", 2 * 8 * 16}}));

  ModelConfig no_local = base;
  no_local.local = LocalKind::kNone;
  EXPECT_EQ(changed_groups(base, no_local).size(), 1u);
  EXPECT_TRUE(changed_groups(base, no_local).count("local"));

  ModelConfig two_global = base;
  two_global.global_blocks = 2;
  EXPECT_EQ(changed_groups(base, two_global), (std::map<std::string, std::size_t>{{"global", 3 * 64}}));

  // Loss switches do not touch the parameter set at all.
  EXPECT_TRUE(changed_groups(base, base).empty());
}

TEST(Census, SentenceOnlyVariantDropsPhraseMachinery) {
  ModelConfig sentence = base_config();
  sentence.variant = Variant::kLgiSqan;
  const auto census = param_census(ModelParams::init(sentence, 1));
  EXPECT_FALSE(census.count("sqan"));
  const auto diff = changed_groups(base_config(), sentence);
  for (const auto& [group, _] : diff) {
    EXPECT_TRUE(group == "sqan" || group == "fusion" || group == "global") << group;
  }
}

TEST(Model, InitIsSeededPerSubNetwork) {
  const ModelConfig a = base_config();
  ModelConfig b = a;
  b.local = LocalKind::kMaskedNl;
  const auto pa = ModelParams::init(a, 5).named();
  const auto pb = ModelParams::init(b, 5).named();
  // The head is initialized from its own stream, so it is unaffected.
  auto head = [](const NamedParams& p) {
    std::vector<double> v;
    for (const auto& n : p) {
      if (n.name.rfind("head.", 0) == 0) v.insert(v.end(), n.tensor.data().begin(), n.tensor.data().end());
    }
    return v;
  };
  EXPECT_EQ(head(pa), head(pb));
}

TEST(Model, ConfigJsonRoundTrip) {
  ModelConfig c = base_config();
  c.variant = Variant::kLgiSqan;
  c.ordering = Ordering::kLocalGlobalFusion;
  const nlohmann::json j = c;
  const auto back = j.get<ModelConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_THROW((nlohmann::json{{"d", 8}, {"colour", 1}}.get<ModelConfig>()), ConfigInvalid);
  EXPECT_THROW(parse_ordering("global_first"), ConfigInvalid);
}

TEST(Model, CloneIsDeep) {
  const ModelParams p = ModelParams::init(base_config(), 2);
  ModelParams q = p.clone();
  auto qn = q.named();
  qn[0].tensor.mutable_data()[0] += 1.0;
  EXPECT_NE(p.named()[0].tensor.data()[0], qn[0].tensor.data()[0]);
  EXPECT_EQ(param_count(p.named()), param_count(qn));
}

TEST(Model, FullLossGradients) {
  const ModelConfig c = base_config();
  const auto r = check_model("lgi", c, 5, 3, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4);
  ModelConfig s = c;
  s.variant = Variant::kLgiSqan;
  s.local = LocalKind::kMaskedNl;
  EXPECT_LT(check_model("lgi_sqan", s, 4, 4, 1e-5).max_rel_error, 1e-4);
}

}  // namespace
}  // namespace lgi
