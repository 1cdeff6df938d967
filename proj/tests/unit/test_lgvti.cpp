// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "lgi/errors.hpp"
#include "lgi/grad_check.hpp"
#include "lgi/lgvti.hpp"
#include "lgi/ops.hpp"
#include "oracles.hpp"

namespace lgi {
namespace {

void zero(Tensor& t) {
  for (double& x : t.mutable_data()) x = 0.0;
}

void expect_equal(const Tensor& a, const Tensor& b, double tol = 0.0) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], tol);
}

TEST(Fusion, ZeroPhraseAnnihilatesHadamard) {
  ParamFactory f(1);
  auto p = FusionParams::init(6, 1, FusionKind::kHadamard, f);
  std::mt19937_64 rng(1);
  Tensor s = oracle::random_tensor({6, 4}, rng);
  expect_equal(fuse_segments(s, Tensor::zeros({6, 1}), p.steps[0], FusionKind::kHadamard), Tensor::zeros({6, 4}));
}

TEST(Fusion, ZeroPhraseAdditionIsPhraseIndependent) {
  ParamFactory f(1);
  auto p = FusionParams::init(6, 1, FusionKind::kAddition, f);
  std::mt19937_64 rng(1);
  Tensor s = oracle::random_tensor({6, 4}, rng);
  Tensor want = ops::matmul(p.steps[0].w_m, ops::matmul(p.steps[0].w_s, s));
  expect_equal(fuse_segments(s, Tensor::zeros({6, 1}), p.steps[0], FusionKind::kAddition), want, 1e-14);
}

TEST(Fusion, ConcatNeedsProjection) {
  ParamFactory f(1);
  auto p = FusionParams::init(6, 1, FusionKind::kConcat, f);
  EXPECT_EQ(p.steps[0].w_cat.shape(), (Shape{6, 12}));
  auto plain = FusionParams::init(6, 1, FusionKind::kHadamard, f);
  EXPECT_FALSE(plain.steps[0].w_cat.defined());
  EXPECT_THROW(fuse_segments(Tensor::zeros({6, 3}), Tensor::zeros({6, 1}), plain.steps[0], FusionKind::kConcat),
               ShapeMismatch);
}

TEST(LocalContext, ZeroResBlockIsIdentity) {
  ParamFactory f(2);
  auto p = LocalContextParams::init(5, LocalKind::kResBlock, 3, 3, 1, f);
  zero(p.res.conv1_w);
  zero(p.res.conv1_b);
  zero(p.res.conv2_w);
  zero(p.res.conv2_b);
  std::mt19937_64 rng(2);
  Tensor x = oracle::random_tensor({5, 7}, rng);
  expect_equal(local_context(x, p), x);
}

TEST(LocalContext, ZeroValueMaskedNlIsIdentity) {
  ParamFactory f(2);
  auto p = LocalContextParams::init(5, LocalKind::kMaskedNl, 3, 3, 2, f);
  for (auto& b : p.masked) zero(b.w_rv);
  std::mt19937_64 rng(3);
  Tensor x = oracle::random_tensor({5, 7}, rng);
  expect_equal(local_context(x, p), x);
}

TEST(LocalContext, FullWindowEqualsGlobalBlock) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ParamFactory f(100 + trial);
    auto p = LocalContextParams::init(8, LocalKind::kMaskedNl, 3, 11, 1, f);
    Tensor x = oracle::random_tensor({8, 6}, rng);
    expect_equal(local_context(x, p), nl_block(x, p.masked[0]), 1e-10);
  }
}

TEST(LocalContext, WindowMaskShape) {
  Tensor m = window_mask(5, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(m.at(i, j), (i > j ? i - j : j - i) <= 1 ? 0.0 : kMaskedLogit);
    }
  }
}

TEST(LocalContext, InvalidConfigurations) {
  ParamFactory f(1);
  EXPECT_THROW(LocalContextParams::init(4, LocalKind::kResBlock, 4, 3, 1, f), EvenKernel);
  EXPECT_THROW(LocalContextParams::init(4, LocalKind::kMaskedNl, 3, 4, 1, f), InvalidArgument);
  EXPECT_THROW(LocalContextParams::init(4, LocalKind::kMaskedNl, 3, 3, 0, f), InvalidArgument);
}

TEST(Pooling, SinglePhrasePassesThrough) {
  ParamFactory f(3);
  auto scorer = ScorerParams::init(6, 3, f);
  std::mt19937_64 rng(5);
  std::vector<Tensor> m{oracle::random_tensor({6, 4}, rng)};
  auto out = pool_phrases(m, oracle::random_tensor({6, 1}, rng), scorer);
  EXPECT_DOUBLE_EQ(out.weights.item(), 1.0);
  expect_equal(out.pooled, m[0]);
  auto bare = pool_phrases(m, oracle::random_tensor({6, 1}, rng), ScorerParams{});
  expect_equal(bare.pooled, m[0]);
}

TEST(Pooling, IdenticalInputsAreFixed) {
  ParamFactory f(3);
  auto scorer = ScorerParams::init(6, 3, f);
  std::mt19937_64 rng(6);
  Tensor common = oracle::random_tensor({6, 4}, rng);
  std::vector<Tensor> m{common, common, common};
  auto out = pool_phrases(m, oracle::random_tensor({6, 3}, rng), scorer);
  expect_equal(out.pooled, common, 1e-14);
  double total = 0.0;
  for (double c : out.weights.data()) {
    EXPECT_GE(c, 0.0);
    total += c;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Pooling, ScorerGradient) {
  ParamFactory f(7);
  auto scorer = ScorerParams::init(8, 4, f);
  std::mt19937_64 rng(7);
  std::vector<Tensor> m;
  for (int n = 0; n < 3; ++n) m.push_back(oracle::random_tensor({8, 5}, rng));
  Tensor phrases = oracle::random_tensor({8, 3}, rng);
  std::vector<Tensor> leaves{scorer.w_hidden, scorer.b_hidden, scorer.w_out};
  Tensor weights = oracle::random_tensor({8, 5}, rng);
  const auto loss = [&] { return ops::sum_all(ops::hadamard(pool_phrases(m, phrases, scorer).pooled, weights)); };
  EXPECT_LT(grad_check(loss, leaves, 1e-5).max_rel_error, 1e-4);
}

TEST(GlobalContext, ZeroValueIsIdentity) {
  ParamFactory f(8);
  GlobalContextParams p;
  p.blocks.push_back(NlBlockParams::init(5, f));
  zero(p.blocks[0].w_rv);
  std::mt19937_64 rng(8);
  Tensor x = oracle::random_tensor({5, 6}, rng);
  expect_equal(global_context(x, p), x);
  expect_equal(global_context(x, GlobalContextParams{}), x);
}

TEST(GlobalContext, SingleStep) {
  ParamFactory f(9);
  auto b = NlBlockParams::init(4, f);
  std::mt19937_64 rng(9);
  Tensor x = oracle::random_tensor({4, 1}, rng);
  expect_equal(nl_block(x, b), ops::add(x, ops::matmul(b.w_rv, x)), 1e-14);
}

TEST(GlobalContext, AttentionRowsAreStochastic) {
  ParamFactory f(10);
  auto b = NlBlockParams::init(6, f);
  std::mt19937_64 rng(10);
  Tensor a = nl_attention(oracle::random_tensor({6, 9}, rng, 3.0), b);
  for (std::size_t i = 0; i < 9; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 9; ++j) total += a.at(i, j);
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Lgvti, SentenceOnlyModeSkipsPooling) {
  ParamFactory f(11);
  LgvtiParams p;
  p.fusion = FusionParams::init(6, 1, FusionKind::kHadamard, f);
  p.local = LocalContextParams::init(6, LocalKind::kResBlock, 3, 3, 1, f);
  p.global.blocks.push_back(NlBlockParams::init(6, f));
  std::mt19937_64 rng(11);
  auto out = lgvti_forward(oracle::random_tensor({6, 5}, rng), oracle::random_tensor({6, 1}, rng), p,
                           Ordering::kFusionLocalGlobal);
  EXPECT_EQ(out.pool_weights.shape(), (Shape{1, 1}));
  EXPECT_DOUBLE_EQ(out.pool_weights.item(), 1.0);
  EXPECT_THROW(lgvti_forward(oracle::random_tensor({6, 5}, rng), oracle::random_tensor({6, 2}, rng), p,
                             Ordering::kFusionLocalGlobal),
               NInvalid);
}

TEST(Lgvti, OrderingsDiffer) {
  ParamFactory f(12);
  LgvtiParams p;
  p.fusion = FusionParams::init(6, 2, FusionKind::kHadamard, f);
  p.local = LocalContextParams::init(6, LocalKind::kResBlock, 3, 3, 1, f);
  p.global.phrase_scorer = ScorerParams::init(6, 3, f);
  p.global.blocks.push_back(NlBlockParams::init(6, f));
  std::mt19937_64 rng(12);
  Tensor s = oracle::random_tensor({6, 5}, rng);
  Tensor e = oracle::random_tensor({6, 2}, rng);
  Tensor a = lgvti_forward(s, e, p, Ordering::kFusionLocalGlobal).segments;
  Tensor b = lgvti_forward(s, e, p, Ordering::kLocalFusionGlobal).segments;
  Tensor c = lgvti_forward(s, e, p, Ordering::kLocalGlobalFusion).segments;
  double ab = 0.0, ac = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += std::abs(a.data()[i] - b.data()[i]);
    ac += std::abs(a.data()[i] - c.data()[i]);
  }
  EXPECT_GT(ab, 1e-9);
  EXPECT_GT(ac, 1e-9);
}

}  // namespace
}  // namespace lgi
