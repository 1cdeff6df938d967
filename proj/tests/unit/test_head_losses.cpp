// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lgi/errors.hpp"
#include "lgi/grad_check.hpp"
#include "lgi/grounding_head.hpp"
#include "lgi/losses.hpp"
#include "lgi/ops.hpp"
#include "oracles.hpp"

namespace lgi {
namespace {

Tensor column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n, 1}, std::move(v));
}

TEST(Head, IdenticalColumnsGiveUniformAttention) {
  ParamFactory f(1);
  auto p = HeadParams::init(6, f);
  std::mt19937_64 rng(1);
  Tensor r = ops::broadcast_cols(oracle::random_tensor({6, 1}, rng), 5);
  auto pred = predict_interval(r, p);
  for (double o : pred.attention.data()) EXPECT_NEAR(o, 0.2, 1e-15);
}

TEST(Head, SingleSegment) {
  ParamFactory f(1);
  auto p = HeadParams::init(6, f);
  std::mt19937_64 rng(2);
  Tensor r = oracle::random_tensor({6, 1}, rng);
  auto pred = predict_interval(r, p);
  EXPECT_DOUBLE_EQ(pred.attention.item(), 1.0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(pred.summary.at(i, 0), r.at(i, 0));
}

TEST(Head, SummaryInConvexHull) {
  ParamFactory f(3);
  auto p = HeadParams::init(6, f);
  std::mt19937_64 rng(3);
  Tensor r = oracle::random_tensor({6, 7}, rng);
  auto pred = predict_interval(r, p);
  double total = 0.0;
  for (double o : pred.attention.data()) total += o;
  EXPECT_NEAR(total, 1.0, 1e-9);
  for (std::size_t i = 0; i < 6; ++i) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t t = 0; t < 7; ++t) {
      lo = std::min(lo, r.at(i, t));
      hi = std::max(hi, r.at(i, t));
    }
    EXPECT_GE(pred.summary.at(i, 0), lo - 1e-12);
    EXPECT_LE(pred.summary.at(i, 0), hi + 1e-12);
  }
}

TEST(Head, InvalidSegmentsMasked) {
  ParamFactory f(4);
  auto p = HeadParams::init(6, f);
  std::mt19937_64 rng(4);
  const std::vector<std::uint8_t> valid{1, 1, 0, 0};
  auto pred = predict_interval(oracle::random_tensor({6, 4}, rng), p, valid);
  EXPECT_EQ(pred.attention.at(0, 2), 0.0);
  EXPECT_EQ(pred.attention.at(0, 3), 0.0);
}

TEST(Head, StartGradientWrtSegments) {
  ParamFactory f(5);
  auto p = HeadParams::init(8, f);
  std::mt19937_64 rng(5);
  const double err = grad_check(
      [&](const Tensor& r) { return ops::slice_cols(ops::transpose(predict_interval(r, p).raw), 0, 1); },
      oracle::random_tensor({8, 5}, rng, 1.0, true), 1e-5);
  EXPECT_LT(err, 1e-4);
}

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize(0.3, 0.7), (Interval{0.3, 0.7}));
  EXPECT_EQ(canonicalize(1.4, -0.2), (Interval{0.0, 1.0}));
  EXPECT_EQ(canonicalize(0.9, 0.2), (Interval{0.2, 0.9}));
  const Interval once = canonicalize(-3.0, 0.4);
  EXPECT_EQ(canonicalize(once.start, once.end), once);
}

TEST(LossReg, Values) {
  EXPECT_EQ(loss_reg(column({0.2, 0.6}), {0.2, 0.6}).item(), 0.0);
  EXPECT_EQ(loss_reg(column({0.0, 0.5}), {0.5, 0.5}).item(), 0.125);
  EXPECT_EQ(loss_reg(column({-1.0, 3.5}), {1.0, 0.5}).item(), 4.0);
}

TEST(LossTag, Examples) {
  const std::vector<double> guide{0, 1, 1, 0};
  Tensor o({1, 4}, {0.1, 0.4, 0.4, 0.1});
  EXPECT_NEAR(loss_tag(o, guide).item(), -std::log(0.4), 1e-9);

  const std::vector<double> all(5, 1.0);
  EXPECT_NEAR(loss_tag(Tensor::full({1, 5}, 0.2), all).item(), std::log(5.0), 1e-12);

  const std::vector<double> one{0, 0, 1};
  EXPECT_NEAR(loss_tag(Tensor({1, 3}, {0, 0, 1}), one).item(), 0.0, 1e-15);
  // The floor keeps a zero weight on a guided segment finite.
  EXPECT_NEAR(loss_tag(Tensor({1, 3}, {1, 0, 0}), one).item(), -std::log(kTagLogFloor), 1e-9);
  EXPECT_THROW(loss_tag(o, std::vector<double>(4, 0.0)), EmptyGuide);
}

TEST(LossTag, MovingMassIntoTheGuideNeverHurts) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const std::vector<double> guide{0, 1, 1, 1, 0, 0};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> o(6);
    double total = 0.0;
    for (double& x : o) total += (x = u(rng));
    for (double& x : o) x /= total;
    const double before = loss_tag(Tensor({1, 6}, o), guide).item();
    // Shrink outside mass and rescale the inside so the vector still sums to 1.
    double inside = 0.0, outside = 0.0;
    for (std::size_t i = 0; i < 6; ++i) (guide[i] ? inside : outside) += o[i];
    const double shrink = 0.5;
    for (std::size_t i = 0; i < 6; ++i) {
      o[i] = guide[i] ? o[i] * (inside + (1 - shrink) * outside) / inside : o[i] * shrink;
    }
    EXPECT_LE(loss_tag(Tensor({1, 6}, o), guide).item(), before + 1e-12);
  }
}

TEST(TemporalGuide, SegmentCenters) {
  EXPECT_EQ(temporal_guide({0.25, 0.5}, 8), (std::vector<double>{0, 0, 1, 1, 0, 0, 0, 0}));
  EXPECT_EQ(temporal_guide({0.0, 1.0}, 3), (std::vector<double>{1, 1, 1}));
}

TEST(TemporalGuide, ShortIntervalGuidesMidpointSegment) {
  EXPECT_EQ(temporal_guide({0.26, 0.30}, 4), (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(temporal_guide({1.0, 1.0}, 4), (std::vector<double>{0, 0, 0, 1}));
}

TEST(LossDqa, Examples) {
  EXPECT_NEAR(loss_dqa(Tensor({4, 2}, {1, 0, 0, 1, 0, 0, 0, 0}), 1.0).item(), 0.0, 1e-15);
  EXPECT_NEAR(loss_dqa(Tensor::full({4, 2}, 0.25), 0.0).item(), 0.25, 1e-12);
  EXPECT_NEAR(loss_dqa(Tensor({3, 1}, {1, 0, 0}), 0.3).item(), 0.49, 1e-12);
}

TEST(TotalLoss, BreakdownSums) {
  Tensor pred = column({0.1, 0.9});
  Tensor o({1, 4}, {0.1, 0.4, 0.4, 0.1});
  Tensor a = Tensor::full({3, 2}, 1.0 / 3.0);
  const Interval gt{0.25, 0.75};
  auto terms = total_loss(pred, o, a, gt, {0.3, true, true});
  EXPECT_DOUBLE_EQ(terms.values.reg, loss_reg(pred, gt).item());
  EXPECT_DOUBLE_EQ(terms.values.tag, loss_tag(o, temporal_guide(gt, 4)).item());
  EXPECT_DOUBLE_EQ(terms.values.dqa, loss_dqa(a, 0.3).item());
  EXPECT_DOUBLE_EQ(terms.values.total, terms.values.reg + terms.values.tag + terms.values.dqa);
  EXPECT_DOUBLE_EQ(terms.total.item(), terms.values.total);

  auto no_dqa = total_loss(pred, o, a, gt, {0.3, true, false});
  EXPECT_EQ(no_dqa.values.dqa, 0.0);
  auto sentence_only = total_loss(pred, o, Tensor{}, gt, {0.3, true, true});
  EXPECT_EQ(sentence_only.values.dqa, 0.0);
  auto none = total_loss(column({0.25, 0.75}), o, a, gt, {0.3, false, false});
  EXPECT_EQ(none.values.total, 0.0);
}

}  // namespace
}  // namespace lgi
