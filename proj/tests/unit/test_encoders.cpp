// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "lgi/encoders.hpp"
#include "lgi/errors.hpp"
#include "lgi/grad_check.hpp"
#include "lgi/ops.hpp"
#include "oracles.hpp"

namespace lgi {
namespace {

FeatureMatrix ramp(std::uint32_t frames, std::uint32_t dims) {
  FeatureMatrix f{frames, dims, std::vector<float>(frames * dims)};
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t c = 0; c < dims; ++c) f.at(t, c) = static_cast<float>(10 * t + c);
  }
  return f;
}

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Person opens the door, then SITS."),
            (std::vector<std::string>{"person", "opens", "the", "door", "then", "sits"}));
  EXPECT_TRUE(tokenize(" ,. ").empty());
}

TEST(Vocabulary, ReservedIndicesAndUnknown) {
  Vocabulary v;
  EXPECT_EQ(v.index_of("<pad>"), Vocabulary::kPad);
  const int jump = v.add("jump");
  EXPECT_EQ(jump, 2);
  EXPECT_EQ(v.add("jump"), 2);
  EXPECT_EQ(v.index_of("never-seen"), Vocabulary::kUnknown);
}

TEST(Vocabulary, JsonRoundTrip) {
  Vocabulary v;
  v.add("cook");
  v.add("then");
  EXPECT_EQ(Vocabulary::from_json(v.to_json()), v);
  EXPECT_THROW(Vocabulary::from_json(R"({"<pad>":0,"<unk>":1,"a":3})"), InvariantViolation);
  EXPECT_THROW(Vocabulary::from_json(R"({"<pad>":0,)"), FormatError);
}

TEST(QueryEncoder, SingleWordSentenceIsTheColumn) {
  ParamFactory f(1);
  auto p = QueryEncoderParams::init(6, 8, f);
  const std::vector<int> tokens{3};
  auto enc = encode_query(tokens, p);
  ASSERT_EQ(enc.words.shape(), (Shape{8, 1}));
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(enc.words.at(i, 0), enc.sentence.at(i, 0));
}

TEST(QueryEncoder, ZeroWeightsGiveConstantOutput) {
  ParamFactory f(1);
  auto p = QueryEncoderParams::init(6, 8, f);
  for (auto& layer : p.layers) {
    for (auto* dir : {&layer.forward, &layer.backward}) {
      for (std::size_t g = 0; g < 4; ++g) {
        for (Tensor* t : {&dir->w_x[g], &dir->w_h[g], &dir->bias[g]}) {
          for (double& x : t->mutable_data()) x = 0.0;
        }
      }
    }
  }
  const std::vector<int> a{2, 3, 4}, b{5, 1, 0};
  auto ea = encode_query(a, p), eb = encode_query(b, p);
  for (std::size_t i = 0; i < ea.words.size(); ++i) EXPECT_EQ(ea.words.data()[i], eb.words.data()[i]);
  for (double x : ea.sentence.data()) EXPECT_EQ(x, 0.0);  // o * tanh(i * tanh(0)) = 0
}

TEST(QueryEncoder, OrderSensitive) {
  ParamFactory f(4);
  auto p = QueryEncoderParams::init(8, 8, f);
  const std::vector<int> a{2, 3, 4}, b{4, 3, 2};
  auto ea = encode_query(a, p), eb = encode_query(b, p);
  double diff = 0.0;
  for (std::size_t i = 0; i < ea.sentence.size(); ++i) diff += std::abs(ea.sentence.data()[i] - eb.sentence.data()[i]);
  EXPECT_GT(diff, 1e-6);
}

TEST(QueryEncoder, EmptyQueryRejected) {
  ParamFactory f(1);
  auto p = QueryEncoderParams::init(4, 8, f);
  EXPECT_THROW(encode_query(std::vector<int>{}, p), EmptyQuery);
  EXPECT_THROW(encode_query(std::vector<int>{9}, p), IndexOutOfRange);
}

TEST(QueryEncoder, EmbeddingGradient) {
  ParamFactory f(2);
  auto p = QueryEncoderParams::init(5, 8, f);
  const std::vector<int> tokens{2, 4, 3};
  std::vector<Tensor> leaves{p.embedding};
  const auto report = grad_check([&] { return ops::sum_all(encode_query(tokens, p).sentence); }, leaves, 1e-5);
  EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(SampleSegments, IdentityWhenLengthsMatch) {
  auto raw = ramp(4, 2);
  auto s = sample_segments(raw, 4);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(s.features.at(c, t), raw.at(t, c));
  }
  EXPECT_EQ(s.valid, (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(SampleSegments, RoundingRule) {
  auto s = sample_segments(ramp(5, 1), 3);
  EXPECT_EQ(std::vector<double>(s.features.data().begin(), s.features.data().end()),
            (std::vector<double>{0, 20, 40}));
}

TEST(SampleSegments, ZeroFillsShortVideos) {
  auto s = sample_segments(ramp(2, 1), 4);
  EXPECT_EQ(std::vector<double>(s.features.data().begin(), s.features.data().end()),
            (std::vector<double>{0, 10, 0, 0}));
  EXPECT_EQ(s.valid, (std::vector<std::uint8_t>{1, 1, 0, 0}));
}

TEST(EncodeVideo, ZeroSegmentWeightsLeavePositions) {
  ParamFactory f(3);
  auto p = VideoEncoderParams::init(4, 3, 5, true, f);
  for (double& x : p.w_seg.mutable_data()) x = 0.0;
  auto s = sample_segments(ramp(5, 3), 5);
  auto out = encode_video(s.features, s.valid, p);
  for (std::size_t i = 0; i < out.segments.size(); ++i) EXPECT_EQ(out.segments.data()[i], p.w_pos.data()[i]);
}

TEST(EncodeVideo, ZeroInputWithoutPositionsIsZero) {
  ParamFactory f(3);
  auto p = VideoEncoderParams::init(4, 3, 5, false, f);
  std::vector<std::uint8_t> valid(5, 1);
  auto out = encode_video(Tensor::zeros({3, 5}), valid, p);
  for (double x : out.segments.data()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(encode_video(Tensor::zeros({2, 5}), valid, p), ShapeMismatch);
}

TEST(Encoders, EndToEndGradient) {
  ParamFactory f(8);
  auto qp = QueryEncoderParams::init(7, 8, f);
  auto vp = VideoEncoderParams::init(8, 6, 6, true, f);
  std::mt19937_64 rng(1);
  Tensor video = oracle::random_tensor({6, 6}, rng);
  std::vector<std::uint8_t> valid(6, 1);
  const std::vector<int> tokens{2, 5, 6, 3};
  NamedParams named;
  qp.collect("query", named);
  vp.collect("video", named);
  std::vector<Tensor> leaves;
  for (auto& n : named) leaves.push_back(n.tensor);
  const auto loss = [&] {
    auto q = encode_query(tokens, qp);
    auto s = encode_video(video, valid, vp);
    return ops::sum_all(ops::matmul(ops::transpose(q.sentence), s.segments));
  };
  EXPECT_LT(grad_check(loss, leaves, 1e-5).max_rel_error, 1e-4);
}

}  // namespace
}  // namespace lgi
