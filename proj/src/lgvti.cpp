// SPDX-License-Identifier: Apache-2.0
#include "lgi/lgvti.hpp"

#include <array>
#include <cmath>

#include "lgi/errors.hpp"
#include "lgi/ops.hpp"

namespace lgi {

FusionParams FusionParams::init(std::size_t d, std::size_t steps, FusionKind kind,
                                ParamFactory& factory) {
  FusionParams p;
  p.kind = kind;
  for (std::size_t n = 0; n < steps; ++n) {
    FusionStepParams s;
    s.w_m = factory.uniform({d, d}, d);
    s.w_s = factory.uniform({d, d}, d);
    s.w_e = factory.uniform({d, d}, d);
    if (kind == FusionKind::kConcat) s.w_cat = factory.uniform({d, 2 * d}, 2 * d);
    p.steps.push_back(std::move(s));
  }
  return p;
}

void FusionParams::collect(const std::string& prefix, NamedParams& out) const {
  for (std::size_t n = 0; n < steps.size(); ++n) {
    const std::string base = prefix + ".step" + std::to_string(n + 1);
    append_param(out, base + ".w_m", steps[n].w_m);
    append_param(out, base + ".w_s", steps[n].w_s);
    append_param(out, base + ".w_e", steps[n].w_e);
    append_param(out, base + ".w_cat", steps[n].w_cat);
  }
}

NlBlockParams NlBlockParams::init(std::size_t d, ParamFactory& factory) {
  return {factory.uniform({d, d}, d), factory.uniform({d, d}, d), factory.uniform({d, d}, d)};
}

void NlBlockParams::collect(const std::string& prefix, NamedParams& out) const {
  append_param(out, prefix + ".w_rq", w_rq);
  append_param(out, prefix + ".w_rk", w_rk);
  append_param(out, prefix + ".w_rv", w_rv);
}

LocalContextParams LocalContextParams::init(std::size_t d, LocalKind kind, std::size_t kernel,
                                            std::size_t window, std::size_t blocks,
                                            ParamFactory& factory) {
  LocalContextParams p;
  p.kind = kind;
  p.kernel = kernel;
  p.window = window;
  switch (kind) {
    case LocalKind::kResBlock:
      if (kernel % 2 == 0) throw EvenKernel("ResBlock kernel must be odd");
      p.res.conv1_w = factory.uniform({d, d, kernel}, d * kernel);
      p.res.conv1_b = factory.uniform({d, 1}, d * kernel);
      p.res.conv2_w = factory.uniform({d, d, kernel}, d * kernel);
      p.res.conv2_b = factory.uniform({d, 1}, d * kernel);
      break;
    case LocalKind::kMaskedNl:
      if (window % 2 == 0) throw InvalidArgument("masked NL window must be odd");
      if (blocks == 0) throw InvalidArgument("masked NL needs at least one block");
      for (std::size_t b = 0; b < blocks; ++b) p.masked.push_back(NlBlockParams::init(d, factory));
      break;
    case LocalKind::kNone:
      break;
  }
  return p;
}

void LocalContextParams::collect(const std::string& prefix, NamedParams& out) const {
  append_param(out, prefix + ".res.conv1_w", res.conv1_w);
  append_param(out, prefix + ".res.conv1_b", res.conv1_b);
  append_param(out, prefix + ".res.conv2_w", res.conv2_w);
  append_param(out, prefix + ".res.conv2_b", res.conv2_b);
  for (std::size_t b = 0; b < masked.size(); ++b) {
    masked[b].collect(prefix + ".masked_nl" + std::to_string(b + 1), out);
  }
}

void GlobalContextParams::collect(const std::string& prefix, NamedParams& out) const {
  phrase_scorer.collect(prefix + ".satt", out);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].collect(prefix + ".nl" + std::to_string(b + 1), out);
  }
}

Tensor fuse_segments(const Tensor& segments, const Tensor& phrase, const FusionStepParams& params,
                     FusionKind kind) {
  if (segments.rank() != 2 || phrase.rank() != 2 || phrase.dim(1) != 1 ||
      phrase.dim(0) != segments.dim(0)) {
    throw ShapeMismatch("fuse_segments: S " + shape_str(segments.shape()) + " and e " +
                        shape_str(phrase.shape()) + " disagree");
  }
  const std::size_t steps = segments.dim(1);
  Tensor seg = ops::matmul(params.w_s, segments);
  Tensor ph = ops::broadcast_cols(ops::matmul(params.w_e, phrase), steps);
  Tensor joint;
  switch (kind) {
    case FusionKind::kHadamard:
      joint = ops::hadamard(seg, ph);
      break;
    case FusionKind::kAddition:
      joint = ops::add(seg, ph);
      break;
    case FusionKind::kConcat: {
      if (!params.w_cat.defined()) throw ShapeMismatch("fuse_segments: concat projection missing");
      const std::array<Tensor, 2> parts{seg, ph};
      joint = ops::matmul(params.w_cat, ops::concat(parts, 0));
      break;
    }
  }
  return ops::matmul(params.w_m, joint);
}

Tensor window_mask(std::size_t steps, std::size_t window) {
  const std::size_t half = window / 2;
  std::vector<double> mask(steps * steps, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap > half) mask[i * steps + j] = kMaskedLogit;
    }
  }
  return Tensor({steps, steps}, std::move(mask));
}

Tensor nl_attention(const Tensor& x, const NlBlockParams& params, const Tensor& mask) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.dim(0)));
  Tensor queries = ops::matmul(params.w_rq, x);
  Tensor keys = ops::matmul(params.w_rk, x);
  Tensor logits = ops::scale(ops::matmul(ops::transpose(queries), keys), inv_sqrt_d);
  return mask.defined() ? ops::softmax_rows(logits, mask) : ops::softmax_rows(logits);
}

Tensor nl_block(const Tensor& x, const NlBlockParams& params, const Tensor& mask) {
  Tensor attention = nl_attention(x, params, mask);
  Tensor values = ops::matmul(params.w_rv, x);
  return ops::add(x, ops::matmul(values, ops::transpose(attention)));
}

Tensor local_context(const Tensor& x, const LocalContextParams& params) {
  switch (params.kind) {
    case LocalKind::kResBlock: {
      Tensor hidden = ops::relu(ops::conv1d_same(x, params.res.conv1_w, params.res.conv1_b));
      return ops::add(x, ops::conv1d_same(hidden, params.res.conv2_w, params.res.conv2_b));
    }
    case LocalKind::kMaskedNl: {
      const Tensor mask = window_mask(x.dim(1), params.window);
      Tensor out = x;
      for (const auto& block : params.masked) out = nl_block(out, block, mask);
      return out;
    }
    case LocalKind::kNone:
      return x;
  }
  return x;
}

PooledSegments pool_phrases(std::span<const Tensor> per_phrase, const Tensor& phrases,
                            const ScorerParams& scorer) {
  const std::size_t count = per_phrase.size();
  if (count == 0) throw NInvalid("pool_phrases: no phrase features");
  if (phrases.rank() != 2 || phrases.dim(1) != count) {
    throw ShapeMismatch("pool_phrases: " + std::to_string(count) + " segment features but phrases " +
                        shape_str(phrases.shape()));
  }
  if (!scorer.defined()) {
    if (count != 1) throw InvalidArgument("pool_phrases: N > 1 needs the phrase scorer");
    return {per_phrase[0], Tensor::scalar(1.0)};
  }
  Tensor weights = ops::softmax_rows(scorer.score(phrases));  // [1, N]
  if (count == 1) return {per_phrase[0], weights};

  const Shape shape = per_phrase[0].shape();
  std::vector<Tensor> rows;
  rows.reserve(count);
  for (const Tensor& m : per_phrase) {
    if (m.shape() != shape) throw ShapeMismatch("pool_phrases: per-phrase shapes differ");
    rows.push_back(ops::reshape(m, {1, m.size()}));
  }
  Tensor pooled = ops::reshape(ops::matmul(weights, ops::concat(rows, 0)), shape);
  return {pooled, weights};
}

Tensor global_context(const Tensor& x, const GlobalContextParams& params) {
  Tensor out = x;
  for (const auto& block : params.blocks) out = nl_block(out, block);
  return out;
}

LgvtiOutput lgvti_forward(const Tensor& segments, const Tensor& phrases, const LgvtiParams& params,
                          Ordering ordering) {
  const std::size_t count = phrases.dim(1);
  if (params.fusion.steps.size() != count) {
    throw NInvalid("lgvti_forward: " + std::to_string(count) + " phrases but " +
                   std::to_string(params.fusion.steps.size()) + " fusion steps");
  }
  auto fuse_all = [&](const Tensor& base, bool with_local) {
    std::vector<Tensor> fused;
    fused.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
      Tensor m = fuse_segments(base, ops::slice_cols(phrases, n, 1), params.fusion.steps[n],
                               params.fusion.kind);
      fused.push_back(with_local ? local_context(m, params.local) : m);
    }
    return fused;
  };

  switch (ordering) {
    case Ordering::kFusionLocalGlobal: {
      auto fused = fuse_all(segments, true);
      auto pooled = pool_phrases(fused, phrases, params.global.phrase_scorer);
      return {global_context(pooled.pooled, params.global), pooled.weights};
    }
    case Ordering::kLocalFusionGlobal: {
      auto fused = fuse_all(local_context(segments, params.local), false);
      auto pooled = pool_phrases(fused, phrases, params.global.phrase_scorer);
      return {global_context(pooled.pooled, params.global), pooled.weights};
    }
    case Ordering::kLocalGlobalFusion: {
      Tensor context = global_context(local_context(segments, params.local), params.global);
      auto fused = fuse_all(context, false);
      auto pooled = pool_phrases(fused, phrases, params.global.phrase_scorer);
      return {pooled.pooled, pooled.weights};
    }
  }
  throw InvalidArgument("lgvti_forward: unknown ordering");
}

}  // namespace lgi
