// SPDX-License-Identifier: Apache-2.0
#include "lgi/grounding_head.hpp"

#include <algorithm>
#include <utility>

#include "lgi/errors.hpp"
#include "lgi/ops.hpp"

namespace lgi {

HeadParams HeadParams::init(std::size_t d, ParamFactory& factory) {
  HeadParams p;
  p.temporal = ScorerParams::init(d, d / 2, factory);
  p.reg_w1 = factory.uniform({d, d}, d);
  p.reg_b1 = factory.uniform({d, 1}, d);
  p.reg_w2 = factory.uniform({2, d}, d);
  p.reg_b2 = factory.uniform({2, 1}, d);
  return p;
}

void HeadParams::collect(const std::string& prefix, NamedParams& out) const {
  temporal.collect(prefix + ".tatt", out);
  append_param(out, prefix + ".reg.w1", reg_w1);
  append_param(out, prefix + ".reg.b1", reg_b1);
  append_param(out, prefix + ".reg.w2", reg_w2);
  append_param(out, prefix + ".reg.b2", reg_b2);
}

Prediction predict_interval(const Tensor& segments, const HeadParams& params,
                            std::span<const std::uint8_t> valid) {
  const std::size_t steps = segments.dim(1);
  Tensor logits = params.temporal.score(segments);  // [1, T]
  Tensor attention;
  if (!valid.empty()) {
    if (valid.size() != steps) throw ShapeMismatch("predict_interval: mask length differs from T");
    std::vector<double> mask(steps);
    for (std::size_t i = 0; i < steps; ++i) mask[i] = valid[i] ? 0.0 : kMaskedLogit;
    attention = ops::softmax_rows(logits, Tensor({1, steps}, std::move(mask)));
  } else {
    attention = ops::softmax_rows(logits);
  }
  Tensor summary = ops::matmul(segments, ops::transpose(attention));
  Tensor hidden = ops::relu(ops::add(ops::matmul(params.reg_w1, summary), params.reg_b1));
  Tensor raw = ops::add(ops::matmul(params.reg_w2, hidden), params.reg_b2);
  return {raw, attention, summary};
}

Interval canonicalize(double start, double end) {
  start = std::clamp(start, 0.0, 1.0);
  end = std::clamp(end, 0.0, 1.0);
  if (start > end) std::swap(start, end);
  return {start, end};
}

}  // namespace lgi
