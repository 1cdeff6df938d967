// SPDX-License-Identifier: Apache-2.0
#include "lgi/scorer.hpp"

#include "lgi/ops.hpp"

namespace lgi {

ScorerParams ScorerParams::init(std::size_t d, std::size_t hidden, ParamFactory& factory) {
  ScorerParams p;
  p.w_hidden = factory.uniform({hidden, d}, d);
  p.b_hidden = factory.uniform({hidden, 1}, d);
  p.w_out = factory.uniform({1, hidden}, hidden);
  return p;
}

void ScorerParams::collect(const std::string& prefix, NamedParams& out) const {
  append_param(out, prefix + ".w1", w_hidden);
  append_param(out, prefix + ".b1", b_hidden);
  append_param(out, prefix + ".w2", w_out);
}

Tensor ScorerParams::score(const Tensor& x) const {
  return ops::matmul(w_out, ops::tanh(ops::add(ops::matmul(w_hidden, x), b_hidden)));
}

}  // namespace lgi
