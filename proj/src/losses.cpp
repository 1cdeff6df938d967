// SPDX-License-Identifier: Apache-2.0
#include "lgi/losses.hpp"

#include <algorithm>
#include <cmath>

#include "lgi/errors.hpp"
#include "lgi/ops.hpp"

namespace lgi {

double smooth_l1(double x) {
  return std::fabs(x) < 1.0 ? 0.5 * x * x : std::fabs(x) - 0.5;
}

Tensor loss_reg(const Tensor& prediction, const Interval& truth) {
  if (prediction.size() != 2) {
    throw ShapeMismatch("loss_reg: prediction must hold (t_start, t_end), got " +
                        shape_str(prediction.shape()));
  }
  Tensor target({2, 1}, {truth.start, truth.end});
  Tensor pred = ops::reshape(prediction, {2, 1});
  return ops::sum_all(ops::smooth_l1(ops::sub(target, pred)));
}

std::vector<double> temporal_guide(const Interval& truth, std::size_t steps) {
  std::vector<double> guide(steps, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    const double center = (static_cast<double>(i) + 0.5) / static_cast<double>(steps);
    if (center >= truth.start && center <= truth.end) guide[i] = 1.0;
  }
  // An interval shorter than a segment may contain no center; fall back to
  // the segment holding its midpoint.
  if (steps > 0 && std::find(guide.begin(), guide.end(), 1.0) == guide.end() &&
      truth.end >= truth.start && truth.start >= 0.0 && truth.end <= 1.0) {
    const double mid = 0.5 * (truth.start + truth.end);
    guide[std::min(steps - 1, static_cast<std::size_t>(mid * static_cast<double>(steps)))] = 1.0;
  }
  return guide;
}

Tensor loss_tag(const Tensor& attention, std::span<const double> guide) {
  if (attention.size() != guide.size()) {
    throw ShapeMismatch("loss_tag: attention has " + std::to_string(attention.size()) +
                        " entries, guide " + std::to_string(guide.size()));
  }
  double mass = 0.0;
  for (double g : guide) mass += g;
  if (!(mass > 0.0)) throw EmptyGuide("loss_tag: no segment lies inside the ground truth");
  Tensor weights(attention.shape(), std::vector<double>(guide.begin(), guide.end()));
  Tensor log_o = ops::log_floor(attention, kTagLogFloor);
  return ops::scale(ops::sum_all(ops::hadamard(weights, log_o)), -1.0 / mass);
}

Tensor loss_dqa(const Tensor& attn, double lambda) {
  if (attn.rank() != 2) throw ShapeMismatch("loss_dqa: A must be [L, N]");
  const std::size_t n = attn.dim(1);
  std::vector<double> diag(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i * n + i] = lambda;
  Tensor gram = ops::matmul(ops::transpose(attn), attn);
  return ops::sq_frobenius(ops::sub(gram, Tensor({n, n}, std::move(diag))));
}

LossTerms total_loss(const Tensor& prediction, const Tensor& attention, const Tensor& query_attn,
                     const Interval& truth, const LossOptions& options) {
  Tensor reg = loss_reg(prediction, truth);
  Tensor tag = options.use_tag
                   ? loss_tag(attention, temporal_guide(truth, attention.size()))
                   : Tensor::scalar(0.0);
  Tensor dqa = (options.use_dqa && query_attn.defined()) ? loss_dqa(query_attn, options.lambda)
                                                         : Tensor::scalar(0.0);
  LossTerms terms;
  terms.total = ops::add(ops::add(reg, tag), dqa);
  terms.values.reg = reg.item();
  terms.values.tag = tag.item();
  terms.values.dqa = dqa.item();
  terms.values.total = terms.values.reg + terms.values.tag + terms.values.dqa;
  return terms;
}

}  // namespace lgi
