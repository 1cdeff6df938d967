// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lgi/interval.hpp"
#include "lgi/tensor.hpp"

namespace lgi {

inline constexpr double kTagLogFloor = 1e-12;

double smooth_l1(double x);

// Sum of smooth-L1 distances between the ground truth and raw [2, 1]
// prediction.
Tensor loss_reg(const Tensor& prediction, const Interval& truth);

// Segment i (1-based) is guided iff its center (i - 0.5) / T lies inside
// `truth`. When no center does, the segment holding the midpoint is guided.
std::vector<double> temporal_guide(const Interval& truth, std::size_t steps);

// -sum(g_i log o_i) / sum(g_i) with log floored at kTagLogFloor.
Tensor loss_tag(const Tensor& attention, std::span<const double> guide);

// ||A^T A - lambda I||_F^2 for A: [L, N].
Tensor loss_dqa(const Tensor& attn, double lambda);

struct LossOptions {
  double lambda = 0.3;
  bool use_tag = true;
  bool use_dqa = true;
};

struct LossBreakdown {
  double reg = 0.0;
  double tag = 0.0;
  double dqa = 0.0;
  double total = 0.0;
};

struct LossTerms {
  Tensor total;  // differentiable unit-weight sum
  LossBreakdown values;
};

// Disabled terms and a missing attention matrix (sentence-only variant)
// contribute exactly zero.
LossTerms total_loss(const Tensor& prediction, const Tensor& attention, const Tensor& query_attn,
                     const Interval& truth, const LossOptions& options);

}  // namespace lgi
