// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "lgi/tensor.hpp"

namespace lgi {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords = 0;
  // Leaf and flat coordinate that produced max_rel_error.
  std::size_t worst_leaf = 0;
  std::size_t worst_coord = 0;
};

// Compares reverse-mode gradients of the scalar `loss` with central
// differences of step `eps`, coordinate by coordinate over every leaf.
// The error of one coordinate is |analytic - numeric| / max(1, |analytic|,
// |numeric|). Leaves are restored to their original values on return; their
// accumulated grads are cleared. Functions with kinks (relu, abs) must be
// probed at least eps away from them by the caller.
GradCheckReport grad_check(const std::function<Tensor()>& loss, std::span<Tensor> leaves,
                           double eps);

// Single-point convenience form: f is evaluated on a requires_grad copy of
// `point`.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                  double eps);

}  // namespace lgi
