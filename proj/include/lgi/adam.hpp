// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lgi/params.hpp"

namespace lgi {

struct AdamConfig {
  double learning_rate = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moments, one buffer per named parameter.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState zeros(const NamedParams& params);
};

// One bias-corrected Adam update from the gradients stored on `params`.
// A parameter without a gradient is treated as having a zero gradient.
// Throws NonFiniteGradient naming the first offending parameter before
// anything is modified.
void adam_step(const NamedParams& params, AdamState& state, const AdamConfig& config);

// Global L2 norm of all stored gradients.
double grad_norm(const NamedParams& params);

// Rescales every gradient so the global norm is at most `max_norm`.
void clip_grad_norm(const NamedParams& params, double max_norm);

void zero_grads(const NamedParams& params);

}  // namespace lgi
