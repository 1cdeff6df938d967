// SPDX-License-Identifier: Apache-2.0
#include "lgi/adam.hpp"

#include <cmath>

#include "lgi/errors.hpp"

namespace lgi {

AdamState AdamState::zeros(const NamedParams& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.tensor.size(), 0.0);
    s.v.emplace_back(p.tensor.size(), 0.0);
  }
  return s;
}

void adam_step(const NamedParams& params, AdamState& state, const AdamConfig& config) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeMismatch("adam_step: optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = params[i].tensor;
    if (state.m[i].size() != t.size() || state.v[i].size() != t.size()) {
      throw ShapeMismatch("adam_step: moment size differs for " + params[i].name);
    }
    if (!t.has_grad()) continue;
    for (double g : t.grad()) {
      if (!std::isfinite(g)) throw NonFiniteGradient(params[i].name);
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor tensor = params[i].tensor;
    const bool has_grad = tensor.has_grad();
    std::span<const double> grad = has_grad ? tensor.grad() : std::span<const double>{};
    std::span<double> value = tensor.mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = has_grad ? grad[k] : 0.0;
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[k] / correct1;
      const double v_hat = v[k] / correct2;
      value[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double grad_norm(const NamedParams& params) {
  double total = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) total += g * g;
  }
  return std::sqrt(total);
}

void clip_grad_norm(const NamedParams& params, double max_norm) {
  if (!(max_norm > 0.0)) throw InvalidArgument("clip_grad_norm: max_norm must be positive");
  const double norm = grad_norm(params);
  if (norm <= max_norm) return;
  const double factor = max_norm / norm;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    if (!t.has_grad()) continue;
    for (double& g : t.mutable_grad()) g *= factor;
  }
}

void zero_grads(const NamedParams& params) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

}  // namespace lgi
