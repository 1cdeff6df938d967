// SPDX-License-Identifier: Apache-2.0
// Brute-force reference implementations used by the unit and acceptance
// tests. Deliberately naive; none of them share code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "lgi/interval.hpp"
#include "lgi/tensor.hpp"

namespace lgi::oracle {

// out[o][t] = bias[o] + sum_c sum_j kernel[o][c][j] * seq[c][t + j - k/2].
inline std::vector<double> conv1d(const std::vector<double>& seq, std::size_t d, std::size_t steps,
                                  const std::vector<double>& kernel, std::size_t d_out,
                                  std::size_t k, const std::vector<double>& bias) {
  std::vector<double> out(d_out * steps, 0.0);
  const long half = static_cast<long>(k / 2);
  for (std::size_t o = 0; o < d_out; ++o) {
    for (std::size_t t = 0; t < steps; ++t) {
      double acc = bias[o];
      for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t j = 0; j < k; ++j) {
          const long src = static_cast<long>(t) + static_cast<long>(j) - half;
          if (src < 0 || src >= static_cast<long>(steps)) continue;
          acc += kernel[(o * d + c) * k + j] * seq[c * steps + static_cast<std::size_t>(src)];
        }
      }
      out[o * steps + t] = acc;
    }
  }
  return out;
}

// tIoU by counting cells of a uniform grid over [0, 1].
inline double raster_tiou(const Interval& a, const Interval& b, std::size_t cells = 10000) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
    const bool in_a = x >= a.start && x < a.end;
    const bool in_b = x >= b.start && x < b.end;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double scale = 1.0,
                            bool requires_grad = false) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = n(rng);
  return Tensor(shape, std::move(v), requires_grad);
}

inline Interval random_interval(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  if (b - a < 1e-3) b = std::min(1.0, a + 0.01);
  return {a, b};
}

}  // namespace lgi::oracle
