// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lgi/tensor.hpp"

namespace lgi {

struct NamedParam {
  std::string name;
  Tensor tensor;  // shares storage with the owning parameter struct
};
using NamedParams = std::vector<NamedParam>;

// Appends `t` under `name` when it is defined; disabled sub-networks leave
// their tensors undefined and simply vanish from the census.
void append_param(NamedParams& out, std::string name, const Tensor& t);

std::size_t param_count(const NamedParams& params);

// Seeded source of learnable leaves. Weights are drawn uniformly from
// [-1/sqrt(fan_in), 1/sqrt(fan_in)].
class ParamFactory {
 public:
  explicit ParamFactory(std::uint64_t seed) : rng_(seed) {}

  Tensor uniform(Shape shape, std::size_t fan_in);
  Tensor zeros(Shape shape);

 private:
  std::mt19937_64 rng_;
};

}  // namespace lgi
