// SPDX-License-Identifier: Apache-2.0
#include "lgi/params.hpp"

#include <cmath>

namespace lgi {

void append_param(NamedParams& out, std::string name, const Tensor& t) {
  if (t.defined()) out.push_back({std::move(name), t});
}

std::size_t param_count(const NamedParams& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

Tensor ParamFactory::uniform(Shape shape, std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(shape_size(shape));
  for (double& v : data) v = dist(rng_);
  return Tensor(std::move(shape), std::move(data), true);
}

Tensor ParamFactory::zeros(Shape shape) { return Tensor::zeros(std::move(shape), true); }

}  // namespace lgi
