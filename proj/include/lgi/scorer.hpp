// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "lgi/params.hpp"
#include "lgi/tensor.hpp"

namespace lgi {

// Column-wise attention scorer d -> hidden (tanh) -> 1. The output layer has
// no bias; softmax over the scores would cancel it anyway.
struct ScorerParams {
  Tensor w_hidden;  // [hidden, d]
  Tensor b_hidden;  // [hidden, 1]
  Tensor w_out;     // [1, hidden]

  static ScorerParams init(std::size_t d, std::size_t hidden, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
  bool defined() const { return w_hidden.defined(); }

  // x: [d, n] -> scores [1, n].
  Tensor score(const Tensor& x) const;
};

}  // namespace lgi
