// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "lgi/tensor.hpp"

namespace lgi::detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  OpKind kind = OpKind::kLeaf;
  std::uint64_t tape_id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into its parents' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace lgi::detail
