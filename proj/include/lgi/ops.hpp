// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lgi/tensor.hpp"

// Differentiable primitives. Matrices are rank-2 and column vectors are
// [n, 1]; rank-1 tensors are accepted by elementwise ops and softmax.
namespace lgi::ops {

// [m, k] x [k, n] -> [m, n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Same-shape add, or a rank-2 [m, n] plus a bias of shape [m] or [m, 1]
// broadcast over the trailing axis.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);

// axis 0 stacks rows, axis 1 stacks columns.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor smooth_l1(const Tensor& x);
// log(max(x, floor)); the gradient is zero where the floor is active.
Tensor log_floor(const Tensor& x, double floor = 1e-12);

// Softmax over each row (over the whole tensor when rank-1). The optional
// mask has the logits' shape with entries in {0, kMaskedLogit}.
Tensor softmax_rows(const Tensor& logits);
Tensor softmax_rows(const Tensor& logits, const Tensor& mask);

// axis 0 reduces rows -> [1, n]; axis 1 reduces columns -> [m, 1].
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
// Reductions to a 1x1 scalar.
Tensor sum_all(const Tensor& x);
Tensor sq_frobenius(const Tensor& x);

Tensor scale(const Tensor& x, double factor);

// Rows of table [V, d] picked by index -> [n, d].
Tensor embedding_rows(const Tensor& table, std::span<const int> indices);

// seq [d, T], kernels [d_out, d, k] with k odd, bias of size d_out.
// Zero padding (k-1)/2 on both sides keeps the output length at T.
Tensor conv1d_same(const Tensor& seq, const Tensor& kernels, const Tensor& bias);

// Repeats a column vector [m] or [m, 1] n times -> [m, n].
Tensor broadcast_cols(const Tensor& v, std::size_t n);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor reshape(const Tensor& x, Shape shape);

}  // namespace lgi::ops
