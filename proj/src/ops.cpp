// SPDX-License-Identifier: Apache-2.0
#include "lgi/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "lgi/errors.hpp"
#include "node.hpp"

namespace lgi::ops {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return ConstMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MutMap as_matrix(std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return MutMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Tensor make_result(OpKind kind, Shape shape, std::vector<double> value,
                   std::vector<NodePtr> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->kind = kind;

  bool needs_grad = false;
  if (grad_mode_enabled()) {
    for (const auto& p : parents) needs_grad = needs_grad || p->requires_grad;
  }
  if (needs_grad) {
    Tape& tape = Tape::current();
    for (const auto& p : parents) {
      if (p->requires_grad && p->kind != OpKind::kLeaf && p->tape_id != tape.id()) {
        throw std::logic_error(std::string(op_name(kind)) +
                               ": input belongs to a discarded tape");
      }
    }
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
    tape.record(node);
  }
  return Tensor(node);
}

const NodePtr& node_of(const Tensor& t, const char* op) {
  if (!t.defined()) throw std::logic_error(std::string(op) + ": undefined input");
  return t.node();
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeMismatch(std::string(op) + ": expected a matrix, got shape " +
                        shape_str(t.shape()));
  }
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeMismatch(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                      " and " + shape_str(b.shape()));
}

// Elementwise unary op; `deriv` receives (x, y) and returns dy/dx.
Tensor unary(OpKind kind, const Tensor& x, double (*fn)(double),
             double (*deriv)(double, double)) {
  const NodePtr& xn = node_of(x, op_name(kind));
  std::vector<double> out(xn->value.size());
  std::transform(xn->value.begin(), xn->value.end(), out.begin(), fn);
  return make_result(kind, xn->shape, std::move(out), {xn}, [deriv](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * deriv(in.value[i], self.value[i]);
    }
  });
}

// Rank-1 tensors act as a single row for softmax and as a column elsewhere.
std::pair<std::size_t, std::size_t> softmax_layout(const Tensor& t) {
  if (t.rank() == 1) return {1, t.dim(0)};
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  throw ShapeMismatch("softmax_rows: expected rank 1 or 2, got shape " + shape_str(t.shape()));
}

std::pair<std::size_t, std::size_t> column_layout(const Tensor& t, const char* op) {
  if (t.rank() == 1) return {t.dim(0), 1};
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  throw ShapeMismatch(std::string(op) + ": expected rank 1 or 2, got shape " +
                      shape_str(t.shape()));
}

Tensor softmax_impl(const Tensor& logits, const Tensor* mask) {
  const NodePtr& xn = node_of(logits, "softmax_rows");
  auto [rows, cols] = softmax_layout(logits);
  if (cols == 0) throw EmptyAxis("softmax_rows over an empty axis");
  if (mask) {
    if (mask->shape() != logits.shape()) mismatch("softmax_rows mask", logits, *mask);
    if (mask->requires_grad()) throw InvalidArgument("softmax_rows: mask must be a constant");
    for (double m : mask->data()) {
      if (m != 0.0 && m != kMaskedLogit) {
        throw InvalidArgument("softmax_rows: mask entries must be 0 or kMaskedLogit");
      }
    }
  }
  std::vector<double> out(xn->value.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * cols;
    double peak = -INFINITY;
    for (std::size_t c = 0; c < cols; ++c) {
      double z = xn->value[base + c] + (mask ? mask->data()[base + c] : 0.0);
      out[base + c] = z;
      peak = std::max(peak, z);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      out[base + c] = std::exp(out[base + c] - peak);
      total += out[base + c];
    }
    for (std::size_t c = 0; c < cols; ++c) out[base + c] /= total;
  }
  return make_result(OpKind::kSoftmax, xn->shape, std::move(out), {xn},
                     [rows, cols](Node& self) {
                       Node& in = *self.parents[0];
                       if (!in.requires_grad) return;
                       auto& g = in.ensure_grad();
                       for (std::size_t r = 0; r < rows; ++r) {
                         const std::size_t base = r * cols;
                         double dot = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) {
                           dot += self.grad[base + c] * self.value[base + c];
                         }
                         for (std::size_t c = 0; c < cols; ++c) {
                           g[base + c] += self.value[base + c] * (self.grad[base + c] - dot);
                         }
                       }
                     });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "matmul");
  const NodePtr& bn = node_of(b, "matmul");
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a, b);
  std::vector<double> out(m * n);
  as_matrix(out, m, n).noalias() = as_matrix(an->value, m, k) * as_matrix(bn->value, k, n);
  return make_result(OpKind::kMatMul, {m, n}, std::move(out), {an, bn},
                     [m, k, n](Node& self) {
                       Node& lhs = *self.parents[0];
                       Node& rhs = *self.parents[1];
                       auto dc = as_matrix(std::as_const(self.grad), m, n);
                       if (lhs.requires_grad) {
                         as_matrix(lhs.ensure_grad(), m, k).noalias() +=
                             dc * as_matrix(std::as_const(rhs.value), k, n).transpose();
                       }
                       if (rhs.requires_grad) {
                         as_matrix(rhs.ensure_grad(), k, n).noalias() +=
                             as_matrix(std::as_const(lhs.value), m, k).transpose() * dc;
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  const NodePtr& an = node_of(a, "transpose");
  require_rank2(a, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  as_matrix(out, n, m) = as_matrix(an->value, m, n).transpose();
  return make_result(OpKind::kTranspose, {n, m}, std::move(out), {an}, [m, n](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    as_matrix(in.ensure_grad(), m, n) += as_matrix(std::as_const(self.grad), n, m).transpose();
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "add");
  const NodePtr& bn = node_of(b, "add");
  if (a.shape() == b.shape()) {
    std::vector<double> out(an->value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->value[i] + bn->value[i];
    return make_result(OpKind::kAdd, an->shape, std::move(out), {an, bn}, [](Node& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        auto& g = p->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    });
  }
  // Bias broadcast over the trailing axis.
  const bool bias_ok = a.rank() == 2 &&
                       ((b.rank() == 1 && b.dim(0) == a.dim(0)) ||
                        (b.rank() == 2 && b.dim(0) == a.dim(0) && b.dim(1) == 1));
  if (!bias_ok) mismatch("add", a, b);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = an->value[i * n + j] + bn->value[i];
  }
  return make_result(OpKind::kAdd, an->shape, std::move(out), {an, bn}, [m, n](Node& self) {
    Node& lhs = *self.parents[0];
    Node& bias = *self.parents[1];
    if (lhs.requires_grad) {
      auto& g = lhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (bias.requires_grad) {
      auto& g = bias.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) g[i] += self.grad[i * n + j];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "sub");
  const NodePtr& bn = node_of(b, "sub");
  if (a.shape() != b.shape()) mismatch("sub", a, b);
  std::vector<double> out(an->value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->value[i] - bn->value[i];
  return make_result(OpKind::kSub, an->shape, std::move(out), {an, bn}, [](Node& self) {
    Node& lhs = *self.parents[0];
    Node& rhs = *self.parents[1];
    if (lhs.requires_grad) {
      auto& g = lhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (rhs.requires_grad) {
      auto& g = rhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "hadamard");
  const NodePtr& bn = node_of(b, "hadamard");
  if (a.shape() != b.shape()) mismatch("hadamard", a, b);
  std::vector<double> out(an->value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->value[i] * bn->value[i];
  return make_result(OpKind::kHadamard, an->shape, std::move(out), {an, bn}, [](Node& self) {
    Node& lhs = *self.parents[0];
    Node& rhs = *self.parents[1];
    if (lhs.requires_grad) {
      auto& g = lhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * rhs.value[i];
    }
    if (rhs.requires_grad) {
      auto& g = rhs.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * lhs.value[i];
    }
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw InvalidArgument("concat: no inputs");
  if (axis > 1) throw InvalidArgument("concat: axis must be 0 or 1");
  bool all_rank1 = true;
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  std::vector<NodePtr> parents;
  for (const Tensor& t : parts) {
    parents.push_back(node_of(t, "concat"));
    dims.push_back(column_layout(t, "concat"));
    all_rank1 = all_rank1 && t.rank() == 1;
  }
  if (axis == 1 && all_rank1) throw ShapeMismatch("concat: rank-1 inputs only stack on axis 0");

  std::size_t rows = 0, cols = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (axis == 0) {
      if (i && dims[i].second != cols) mismatch("concat", parts[0], parts[i]);
      cols = dims[i].second;
      rows += dims[i].first;
    } else {
      if (i && dims[i].first != rows) mismatch("concat", parts[0], parts[i]);
      rows = dims[i].first;
      cols += dims[i].second;
    }
  }

  std::vector<double> out(rows * cols);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto [r, c] = dims[i];
    const auto& v = parents[i]->value;
    if (axis == 0) {
      std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(offset * cols));
      offset += r;
    } else {
      for (std::size_t row = 0; row < r; ++row) {
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(row * c), c,
                    out.begin() + static_cast<std::ptrdiff_t>(row * cols + offset));
      }
      offset += c;
    }
  }
  Shape shape = (axis == 0 && all_rank1) ? Shape{rows} : Shape{rows, cols};
  return make_result(OpKind::kConcat, std::move(shape), std::move(out), std::move(parents),
                     [dims, axis, cols](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t i = 0; i < self.parents.size(); ++i) {
                         auto [r, c] = dims[i];
                         Node& p = *self.parents[i];
                         if (p.requires_grad) {
                           auto& g = p.ensure_grad();
                           for (std::size_t row = 0; row < r; ++row) {
                             for (std::size_t col = 0; col < c; ++col) {
                               const std::size_t src = axis == 0
                                                           ? (offset + row) * cols + col
                                                           : row * cols + offset + col;
                               g[row * c + col] += self.grad[src];
                             }
                           }
                         }
                         offset += axis == 0 ? r : c;
                       }
                     });
}

Tensor relu(const Tensor& x) {
  return unary(
      OpKind::kRelu, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      OpKind::kTanh, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      OpKind::kSigmoid, x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor abs(const Tensor& x) {
  return unary(
      OpKind::kAbs, x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor smooth_l1(const Tensor& x) {
  return unary(
      OpKind::kSmoothL1, x,
      [](double v) { return std::fabs(v) < 1.0 ? 0.5 * v * v : std::fabs(v) - 0.5; },
      [](double v, double) { return std::fabs(v) < 1.0 ? v : (v > 0.0 ? 1.0 : -1.0); });
}

Tensor log_floor(const Tensor& x, double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("log_floor: floor must be positive");
  const NodePtr& xn = node_of(x, "log_floor");
  std::vector<double> out(xn->value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(std::max(xn->value[i], floor));
  return make_result(OpKind::kLogFloor, xn->shape, std::move(out), {xn}, [floor](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in.value[i] > floor) g[i] += self.grad[i] / in.value[i];
    }
  });
}

Tensor softmax_rows(const Tensor& logits) { return softmax_impl(logits, nullptr); }

Tensor softmax_rows(const Tensor& logits, const Tensor& mask) {
  return softmax_impl(logits, mask.defined() ? &mask : nullptr);
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const NodePtr& xn = node_of(x, "sum");
  require_rank2(x, "sum");
  if (axis > 1) throw InvalidArgument("sum: axis must be 0 or 1");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (x.dim(axis) == 0) throw EmptyAxis("sum over an empty axis");
  std::vector<double> out(axis == 0 ? n : m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : i] += xn->value[i * n + j];
  }
  Shape shape = axis == 0 ? Shape{1, n} : Shape{m, 1};
  return make_result(OpKind::kSum, std::move(shape), std::move(out), {xn},
                     [m, n, axis](Node& self) {
                       Node& in = *self.parents[0];
                       if (!in.requires_grad) return;
                       auto& g = in.ensure_grad();
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t j = 0; j < n; ++j) {
                           g[i * n + j] += self.grad[axis == 0 ? j : i];
                         }
                       }
                     });
}

Tensor mean(const Tensor& x, std::size_t axis) {
  require_rank2(x, "mean");
  if (axis > 1) throw InvalidArgument("mean: axis must be 0 or 1");
  if (x.dim(axis) == 0) throw EmptyAxis("mean over an empty axis");
  return scale(sum(x, axis), 1.0 / static_cast<double>(x.dim(axis)));
}

Tensor sum_all(const Tensor& x) {
  const NodePtr& xn = node_of(x, "sum_all");
  if (xn->value.empty()) throw EmptyAxis("sum_all over an empty tensor");
  double total = 0.0;
  for (double v : xn->value) total += v;
  return make_result(OpKind::kSum, {1, 1}, {total}, {xn}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    for (double& g : in.ensure_grad()) g += self.grad[0];
  });
}

Tensor sq_frobenius(const Tensor& x) {
  const NodePtr& xn = node_of(x, "sq_frobenius");
  double total = 0.0;
  for (double v : xn->value) total += v * v;
  return make_result(OpKind::kSqFrobenius, {1, 1}, {total}, {xn}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * in.value[i] * self.grad[0];
  });
}

Tensor scale(const Tensor& x, double factor) {
  const NodePtr& xn = node_of(x, "scale");
  std::vector<double> out(xn->value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * xn->value[i];
  return make_result(OpKind::kScale, xn->shape, std::move(out), {xn}, [factor](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor embedding_rows(const Tensor& table, std::span<const int> indices) {
  const NodePtr& tn = node_of(table, "embedding_rows");
  require_rank2(table, "embedding_rows");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<int> idx(indices.begin(), indices.end());
  std::vector<double> out(idx.size() * width);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= vocab) {
      throw IndexOutOfRange("embedding_rows: index " + std::to_string(idx[r]) +
                            " outside table of " + std::to_string(vocab) + " rows");
    }
    std::copy_n(tn->value.begin() + static_cast<std::ptrdiff_t>(idx[r] * width), width,
                out.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  const std::size_t rows = idx.size();
  return make_result(OpKind::kEmbedding, {rows, width}, std::move(out), {tn},
                     [idx = std::move(idx), width](Node& self) {
                       Node& in = *self.parents[0];
                       if (!in.requires_grad) return;
                       auto& g = in.ensure_grad();
                       for (std::size_t r = 0; r < idx.size(); ++r) {
                         for (std::size_t c = 0; c < width; ++c) {
                           g[static_cast<std::size_t>(idx[r]) * width + c] +=
                               self.grad[r * width + c];
                         }
                       }
                     });
}

Tensor conv1d_same(const Tensor& seq, const Tensor& kernels, const Tensor& bias) {
  const NodePtr& sn = node_of(seq, "conv1d_same");
  const NodePtr& kn = node_of(kernels, "conv1d_same");
  const NodePtr& bn = node_of(bias, "conv1d_same");
  require_rank2(seq, "conv1d_same");
  if (kernels.rank() != 3) {
    throw ShapeMismatch("conv1d_same: kernels must be [d_out, d, k], got " +
                        shape_str(kernels.shape()));
  }
  const std::size_t d = seq.dim(0), steps = seq.dim(1);
  const std::size_t d_out = kernels.dim(0), width = kernels.dim(2);
  if (kernels.dim(1) != d) mismatch("conv1d_same", seq, kernels);
  if (bias.size() != d_out) mismatch("conv1d_same bias", kernels, bias);
  if (width % 2 == 0) {
    throw EvenKernel("conv1d_same: kernel width " + std::to_string(width) + " is even");
  }
  if (steps == 0) throw EmptyAxis("conv1d_same over an empty sequence");
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(width / 2);

  // Unfold the zero-padded windows so the convolution is one GEMM.
  auto cols = std::make_shared<std::vector<double>>(d * width * steps, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t row = c * width + j;
      for (std::size_t t = 0; t < steps; ++t) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - pad;
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(steps)) {
          (*cols)[row * steps + t] = sn->value[c * steps + static_cast<std::size_t>(src)];
        }
      }
    }
  }
  std::vector<double> out(d_out * steps);
  auto out_m = as_matrix(out, d_out, steps);
  out_m.noalias() = as_matrix(kn->value, d_out, d * width) * as_matrix(*cols, d * width, steps);
  for (std::size_t o = 0; o < d_out; ++o) out_m.row(static_cast<Eigen::Index>(o)).array() += bn->value[o];

  return make_result(
      OpKind::kConv1d, {d_out, steps}, std::move(out), {sn, kn, bn},
      [cols, d, d_out, width, steps, pad](Node& self) {
        Node& in = *self.parents[0];
        Node& ker = *self.parents[1];
        Node& b = *self.parents[2];
        auto dy = as_matrix(std::as_const(self.grad), d_out, steps);
        if (ker.requires_grad) {
          as_matrix(ker.ensure_grad(), d_out, d * width).noalias() +=
              dy * as_matrix(std::as_const(*cols), d * width, steps).transpose();
        }
        if (b.requires_grad) {
          auto& g = b.ensure_grad();
          for (std::size_t o = 0; o < d_out; ++o) g[o] += dy.row(static_cast<Eigen::Index>(o)).sum();
        }
        if (in.requires_grad) {
          RowMat dcols =
              as_matrix(std::as_const(ker.value), d_out, d * width).transpose() * dy;
          auto& g = in.ensure_grad();
          for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t j = 0; j < width; ++j) {
              const std::size_t row = c * width + j;
              for (std::size_t t = 0; t < steps; ++t) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) - pad;
                if (src >= 0 && src < static_cast<std::ptrdiff_t>(steps)) {
                  g[c * steps + static_cast<std::size_t>(src)] +=
                      dcols(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(t));
                }
              }
            }
          }
        }
      });
}

Tensor broadcast_cols(const Tensor& v, std::size_t n) {
  const NodePtr& vn = node_of(v, "broadcast_cols");
  const bool column = (v.rank() == 1) || (v.rank() == 2 && v.dim(1) == 1);
  if (!column) {
    throw ShapeMismatch("broadcast_cols: expected a column vector, got " + shape_str(v.shape()));
  }
  const std::size_t m = v.dim(0);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(i * n), n, vn->value[i]);
  }
  return make_result(OpKind::kBroadcastCols, {m, n}, std::move(out), {vn}, [m, n](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) g[i] += self.grad[i * n + j];
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  const NodePtr& xn = node_of(x, "slice_cols");
  require_rank2(x, "slice_cols");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (begin + count > n) {
    throw IndexOutOfRange("slice_cols: columns [" + std::to_string(begin) + ", " +
                          std::to_string(begin + count) + ") outside " + shape_str(x.shape()));
  }
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(xn->value.begin() + static_cast<std::ptrdiff_t>(i * n + begin), count,
                out.begin() + static_cast<std::ptrdiff_t>(i * count));
  }
  return make_result(OpKind::kSliceCols, {m, count}, std::move(out), {xn},
                     [m, n, begin, count](Node& self) {
                       Node& in = *self.parents[0];
                       if (!in.requires_grad) return;
                       auto& g = in.ensure_grad();
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t j = 0; j < count; ++j) {
                           g[i * n + begin + j] += self.grad[i * count + j];
                         }
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  const NodePtr& xn = node_of(x, "reshape");
  if (shape_size(shape) != xn->value.size()) {
    throw ShapeMismatch("reshape: cannot view " + shape_str(x.shape()) + " as " +
                        shape_str(shape));
  }
  return make_result(OpKind::kReshape, std::move(shape), xn->value, {xn}, [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

}  // namespace lgi::ops
