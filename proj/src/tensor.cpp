// SPDX-License-Identifier: Apache-2.0
#include "lgi/tensor.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "lgi/errors.hpp"
#include "node.hpp"

namespace lgi {
namespace {

std::atomic<std::uint64_t> next_tape_id{1};
thread_local bool grad_enabled = true;

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kHadamard: return "hadamard";
    case OpKind::kConcat: return "concat";
    case OpKind::kRelu: return "relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kAbs: return "abs";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kScale: return "scale";
    case OpKind::kEmbedding: return "embedding";
    case OpKind::kSqFrobenius: return "sq_frobenius";
    case OpKind::kConv1d: return "conv1d_same";
    case OpKind::kBroadcastCols: return "broadcast_cols";
    case OpKind::kSliceCols: return "slice_cols";
    case OpKind::kReshape: return "reshape";
    case OpKind::kSmoothL1: return "smooth_l1";
    case OpKind::kLogFloor: return "log_floor";
  }
  return "unknown";
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_size(shape) != data.size()) {
    throw ShapeMismatch("tensor of shape " + shape_str(shape) + " given " +
                        std::to_string(data.size()) + " values");
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(shape_size(shape), value);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, {value}); }

detail::Node& Tensor::ref() const {
  if (!node_) throw std::logic_error("use of an undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return ref().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw ShapeMismatch("axis " + std::to_string(axis) + " out of range for shape " +
                        shape_str(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const { return ref().value.size(); }

std::span<const double> Tensor::data() const { return ref().value; }

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeMismatch("item() on tensor of shape " + shape_str(shape()));
  }
  return ref().value[0];
}

double Tensor::at(std::size_t i) const { return ref().value.at(i); }

double Tensor::at(std::size_t row, std::size_t col) const {
  const Shape& s = shape();
  if (s.size() != 2 || row >= s[0] || col >= s[1]) {
    throw IndexOutOfRange("at(" + std::to_string(row) + ", " + std::to_string(col) +
                          ") on shape " + shape_str(s));
  }
  return ref().value[row * s[1] + col];
}

bool Tensor::requires_grad() const { return ref().requires_grad; }
bool Tensor::is_leaf() const { return ref().kind == OpKind::kLeaf; }
OpKind Tensor::kind() const { return ref().kind; }
std::uint64_t Tensor::tape_id() const { return ref().tape_id; }
bool Tensor::has_grad() const { return !ref().grad.empty(); }
std::span<const double> Tensor::grad() const { return ref().grad; }
void Tensor::zero_grad() { ref().grad.clear(); }

std::span<double> Tensor::mutable_data() {
  if (!is_leaf()) throw std::logic_error("mutable_data() on a non-leaf tensor");
  return ref().value;
}

std::span<double> Tensor::mutable_grad() {
  if (!is_leaf()) throw std::logic_error("mutable_grad() on a non-leaf tensor");
  return ref().ensure_grad();
}

Tensor Tensor::clone() const {
  return Tensor(shape(), ref().value, ref().requires_grad);
}

Tensor Tensor::detach() const { return Tensor(shape(), ref().value, false); }

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(const std::shared_ptr<detail::Node>& node) {
  node->tape_id = id_;
  nodes_.push_back(node);
}

void Tape::clear() {
  nodes_.clear();
  id_ = next_tape_id.fetch_add(1);
}

bool Tape::is_topologically_ordered() const {
  std::unordered_set<const detail::Node*> seen;
  for (const auto& node : nodes_) {
    for (const auto& parent : node->parents) {
      if (parent->kind != OpKind::kLeaf && !seen.contains(parent.get())) return false;
    }
    seen.insert(node.get());
  }
  return true;
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

bool grad_mode_enabled() { return grad_enabled; }

void backward(const Tensor& loss) {
  if (!loss.defined()) throw std::logic_error("backward() on an undefined tensor");
  if (loss.size() != 1) {
    throw NonScalarLoss("backward() needs a scalar loss, got shape " +
                        shape_str(loss.shape()));
  }
  Tape& tape = Tape::current();
  detail::Node& root = *loss.node();
  if (!root.requires_grad) {
    tape.clear();
    return;
  }
  root.ensure_grad()[0] += 1.0;
  if (root.kind != OpKind::kLeaf) {
    if (root.tape_id != tape.id()) {
      throw std::logic_error("loss was not recorded on the current tape");
    }
    auto nodes = tape.nodes();
    for (std::size_t i = nodes.size(); i-- > 0;) {
      detail::Node& node = *nodes[i];
      if (!node.grad.empty() && node.backward) node.backward(node);
    }
  }
  tape.clear();
}

}  // namespace lgi
