// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lgi {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// Additive mask entry that stands in for -inf in masked softmax. exp() of it
// underflows to exactly zero after max-subtraction.
inline constexpr double kMaskedLogit = -1e30;

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kHadamard,
  kConcat,
  kRelu,
  kTanh,
  kSigmoid,
  kAbs,
  kSoftmax,
  kSum,
  kMean,
  kScale,
  kEmbedding,
  kSqFrobenius,
  kConv1d,
  kBroadcastCols,
  kSliceCols,
  kReshape,
  kSmoothL1,
  kLogFloor,
};

const char* op_name(OpKind kind);

namespace detail {
struct Node;
}  // namespace detail

// Handle to a node of the computation graph. Copies share the node, so a
// Tensor behaves like an immutable value except for parameter leaves, whose
// storage the optimizer updates in place through mutable_data().
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  // 1x1 constant.
  static Tensor scalar(double value);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool is_leaf() const;
  OpKind kind() const;
  // Identity of the tape that recorded this node; 0 for leaves.
  std::uint64_t tape_id() const;

  bool has_grad() const;
  // Empty span when no gradient has been accumulated.
  std::span<const double> grad() const;
  void zero_grad();

  // Parameter-leaf access. Throws std::logic_error on non-leaf tensors.
  std::span<double> mutable_data();
  std::span<double> mutable_grad();

  // Deep copy as a fresh leaf with the same requires_grad flag.
  Tensor clone() const;
  // Deep copy that never requires grad.
  Tensor detach() const;

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const noexcept { return node_; }

 private:
  detail::Node& ref() const;
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of the operations of one forward pass. Nodes are appended
// as they are created, so every node's parents precede it. Each thread has
// its own current tape; backward() consumes and clears it.
class Tape {
 public:
  static Tape& current();

  std::uint64_t id() const noexcept { return id_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const std::shared_ptr<detail::Node>> nodes() const { return nodes_; }

  void record(const std::shared_ptr<detail::Node>& node);
  // Drops every recorded node and starts a new tape identity.
  void clear();
  bool is_topologically_ordered() const;

 private:
  Tape();
  std::uint64_t id_;
  std::vector<std::shared_ptr<detail::Node>> nodes_;
};

// Disables recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// Reverse pass from a scalar loss over the current tape. Gradients accumulate
// additively into every requires_grad tensor reachable from the loss, then
// the tape is discarded.
void backward(const Tensor& loss);

}  // namespace lgi
