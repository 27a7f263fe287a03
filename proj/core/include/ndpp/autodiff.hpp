#ifndef NDPP_AUTODIFF_HPP
#define NDPP_AUTODIFF_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "ndpp/tensor.hpp"

namespace ndpp {

/// Maps the gradient of a node's output to the gradients of its parents, in
/// parent order. An empty Tensor means "no contribution".
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

class Gradients;
class Var;
Gradients backprop(const Var& root);

struct Node {
  Tensor value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
};

/// Handle to a node of the recorded computation graph. Copies share the node.
/// Values are never mutated after construction; optimizers replace a
/// parameter by rebinding it to a fresh leaf.
class Var {
 public:
  Var() = default;

  static Var leaf(Tensor value, bool requires_grad = true);
  static Var constant(Tensor value) { return leaf(std::move(value), false); }

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  const Node* node() const noexcept { return node_.get(); }

  /// Same value, cut from the graph.
  Var detached() const { return constant(value()); }

 private:
  friend Var make_op(Tensor value, std::vector<Var> parents, BackwardFn backward);
  friend class Gradients;
  friend Gradients backprop(const Var& root);

  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

/// Records a new node. When no parent requires a gradient the node is stored
/// as a constant and the backward rule is dropped.
Var make_op(Tensor value, std::vector<Var> parents, BackwardFn backward);

class Gradients {
 public:
  /// Gradient of the root with respect to `leaf`; zeros of the leaf's shape
  /// when the leaf was not reachable from the root.
  Tensor of(const Var& leaf) const;
  bool contains(const Var& leaf) const;
  std::size_t size() const { return grads_.size(); }

 private:
  friend Gradients backprop(const Var& root);
  std::unordered_map<const Node*, Tensor> grads_;
};

/// Reverse-mode sweep from a single-element root.
Gradients backprop(const Var& root);

// ---- differentiable operations ------------------------------------------

Var matmul(const Var& a, const Var& b);
Var matmul_tn(const Var& a, const Var& b);  // a^T * b
Var transpose(const Var& a);

// Element-wise; `b` may be a single element.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double value);
Var relu(const Var& a);
Var sqrt(const Var& a);
Var clamp_min(const Var& a, double floor);
Var square(const Var& a);

// Reductions to a single element.
Var sum(const Var& a);
Var mean(const Var& a);
Var variance(const Var& a);
Var l1mean(const Var& a);

// Row/column reductions on rank-2 inputs.
Var row_mean(const Var& a);    // N x d -> N x 1
Var row_l1mean(const Var& a);  // N x d -> N x 1
Var col_mean(const Var& a);    // N x d -> 1 x d

/// Binary op with a vector broadcast along one axis of a rank-2 `a`:
/// `v` is either N x 1 (one value per row) or 1 x d (one value per column).
enum class BroadcastOp { add, sub, mul, div };
Var broadcast(const Var& a, const Var& v, BroadcastOp op);

// Structural.
Var reshape(const Var& a, Shape shape);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var hstack(std::span<const Var> parts);
Var vstack(std::span<const Var> parts);

/// out[i] = a[index[i]] or 0 where index[i] < 0. The backward pass
/// scatter-adds, so duplicated indices are fine.
Var gather(const Var& a, Shape out_shape, std::shared_ptr<const std::vector<std::ptrdiff_t>> index);

// Matrix helpers.
Var trace(const Var& a);
Var symmetrize(const Var& a);
Var add_scaled_identity(const Var& a, const Var& coefficient);  // a + c*I, c single-element

// Losses.
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);
Var half_mse(const Var& prediction, const Tensor& target);  // (1/2N) ||p - t||^2, N = rows

}  // namespace ndpp

#endif  // NDPP_AUTODIFF_HPP
