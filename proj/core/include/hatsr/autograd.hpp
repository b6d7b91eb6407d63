#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hatsr/tensor.hpp"

namespace hatsr::ag {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  /// Gradient buffer, zero-initialized on first use.
  Tensor<T>& grad_buffer() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Graph;

/// Handle to a value in a Graph. Cheap to copy.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Graph<T>* graph, std::shared_ptr<Node<T>> node) : graph_(graph), node_(std::move(node)) {}

  const Tensor<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::int64_t dim(std::size_t axis) const { return node_->value.dim(axis); }
  bool requires_grad() const { return node_->requires_grad; }
  /// Accumulated gradient after Graph::backward; empty if none reached this value.
  const Tensor<T>& grad() const { return node_->grad; }

  Graph<T>& graph() const { return *graph_; }
  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  Graph<T>* graph_ = nullptr;
  std::shared_ptr<Node<T>> node_;
};

/// Reverse-mode tape. With recording disabled, no backward closures or parent
/// links are kept, so intermediates are released as soon as their Vars die.
template <typename T>
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }

  Var<T> constant(Tensor<T> value);
  /// Leaf that receives a gradient (only when recording).
  Var<T> variable(Tensor<T> value);

  /// Result of an operation. `backward` reads node.grad and accumulates into
  /// the parents' grad buffers; it is dropped when no parent needs a gradient.
  Var<T> make(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward);

  /// Seeds d(out)/d(out) = 1 for a scalar output and propagates through the tape.
  void backward(const Var<T>& scalar_output);

  std::size_t tape_size() const { return tape_.size(); }

 private:
  bool record_;
  std::vector<std::shared_ptr<Node<T>>> tape_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace hatsr::ag
