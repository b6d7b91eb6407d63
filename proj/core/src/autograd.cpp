#include "hatsr/autograd.hpp"

#include "hatsr/error.hpp"

namespace hatsr::ag {

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  return Var<T>(this, std::move(node));
}

template <typename T>
Var<T> Graph<T>::variable(Tensor<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = record_;
  if (record_) tape_.push_back(node);
  return Var<T>(this, std::move(node));
}

template <typename T>
Var<T> Graph<T>::make(Tensor<T> value, std::vector<Var<T>> parents, std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  bool needs = false;
  if (record_) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (const auto& p : parents) node->parents.push_back(p.shared());
    node->backward = std::move(backward);
    tape_.push_back(node);
  }
  return Var<T>(this, std::move(node));
}

template <typename T>
void Graph<T>::backward(const Var<T>& scalar_output) {
  if (scalar_output.value().size() != 1) throw InputError("backward() needs a scalar output");
  if (!scalar_output.requires_grad()) return;
  scalar_output.node()->grad_buffer()[0] += T{1};
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
    Node<T>& n = **it;
    if (n.backward && n.grad.size() == n.value.size()) n.backward(n);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace hatsr::ag
