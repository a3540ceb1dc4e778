#include "tgqa/autodiff/graph.hpp"

#include "tgqa/error.hpp"

namespace tgqa::ad {

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  auto n = std::make_unique<Node>();
  n->owned = std::move(value);
  n->value = &n->owned;
  nodes_.push_back(std::move(n));
  return {this, size() - 1};
}

template <typename T>
Var<T> Graph<T>::input(Tensor<T> value) {
  Var<T> v = constant(std::move(value));
  nodes_.back()->requires_grad = grad_enabled_;
  return v;
}

template <typename T>
Var<T> Graph<T>::parameter(const Tensor<T>& storage, Tensor<T>* sink) {
  if (sink != nullptr && !sink->same_shape(storage)) {
    throw ShapeError("gradient sink " + sink->shape_string() + " does not match parameter " +
                     storage.shape_string());
  }
  auto n = std::make_unique<Node>();
  n->value = &storage;
  n->sink = sink;
  n->requires_grad = grad_enabled_;
  n->is_parameter = true;
  nodes_.push_back(std::move(n));
  return {this, size() - 1};
}

template <typename T>
Var<T> Graph<T>::record(Tensor<T> value, std::vector<int> inputs, BackwardFn backward) {
  auto n = std::make_unique<Node>();
  n->owned = std::move(value);
  n->value = &n->owned;
  for (int in : inputs) {
    if (in < 0 || in >= size()) throw Error("op input is not a node of this graph");
    n->requires_grad = n->requires_grad || nodes_[in]->requires_grad;
  }
  n->inputs = std::move(inputs);
  if (n->requires_grad) n->backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, size() - 1};
}

template <typename T>
void Graph<T>::check_owned(Var<T> v) const {
  if (v.graph == nullptr) throw Error("variable is detached from any graph");
  if (v.graph != this || v.id < 0 || v.id >= size()) {
    throw Error("variable belongs to a different graph");
  }
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var<T> v) const {
  check_owned(v);
  return *nodes_[v.id]->value;
}

template <typename T>
Tensor<T>& Graph<T>::grad_mut(int id) {
  Node& n = *nodes_.at(id);
  if (n.grad == nullptr) {
    if (n.sink != nullptr) {
      n.grad = n.sink;
    } else {
      n.grad_owned = std::make_unique<Tensor<T>>(n.value->shape);
      n.grad = n.grad_owned.get();
    }
  }
  return *n.grad;
}

template <typename T>
Tensor<T> Graph<T>::grad(Var<T> v) const {
  check_owned(v);
  const Node& n = *nodes_[v.id];
  if (n.grad != nullptr) return *n.grad;
  return Tensor<T>(n.value->shape);
}

template <typename T>
void Graph<T>::backward(Var<T> loss) {
  check_owned(loss);
  if (backward_done_) throw Error("backward already ran on this graph; call reset_grads first");
  if (value(loss).size() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + value(loss).shape_string());
  }
  backward_done_ = true;
  if (!nodes_[loss.id]->requires_grad) return;
  grad_mut(loss.id).data[0] += T(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = *nodes_[id];
    if (n.grad != nullptr && n.backward) n.backward(*this, id);
  }
}

template <typename T>
void Graph<T>::reset_grads() {
  for (auto& n : nodes_) {
    n->grad_owned.reset();
    n->grad = nullptr;
  }
  backward_done_ = false;
}

template <typename T>
std::vector<std::pair<const Tensor<T>*, int>> Graph<T>::parameter_leaves() const {
  std::vector<std::pair<const Tensor<T>*, int>> out;
  for (int i = 0; i < size(); ++i) {
    if (nodes_[i]->is_parameter) out.emplace_back(nodes_[i]->value, i);
  }
  return out;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace tgqa::ad
