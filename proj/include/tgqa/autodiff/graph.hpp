#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tgqa/autodiff/tensor.hpp"
#include "tgqa/rng.hpp"

namespace tgqa::ad {

template <typename T>
class Graph;

/// Handle to a value recorded on a Graph.
template <typename T>
struct Var {
  Graph<T>* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor<T>& value() const;
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
};

/// Tape of operations. Nodes are appended in topological order, so backward
/// is a single reverse sweep. Parameter leaves read external storage without
/// copying; their gradients accumulate in buffers owned by the graph.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int)>;

  explicit Graph(bool train_mode = false, uint64_t seed = 0) : train_(train_mode), rng_(seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value);
  /// Owned leaf whose gradient is tracked.
  Var<T> input(Tensor<T> value);
  /// Leaf aliasing `storage`, which must outlive the graph. With a `sink`,
  /// backward accumulates this leaf's gradient into it directly.
  Var<T> parameter(const Tensor<T>& storage, Tensor<T>* sink = nullptr);

  /// Records an op result. `backward` receives the graph and the node id.
  Var<T> record(Tensor<T> value, std::vector<int> inputs, BackwardFn backward);

  const Tensor<T>& value(int id) const { return *nodes_.at(id)->value; }
  const Tensor<T>& value(Var<T> v) const;
  bool requires_grad(int id) const { return nodes_.at(id)->requires_grad; }
  const std::vector<int>& inputs(int id) const { return nodes_.at(id)->inputs; }

  /// Gradient buffer for `id`, allocated as zeros on first use.
  Tensor<T>& grad_mut(int id);
  /// Gradient of the last backward pass; zeros if nothing reached `v`.
  Tensor<T> grad(Var<T> v) const;
  bool has_grad(int id) const { return nodes_.at(id)->grad != nullptr; }
  bool is_parameter(int id) const { return nodes_.at(id)->is_parameter; }

  /// Reverse sweep from a scalar loss. A second call requires reset_grads().
  void backward(Var<T> loss);
  void reset_grads();

  /// Parameter leaves in creation order with their storage.
  std::vector<std::pair<const Tensor<T>*, int>> parameter_leaves() const;

  int size() const { return static_cast<int>(nodes_.size()); }
  bool train_mode() const { return train_; }
  /// When disabled, leaves are created without gradient tracking and ops
  /// record no backward rules.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }
  SplitMix64& rng() { return rng_; }

  void check_owned(Var<T> v) const;

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* value = nullptr;
    std::unique_ptr<Tensor<T>> grad_owned;
    Tensor<T>* grad = nullptr;
    Tensor<T>* sink = nullptr;
    std::vector<int> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_parameter = false;
  };

  std::vector<std::unique_ptr<Node>> nodes_;
  bool train_;
  bool backward_done_ = false;
  bool grad_enabled_ = true;
  SplitMix64 rng_;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return graph->value(*this);
}

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace tgqa::ad
