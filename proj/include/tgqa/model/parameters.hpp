#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tgqa/autodiff/graph.hpp"
#include "tgqa/model/config.hpp"

namespace tgqa::model {

struct LayerParams {
  int wq, wk, wv, wo, bo;
  int ln1_g, ln1_b;
  int ff1_w, ff1_b, ff2_w, ff2_b;
  int ln2_g, ln2_b;
  int rel_k, rel_v;  // [kNumEdgeLabels, d_head], shared across heads
};

struct DecoderParams {
  int wz, bz, wc, bc;  // gate and candidate, input [x, h] of width 2d
  int ln_g, ln_b;
  int special;         // [2, d]: row 0 SEP, row 1 EOS
  int ptr_w, ptr_b;    // pointer projection applied to candidates
};

inline constexpr int kSpecialSep = 0;
inline constexpr int kSpecialEos = 1;

/// Every trainable tensor, in a fixed order with a unique name. The index
/// fields refer into `tensors`.
template <typename T>
struct ModelParameters {
  ModelConfig config;
  std::vector<std::string> names;
  std::vector<ad::Tensor<T>> tensors;

  std::array<int, graph::kNumFeatureFamilies> family{};
  int indicator = -1;  // [2, indicator_dim]
  std::vector<LayerParams> layers;
  DecoderParams decoder{};

  /// Glorot-uniform matrices, zero biases, unit layer-norm gains and
  /// normal(0, d^-1/2) embedding tables.
  static ModelParameters init(const ModelConfig& config, uint64_t seed);
  /// Same layout with zeroed tensors.
  static ModelParameters zeros(const ModelConfig& config);

  int find(const std::string& name) const;  // -1 when absent
  std::size_t num_scalars() const;

  template <typename U>
  ModelParameters<U> cast() const {
    ModelParameters<U> out;
    out.config = config;
    out.names = names;
    out.family = family;
    out.indicator = indicator;
    out.layers = layers;
    out.decoder = decoder;
    for (const auto& t : tensors) {
      ad::Tensor<U> u(t.shape);
      for (std::size_t i = 0; i < t.size(); ++i) u.data[i] = static_cast<U>(t.data[i]);
      out.tensors.push_back(std::move(u));
    }
    return out;
  }
};

extern template struct ModelParameters<float>;
extern template struct ModelParameters<double>;

/// Lazily binds parameters to a graph so only the tensors a program touches
/// become leaves. With sinks, gradients accumulate into sinks[i].
template <typename T>
class ParamBinder {
 public:
  ParamBinder(ad::Graph<T>& graph, const ModelParameters<T>& params,
              std::vector<ad::Tensor<T>>* sinks = nullptr)
      : graph_(graph), params_(params), sinks_(sinks), vars_(params.tensors.size()) {}

  ad::Var<T> operator()(int index) {
    auto& v = vars_.at(index);
    if (!v.valid()) {
      v = graph_.parameter(params_.tensors[index], sinks_ ? &(*sinks_)[index] : nullptr);
    }
    return v;
  }
  ad::Graph<T>& graph() { return graph_; }
  const ModelParameters<T>& params() const { return params_; }
  const ModelConfig& config() const { return params_.config; }
  /// Uses `v` in place of tensor `index` (e.g. a gradient-check input).
  void set(int index, ad::Var<T> v) { vars_.at(index) = v; }
  /// Leaf for tensor `index` if it was bound.
  ad::Var<T> bound(int index) const { return vars_.at(index); }

 private:
  ad::Graph<T>& graph_;
  const ModelParameters<T>& params_;
  std::vector<ad::Tensor<T>>* sinks_;
  std::vector<ad::Var<T>> vars_;
};

}  // namespace tgqa::model
