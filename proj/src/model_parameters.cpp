#include "tgqa/model/parameters.hpp"

#include <cmath>

#include "tgqa/error.hpp"
#include "tgqa/rng.hpp"

namespace tgqa::model {

namespace {

enum class Init { Glorot, Zero, One, Embedding };

struct Spec {
  std::string name;
  int rows, cols;
  Init init;
};

// The layout defines tensor order; checkpoints and sinks rely on it.
template <typename T>
std::vector<Spec> layout(ModelParameters<T>& p, const ModelConfig& c) {
  std::vector<Spec> specs;
  auto add = [&](std::string name, int rows, int cols, Init init) {
    specs.push_back({std::move(name), rows, cols, init});
    return static_cast<int>(specs.size()) - 1;
  };
  const int d = c.d_model;
  for (int f = 0; f < graph::kNumFeatureFamilies; ++f) {
    const auto fam = static_cast<graph::FeatureFamily>(f);
    std::string name = std::string("embed.") + graph::to_string(fam);
    for (char& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    p.family[f] = add(name, family_capacity(fam, c), c.feature_dim(), Init::Embedding);
  }
  p.indicator = add("embed.indicator", 2, c.indicator_dim, Init::Embedding);
  p.layers.clear();
  for (int l = 0; l < c.num_layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    LayerParams L{};
    L.wq = add(pre + "wq", d, d, Init::Glorot);
    L.wk = add(pre + "wk", d, d, Init::Glorot);
    L.wv = add(pre + "wv", d, d, Init::Glorot);
    L.wo = add(pre + "wo", d, d, Init::Glorot);
    L.bo = add(pre + "bo", 1, d, Init::Zero);
    L.ln1_g = add(pre + "ln1_g", 1, d, Init::One);
    L.ln1_b = add(pre + "ln1_b", 1, d, Init::Zero);
    L.ff1_w = add(pre + "ff1_w", d, c.d_ff(), Init::Glorot);
    L.ff1_b = add(pre + "ff1_b", 1, c.d_ff(), Init::Zero);
    L.ff2_w = add(pre + "ff2_w", c.d_ff(), d, Init::Glorot);
    L.ff2_b = add(pre + "ff2_b", 1, d, Init::Zero);
    L.ln2_g = add(pre + "ln2_g", 1, d, Init::One);
    L.ln2_b = add(pre + "ln2_b", 1, d, Init::Zero);
    L.rel_k = add(pre + "rel_k", graph::kNumEdgeLabels, c.d_head(), Init::Embedding);
    L.rel_v = add(pre + "rel_v", graph::kNumEdgeLabels, c.d_head(), Init::Embedding);
    p.layers.push_back(L);
  }
  DecoderParams& D = p.decoder;
  D.wz = add("decoder.wz", 2 * d, d, Init::Glorot);
  D.bz = add("decoder.bz", 1, d, Init::Zero);
  D.wc = add("decoder.wc", 2 * d, d, Init::Glorot);
  D.bc = add("decoder.bc", 1, d, Init::Zero);
  D.ln_g = add("decoder.ln_g", 1, d, Init::One);
  D.ln_b = add("decoder.ln_b", 1, d, Init::Zero);
  D.special = add("decoder.special", 2, d, Init::Embedding);
  D.ptr_w = add("decoder.ptr_w", d, d, Init::Glorot);
  D.ptr_b = add("decoder.ptr_b", 1, d, Init::Zero);
  return specs;
}

template <typename T>
ModelParameters<T> build(const ModelConfig& config, const uint64_t* seed) {
  config.validate();
  ModelParameters<T> p;
  p.config = config;
  const auto specs = layout(p, config);
  SplitMix64 rng(seed ? *seed : 0);
  const double emb_std = 1.0 / std::sqrt(static_cast<double>(config.d_model));
  for (const auto& s : specs) {
    ad::Tensor<T> t(s.rows, s.cols);
    if (seed != nullptr) {
      const double limit = std::sqrt(6.0 / (s.rows + s.cols));
      for (T& v : t.data) {
        switch (s.init) {
          case Init::Glorot: v = static_cast<T>(rng.uniform(-limit, limit)); break;
          case Init::Zero: v = T(0); break;
          case Init::One: v = T(1); break;
          case Init::Embedding: v = static_cast<T>(rng.normal(0.0, emb_std)); break;
        }
      }
    }
    p.names.push_back(s.name);
    p.tensors.push_back(std::move(t));
  }
  return p;
}

}  // namespace

template <typename T>
ModelParameters<T> ModelParameters<T>::init(const ModelConfig& config, uint64_t seed) {
  return build<T>(config, &seed);
}

template <typename T>
ModelParameters<T> ModelParameters<T>::zeros(const ModelConfig& config) {
  return build<T>(config, nullptr);
}

template <typename T>
int ModelParameters<T>::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

template <typename T>
std::size_t ModelParameters<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template struct ModelParameters<float>;
template struct ModelParameters<double>;

}  // namespace tgqa::model
