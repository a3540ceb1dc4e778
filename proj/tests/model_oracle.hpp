#pragma once

// Plain-loop reference computations for the model tests. Nothing here uses
// the autodiff ops, so agreement is evidence for both sides.

#include <cmath>
#include <vector>

#include "tgqa/autodiff/gradcheck.hpp"
#include "tgqa/core/table.hpp"
#include "tgqa/graph/builder.hpp"
#include "tgqa/model/model.hpp"
#include "tgqa/synthetic.hpp"
#include "tgqa/text/normalize.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

template <typename T>
Mat to_mat(const tgqa::ad::Tensor<T>& t) {
  Mat m(t.rows(), std::vector<double>(t.cols()));
  for (int i = 0; i < t.rows(); ++i) {
    for (int j = 0; j < t.cols(); ++j) m[i][j] = static_cast<double>(t(i, j));
  }
  return m;
}

inline Mat mm(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

inline void add_bias(Mat& a, const Mat& b) {
  for (auto& row : a) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[0][j];
  }
}

inline Mat layer_norm(const Mat& x, const Mat& g, const Mat& b) {
  Mat y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x[i].size());
    double mu = 0, var = 0;
    for (double v : x[i]) mu += v / n;
    for (double v : x[i]) var += (v - mu) * (v - mu) / n;
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      y[i][j] = (x[i][j] - mu) / std::sqrt(var + 1e-6) * g[0][j] + b[0][j];
    }
  }
  return y;
}

/// Standard post-LN Transformer encoder (scaled dot-product attention, no
/// edge terms) evaluated from the parameter tensors.
template <typename T>
Mat vanilla_encoder(const tgqa::model::ModelParameters<T>& p, Mat x) {
  const int heads = p.config.heads;
  const int dh = p.config.d_head();
  const int n = static_cast<int>(x.size());
  for (const auto& L : p.layers) {
    const Mat q = mm(x, to_mat(p.tensors[L.wq]));
    const Mat k = mm(x, to_mat(p.tensors[L.wk]));
    const Mat v = mm(x, to_mat(p.tensors[L.wv]));
    Mat z(n, std::vector<double>(p.config.d_model, 0.0));
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < n; ++i) {
        std::vector<double> s(n);
        double mx = -1e300;
        for (int j = 0; j < n; ++j) {
          double dot = 0;
          for (int c = 0; c < dh; ++c) dot += q[i][h * dh + c] * k[j][h * dh + c];
          s[j] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, s[j]);
        }
        double total = 0;
        for (double& e : s) total += (e = std::exp(e - mx));
        for (int j = 0; j < n; ++j) {
          for (int c = 0; c < dh; ++c) z[i][h * dh + c] += s[j] / total * v[j][h * dh + c];
        }
      }
    }
    Mat o = mm(z, to_mat(p.tensors[L.wo]));
    add_bias(o, to_mat(p.tensors[L.bo]));
    for (int i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < o[i].size(); ++j) o[i][j] += x[i][j];
    }
    const Mat x1 = layer_norm(o, to_mat(p.tensors[L.ln1_g]), to_mat(p.tensors[L.ln1_b]));
    Mat hid = mm(x1, to_mat(p.tensors[L.ff1_w]));
    add_bias(hid, to_mat(p.tensors[L.ff1_b]));
    for (auto& row : hid) {
      for (double& e : row) e = std::max(e, 0.0);
    }
    Mat f = mm(hid, to_mat(p.tensors[L.ff2_w]));
    add_bias(f, to_mat(p.tensors[L.ff2_b]));
    for (int i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f[i].size(); ++j) f[i][j] += x1[i][j];
    }
    x = layer_norm(f, to_mat(p.tensors[L.ln2_g]), to_mat(p.tensors[L.ln2_b]));
  }
  return x;
}

inline tgqa::model::ModelConfig tiny_config(int layers = 1, int d = 8, int heads = 2) {
  tgqa::model::ModelConfig c;
  c.num_layers = layers;
  c.d_model = d;
  c.heads = heads;
  c.indicator_dim = 2;
  c.dropout = 0.0;
  c.max_columns = 4;
  c.max_rows = 4;
  c.max_rank = 4;
  return c;
}

/// A small graph with every node kind, numeric edges and context flags.
inline tgqa::graph::AnnotatedGraph small_graph(const tgqa::model::ModelConfig& cfg) {
  tgqa::Table t("small", {"Name", "Score"}, {{"ann", "3"}, {"bob", "7"}});
  tgqa::text::annotate_column_types(t);
  static const tgqa::text::Vocabulary vocab;
  return tgqa::graph::build_graph(t, vocab, "score above 5", std::vector<tgqa::CellCoord>{{1, 0}},
                                  cfg.graph_options());
}

/// Relative-error gradient check of embed + encode + pointer loss with
/// respect to every parameter tensor except the word table, whose backward
/// is the same embedding-bag rule exercised on the smaller tables.
inline tgqa::ad::GradCheckResult check_composition(const tgqa::model::ModelConfig& cfg,
                                                   uint64_t seed, bool train_mode) {
  using namespace tgqa;
  auto params = model::ModelParameters<double>::init(cfg, seed);
  const auto g = small_graph(cfg);
  const AnswerSelection target{{1}, {1}};
  const int word = params.family[static_cast<int>(graph::FeatureFamily::Word)];
  std::vector<int> checked;
  std::vector<ad::Tensor<double>> inputs;
  for (int i = 0; i < static_cast<int>(params.tensors.size()); ++i) {
    if (i == word) continue;
    checked.push_back(i);
    inputs.push_back(params.tensors[i]);
  }
  const ad::Program f = [&](ad::Graph<double>& tape, const std::vector<ad::Var<double>>& v) {
    model::ParamBinder<double> b(tape, params);
    for (std::size_t k = 0; k < checked.size(); ++k) b.set(checked[k], v[k]);
    return model::example_loss(b, g, target);
  };
  return ad::check_gradients(f, inputs, 1e-5, train_mode, seed + 1);
}

}  // namespace oracle
