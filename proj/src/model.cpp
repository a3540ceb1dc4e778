#include "tgqa/model/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tgqa/error.hpp"

namespace tgqa::model {

using ad::Var;
using graph::AnnotatedGraph;
using graph::NodeKind;

template <typename T>
Var<T> embed_nodes(ParamBinder<T>& p, const AnnotatedGraph& g) {
  const ModelConfig& cfg = p.config();
  const int n = g.size();
  if (n == 0) throw InvalidExampleError("graph has no nodes");
  std::array<std::vector<std::vector<int>>, graph::kNumFeatureFamilies> bags;
  std::array<bool, graph::kNumFeatureFamilies> used{};
  for (auto& b : bags) b.assign(n, {});
  std::vector<T> inv_count(n);
  std::vector<int> indicator(n);
  for (int i = 0; i < n; ++i) {
    const auto& node = g.node(i);
    if (node.features.empty()) throw ConfigError("node " + std::to_string(i) + " has no features");
    for (const auto& f : node.features) {
      const int fam = static_cast<int>(f.family);
      const int cap = family_capacity(f.family, cfg);
      if (f.value < 0 || f.value >= cap) {
        throw ConfigError(std::string("feature ") + graph::to_string(f.family) + "=" +
                          std::to_string(f.value) + " outside an embedding table of " +
                          std::to_string(cap) + " rows");
      }
      bags[fam][i].push_back(f.value);
      used[fam] = true;
    }
    inv_count[i] = T(1) / static_cast<T>(node.features.size());
    indicator[i] = node.kind == NodeKind::Question || node.kind == NodeKind::Token ||
                   node.kind == NodeKind::QNumber;
  }
  Var<T> total;
  for (int f = 0; f < graph::kNumFeatureFamilies; ++f) {
    if (!used[f]) continue;
    const Var<T> e = ad::embedding_bag_sum(p(p.params().family[f]), bags[f]);
    total = total.valid() ? ad::add(total, e) : e;
  }
  const Var<T> mean = ad::scale_rows(total, std::move(inv_count));
  return ad::concat_cols(std::vector<Var<T>>{mean, ad::gather_rows(p(p.params().indicator), indicator)});
}

template <typename T>
Var<T> encode(ParamBinder<T>& p, const AnnotatedGraph& g, Var<T> x, EncoderTrace<T>* trace) {
  const ModelConfig& cfg = p.config();
  const int n = g.size();
  if (g.labels().size() != static_cast<std::size_t>(n) * n) {
    throw Error("label matrix does not match the node count");
  }
  if (x.rows() != n || x.cols() != cfg.d_model) {
    throw ShapeError("encoder input " + x.value().shape_string() + " for " + std::to_string(n) + " nodes");
  }
  std::vector<int> labels(g.labels().size());
  std::transform(g.labels().begin(), g.labels().end(), labels.begin(),
                 [](graph::EdgeLabel l) { return static_cast<int>(l); });
  const int dh = cfg.d_head();
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  const T p_drop = static_cast<T>(cfg.dropout);
  for (std::size_t l = 0; l < p.params().layers.size(); ++l) {
    const LayerParams& L = p.params().layers[l];
    const Var<T> q = ad::matmul(x, p(L.wq));
    const Var<T> k = ad::matmul(x, p(L.wk));
    const Var<T> v = ad::matmul(x, p(L.wv));
    std::vector<Var<T>> heads;
    for (int h = 0; h < cfg.heads; ++h) {
      const bool split = cfg.heads > 1;
      const Var<T> qh = split ? ad::slice_cols(q, h * dh, dh) : q;
      const Var<T> kh = split ? ad::slice_cols(k, h * dh, dh) : k;
      const Var<T> vh = split ? ad::slice_cols(v, h * dh, dh) : v;
      // s_ij = q_i . k_j + q_i . rK[label(i, j)]
      const Var<T> s = ad::add(ad::matmul_nt(qh, kh), ad::label_gather(ad::matmul_nt(qh, p(L.rel_k)), labels));
      if (trace != nullptr && l == 0) trace->first_layer_scores.push_back(s);
      const Var<T> a = ad::dropout(ad::softmax(ad::scale(s, inv_sqrt)), p_drop);
      heads.push_back(ad::add(ad::matmul(a, vh),
                              ad::matmul(ad::label_scatter(a, labels, graph::kNumEdgeLabels), p(L.rel_v))));
    }
    const Var<T> z = heads.size() == 1 ? heads[0] : ad::concat_cols(heads);
    const Var<T> attn = ad::dropout(ad::add(ad::matmul(z, p(L.wo)), p(L.bo)), p_drop);
    const Var<T> x1 = ad::layer_norm(ad::add(x, attn), p(L.ln1_g), p(L.ln1_b));
    const Var<T> hidden = ad::relu(ad::add(ad::matmul(x1, p(L.ff1_w)), p(L.ff1_b)));
    const Var<T> ff = ad::dropout(ad::add(ad::matmul(hidden, p(L.ff2_w)), p(L.ff2_b)), p_drop);
    x = ad::layer_norm(ad::add(x1, ff), p(L.ln2_g), p(L.ln2_b));
  }
  return x;
}

template <typename T>
Var<T> encode(ParamBinder<T>& p, const AnnotatedGraph& g) {
  return encode(p, g, embed_nodes(p, g));
}

std::vector<int> target_symbols(const AnnotatedGraph& g, const AnswerSelection& target) {
  if (target.columns.empty() || target.rows.empty()) {
    throw InvalidExampleError("decoder target needs at least one column and one row");
  }
  const int nc = g.num_columns(), nr = g.num_rows();
  std::vector<int> cols = target.columns, rows = target.rows;
  std::sort(cols.begin(), cols.end());
  std::sort(rows.begin(), rows.end());
  if (std::adjacent_find(cols.begin(), cols.end()) != cols.end() ||
      std::adjacent_find(rows.begin(), rows.end()) != rows.end()) {
    throw InvalidExampleError("decoder target repeats an index");
  }
  if (cols.front() < 0 || cols.back() >= nc || rows.front() < 0 || rows.back() >= nr) {
    throw InvalidExampleError("decoder target index outside the table");
  }
  std::vector<int> out(cols.begin(), cols.end());
  out.push_back(nc + nr);
  for (int r : rows) out.push_back(nc + r);
  out.push_back(nc + nr + 1);
  return out;
}

namespace {

// Legal candidates given the decoding history.
struct MaskState {
  int nc, nr;
  std::vector<uint8_t> used;
  bool rows_phase = false;
  bool done = false;
  int cols_chosen = 0, rows_chosen = 0;

  MaskState(int c, int r) : nc(c), nr(r), used(c + r, 0) {}
  int sep() const { return nc + nr; }
  int eos() const { return nc + nr + 1; }

  ad::Mask mask() const {
    ad::Mask m(nc + nr + 2, 0);
    if (!rows_phase) {
      for (int c = 0; c < nc; ++c) m[c] = !used[c];
      m[sep()] = cols_chosen > 0;
    } else {
      for (int r = 0; r < nr; ++r) m[nc + r] = !used[nc + r];
      m[eos()] = rows_chosen > 0;
    }
    return m;
  }

  void apply(int k) {
    if (k == sep()) {
      rows_phase = true;
    } else if (k == eos()) {
      done = true;
    } else {
      used[k] = 1;
      (k < nc ? cols_chosen : rows_chosen)++;
    }
  }
};

template <typename T>
struct DecoderInputs {
  Var<T> raw;   // [P + 2, d]: pointable encodings, SEP, EOS
  Var<T> proj;  // pointer projection of raw
  Var<T> h0;
};

template <typename T>
DecoderInputs<T> prepare(ParamBinder<T>& p, Var<T> encoded, const AnnotatedGraph& g) {
  const DecoderParams& D = p.params().decoder;
  if (g.question_node() < 0) throw InvalidExampleError("graph has no question node");
  if (g.num_columns() == 0 || g.num_rows() == 0) throw InvalidExampleError("graph has no table nodes");
  DecoderInputs<T> in;
  in.raw = ad::concat_rows(std::vector<Var<T>>{ad::gather_rows(encoded, g.pointable()), p(D.special)});
  in.proj = ad::add(ad::matmul(in.raw, p(D.ptr_w)), p(D.ptr_b));
  in.h0 = ad::gather_rows(encoded, {g.question_node()});
  return in;
}

// h' = LN(h + z * (c - h)) with z = sigmoid([x, h] Wz + bz), c = tanh([x, h] Wc + bc)
template <typename T>
Var<T> step(ParamBinder<T>& p, Var<T> h, Var<T> x) {
  const DecoderParams& D = p.params().decoder;
  const Var<T> xh = ad::concat_cols(std::vector<Var<T>>{x, h});
  const Var<T> z = ad::sigmoid(ad::add(ad::matmul(xh, p(D.wz)), p(D.bz)));
  const Var<T> c = ad::tanh(ad::add(ad::matmul(xh, p(D.wc)), p(D.bc)));
  return ad::layer_norm(ad::add(h, ad::mul(z, ad::sub(c, h))), p(D.ln_g), p(D.ln_b));
}

template <typename T>
Var<T> start_input(ParamBinder<T>& p) {
  return ad::gather_rows(p(p.params().decoder.special), {kSpecialEos});
}

}  // namespace

template <typename T>
Var<T> decode_training_loss(ParamBinder<T>& p, Var<T> encoded, const AnnotatedGraph& g,
                            const AnswerSelection& target) {
  const std::vector<int> symbols = target_symbols(g, target);
  const DecoderInputs<T> in = prepare(p, encoded, g);
  MaskState state(g.num_columns(), g.num_rows());
  Var<T> h = in.h0;
  Var<T> x = start_input(p);
  std::vector<Var<T>> logits;
  ad::Mask masks;
  for (int sym : symbols) {
    h = step(p, h, x);
    logits.push_back(ad::matmul_nt(h, in.proj));
    const ad::Mask m = state.mask();
    masks.insert(masks.end(), m.begin(), m.end());
    state.apply(sym);
    x = ad::gather_rows(in.raw, {sym});
  }
  return ad::cross_entropy(ad::concat_rows(logits), symbols, masks);
}

template <typename T>
AnswerSelection decode_greedy(ParamBinder<T>& p, Var<T> encoded, const AnnotatedGraph& g) {
  const DecoderInputs<T> in = prepare(p, encoded, g);
  const int nc = g.num_columns(), nr = g.num_rows();
  const int cfg_len = p.config().max_decode_len;
  const int max_len = cfg_len > 0 ? cfg_len : 2 + nc + nr;
  MaskState state(nc, nr);
  Var<T> h = in.h0;
  Var<T> x = start_input(p);
  std::vector<T> last(nc + nr + 2, T(0));
  AnswerSelection out;
  for (int t = 0; t < max_len && !state.done; ++t) {
    h = step(p, h, x);
    const auto& scores = ad::matmul_nt(h, in.proj).value().data;
    std::copy(scores.begin(), scores.end(), last.begin());
    const ad::Mask m = state.mask();
    int best = -1;
    for (int k = 0; k < nc + nr + 2; ++k) {
      if (m[k] && (best < 0 || scores[k] > scores[best])) best = k;
    }
    state.apply(best);
    if (best < nc) out.columns.push_back(best);
    else if (best < nc + nr) out.rows.push_back(best - nc);
    x = ad::gather_rows(in.raw, {best});
  }
  // A hard stop can leave either phase empty; fill it from the last scores.
  auto force = [&](int begin, int count, std::vector<int>& dst) {
    if (!dst.empty()) return;
    int best = begin;
    for (int k = begin; k < begin + count; ++k) {
      if (last[k] > last[best]) best = k;
    }
    dst.push_back(best - begin);
  };
  force(0, nc, out.columns);
  force(nc, nr, out.rows);
  std::sort(out.columns.begin(), out.columns.end());
  std::sort(out.rows.begin(), out.rows.end());
  return out;
}

template <typename T>
AnswerSelection predict(const ModelParameters<T>& params, const AnnotatedGraph& g) {
  ad::Graph<T> tape(false);
  tape.set_grad_enabled(false);
  ParamBinder<T> p(tape, params);
  return decode_greedy(p, encode(p, g), g);
}

template <typename T>
Var<T> example_loss(ParamBinder<T>& p, const AnnotatedGraph& g, const AnswerSelection& target) {
  return decode_training_loss(p, encode(p, g), g, target);
}

#define TGQA_INSTANTIATE_MODEL(T)                                                                  \
  template Var<T> embed_nodes(ParamBinder<T>&, const AnnotatedGraph&);                            \
  template Var<T> encode(ParamBinder<T>&, const AnnotatedGraph&, Var<T>, EncoderTrace<T>*);       \
  template Var<T> encode(ParamBinder<T>&, const AnnotatedGraph&);                                 \
  template Var<T> decode_training_loss(ParamBinder<T>&, Var<T>, const AnnotatedGraph&,             \
                                       const AnswerSelection&);                                   \
  template AnswerSelection decode_greedy(ParamBinder<T>&, Var<T>, const AnnotatedGraph&);         \
  template AnswerSelection predict(const ModelParameters<T>&, const AnnotatedGraph&);             \
  template Var<T> example_loss(ParamBinder<T>&, const AnnotatedGraph&, const AnswerSelection&);

TGQA_INSTANTIATE_MODEL(float)
TGQA_INSTANTIATE_MODEL(double)

#undef TGQA_INSTANTIATE_MODEL

}  // namespace tgqa::model
