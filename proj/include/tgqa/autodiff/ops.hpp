#pragma once

#include <cstdint>
#include <vector>

#include "tgqa/autodiff/graph.hpp"

namespace tgqa::ad {

/// Row mask: nonzero entries are allowed. Empty means everything is allowed.
using Mask = std::vector<uint8_t>;

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);     // [n,k] x [k,m]
template <typename T> Var<T> matmul_nt(Var<T> a, Var<T> b);  // [n,k] x [m,k]^T
template <typename T> Var<T> transpose(Var<T> a);

/// `b` has a's shape, or is [1,m] and broadcasts over rows.
template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);  // elementwise, same shape
template <typename T> Var<T> scale(Var<T> a, T s);
/// Multiplies row i by the constant s[i].
template <typename T> Var<T> scale_rows(Var<T> a, std::vector<T> s);

template <typename T> Var<T> sum(Var<T> a);   // [1,1]
template <typename T> Var<T> mean(Var<T> a);  // [1,1]
/// axis 0 averages rows into [1,m]; axis 1 averages columns into [n,1].
template <typename T> Var<T> mean_axis(Var<T> a, int axis);

template <typename T> Var<T> concat_cols(const std::vector<Var<T>>& parts);
template <typename T> Var<T> concat_rows(const std::vector<Var<T>>& parts);
template <typename T> Var<T> slice_cols(Var<T> a, int start, int len);

/// Embedding lookup: row i of the result is row ids[i] of `table`.
template <typename T> Var<T> gather_rows(Var<T> table, const std::vector<int>& ids);
/// Row i is the sum of the table rows listed in bags[i] (zeros when empty).
template <typename T>
Var<T> embedding_bag_sum(Var<T> table, const std::vector<std::vector<int>>& bags);

/// Softmax over each row. Masked entries get probability 0; a fully masked
/// row yields zeros.
template <typename T> Var<T> softmax(Var<T> a, const Mask& mask = {});
template <typename T> Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-6));
template <typename T> Var<T> relu(Var<T> a);
template <typename T> Var<T> sigmoid(Var<T> a);
template <typename T> Var<T> tanh(Var<T> a);
/// Identity unless the graph is in train mode; then inverted dropout.
template <typename T> Var<T> dropout(Var<T> a, T p);

/// Mean over rows of -log softmax(logits)[target]. Targets must be allowed
/// by the mask.
template <typename T>
Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets, const Mask& mask = {});

/// out[i][j] = a[i][labels[i*n + j]] for a of shape [n, L].
template <typename T> Var<T> label_gather(Var<T> a, const std::vector<int>& labels);
/// out[i][l] = sum_j a[i][j] * [labels[i*n + j] == l]; the adjoint of label_gather.
template <typename T>
Var<T> label_scatter(Var<T> a, const std::vector<int>& labels, int num_labels);

}  // namespace tgqa::ad
