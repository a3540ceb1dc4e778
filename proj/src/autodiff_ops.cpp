#include "tgqa/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tgqa/error.hpp"

namespace tgqa::ad {

namespace {

// C[n,m] += A[n,k] * B[k,m]
template <typename T>
void gemm_nn(const T* __restrict a, const T* __restrict b, T* __restrict c, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * m;
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[k,m] += A[n,k]^T * B[n,m]
template <typename T>
void gemm_tn(const T* __restrict a, const T* __restrict b, T* __restrict c, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    const T* brow = b + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      T* crow = c + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
Buffer<T> transposed(const T* b, int rows, int cols) {
  Buffer<T> out(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(c) * rows + r] = b[static_cast<std::size_t>(r) * cols + c];
  }
  return out;
}

// C[n,m] += A[n,k] * B[m,k]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int n, int k, int m) {
  const Buffer<T> bt = transposed(b, m, k);
  gemm_nn(a, bt.data(), c, n, k, m);
}

template <typename T>
Graph<T>& graph_of(Var<T> a) {
  if (a.graph == nullptr) throw Error("variable is detached from any graph");
  a.graph->check_owned(a);
  return *a.graph;
}

template <typename T>
Graph<T>& graph_of(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a);
  g.check_owned(b);
  return g;
}

template <typename T>
Tensor<T>* grad_of(Graph<T>& g, int id) {
  return g.requires_grad(id) ? &g.grad_mut(id) : nullptr;
}

std::string shapes(const char* op, const std::string& a, const std::string& b) {
  return std::string(op) + ": incompatible shapes " + a + " and " + b;
}

template <typename T>
void check_mask(const Mask& mask, const Tensor<T>& a, const char* op) {
  if (!mask.empty() && mask.size() != a.size()) {
    throw ShapeError(std::string(op) + ": mask has " + std::to_string(mask.size()) +
                     " entries for " + a.shape_string());
  }
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  const Tensor<T>& A = g.value(a);
  const Tensor<T>& B = g.value(b);
  if (A.cols() != B.rows()) throw ShapeError(shapes("matmul", A.shape_string(), B.shape_string()));
  const int n = A.rows(), k = A.cols(), m = B.cols();
  Tensor<T> C(n, m);
  gemm_nn(A.data.data(), B.data.data(), C.data.data(), n, k, m);
  return g.record(std::move(C), {a.id, b.id}, [n, k, m](Graph<T>& g, int id) {
    const int ia = g.inputs(id)[0], ib = g.inputs(id)[1];
    const Tensor<T>& dC = g.grad_mut(id);
    if (Tensor<T>* dA = grad_of(g, ia)) gemm_nt(dC.data.data(), g.value(ib).data.data(), dA->data.data(), n, m, k);
    if (Tensor<T>* dB = grad_of(g, ib)) gemm_tn(g.value(ia).data.data(), dC.data.data(), dB->data.data(), n, k, m);
  });
}

template <typename T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  const Tensor<T>& A = g.value(a);
  const Tensor<T>& B = g.value(b);
  if (A.cols() != B.cols()) throw ShapeError(shapes("matmul_nt", A.shape_string(), B.shape_string()));
  const int n = A.rows(), k = A.cols(), m = B.rows();
  Tensor<T> C(n, m);
  gemm_nt(A.data.data(), B.data.data(), C.data.data(), n, k, m);
  return g.record(std::move(C), {a.id, b.id}, [n, k, m](Graph<T>& g, int id) {
    const int ia = g.inputs(id)[0], ib = g.inputs(id)[1];
    const Tensor<T>& dC = g.grad_mut(id);
    if (Tensor<T>* dA = grad_of(g, ia)) gemm_nn(dC.data.data(), g.value(ib).data.data(), dA->data.data(), n, m, k);
    if (Tensor<T>* dB = grad_of(g, ib)) gemm_tn(dC.data.data(), g.value(ia).data.data(), dB->data.data(), n, m, k);
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  Graph<T>& g = graph_of(a);
  const Tensor<T>& A = g.value(a);
  const int n = A.rows(), m = A.cols();
  Tensor<T> out(m, n);
  out.data = transposed(A.data.data(), n, m);
  return g.record(std::move(out), {a.id}, [n, m](Graph<T>& g, int id) {
    const int ia = g.inputs(id)[0];
    Tensor<T>* dA = grad_of(g, ia);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < m; ++c) (*dA)(r, c) += dy(c, r);
    }
  });
}

namespace {

enum class Binary { Add, Sub, Mul };

template <typename T>
Var<T> binary(Var<T> a, Var<T> b, Binary op, const char* name) {
  Graph<T>& g = graph_of(a, b);
  const Tensor<T>& A = g.value(a);
  const Tensor<T>& B = g.value(b);
  const bool broadcast = op != Binary::Mul && B.rows() == 1 && A.rows() != 1 && B.cols() == A.cols();
  if (!broadcast && !A.same_shape(B)) throw ShapeError(shapes(name, A.shape_string(), B.shape_string()));
  const int n = A.rows(), m = A.cols();
  Tensor<T> out(A.shape);
  for (int i = 0; i < n; ++i) {
    const T* arow = A.data.data() + static_cast<std::size_t>(i) * m;
    const T* brow = B.data.data() + (broadcast ? 0 : static_cast<std::size_t>(i) * m);
    T* orow = out.data.data() + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      orow[j] = op == Binary::Add ? arow[j] + brow[j] : op == Binary::Sub ? arow[j] - brow[j] : arow[j] * brow[j];
    }
  }
  return g.record(std::move(out), {a.id, b.id}, [n, m, broadcast, op](Graph<T>& g, int id) {
    const int ia = g.inputs(id)[0], ib = g.inputs(id)[1];
    const Tensor<T>& dy = g.grad_mut(id);
    Tensor<T>* dA = grad_of(g, ia);
    Tensor<T>* dB = grad_of(g, ib);
    for (int i = 0; i < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * m;
      const std::size_t brow = broadcast ? 0 : row;
      for (int j = 0; j < m; ++j) {
        const T d = dy.data[row + j];
        if (op == Binary::Mul) {
          if (dA) dA->data[row + j] += d * g.value(ib).data[row + j];
          if (dB) dB->data[row + j] += d * g.value(ia).data[row + j];
        } else {
          if (dA) dA->data[row + j] += d;
          if (dB) dB->data[brow + j] += op == Binary::Add ? d : -d;
        }
      }
    }
  });
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  return binary(a, b, Binary::Add, "add");
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return binary(a, b, Binary::Sub, "sub");
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return binary(a, b, Binary::Mul, "mul");
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Graph<T>& g = graph_of(a);
  Tensor<T> out = g.value(a);
  out.requires_grad = false;
  for (T& v : out.data) v *= s;
  return g.record(std::move(out), {a.id}, [s](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (std::size_t i = 0; i < dy.size(); ++i) dA->data[i] += s * dy.data[i];
  });
}

template <typename T>
Var<T> scale_rows(Var<T> a, std::vector<T> s) {
  Graph<T>& g = graph_of(a);
  Tensor<T> out = g.value(a);
  out.requires_grad = false;
  const int n = out.rows(), m = out.cols();
  if (static_cast<int>(s.size()) != n) {
    throw ShapeError("scale_rows: " + std::to_string(s.size()) + " factors for " + out.shape_string());
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) out(i, j) *= s[i];
  }
  return g.record(std::move(out), {a.id}, [s = std::move(s), n, m](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) (*dA)(i, j) += s[i] * dy(i, j);
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  Graph<T>& g = graph_of(a);
  T total = 0;
  for (T v : g.value(a).data) total += v;
  return g.record(Tensor<T>::scalar(total), {a.id}, [](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const T d = g.grad_mut(id).data[0];
    for (T& v : dA->data) v += d;
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  const std::size_t n = graph_of(a).value(a).size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(n));
}

template <typename T>
Var<T> mean_axis(Var<T> a, int axis) {
  Graph<T>& g = graph_of(a);
  const Tensor<T>& A = g.value(a);
  const int n = A.rows(), m = A.cols();
  if (axis != 0 && axis != 1) throw ShapeError("mean_axis: axis must be 0 or 1");
  Tensor<T> out = axis == 0 ? Tensor<T>(1, m) : Tensor<T>(n, 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (axis == 0) out(0, j) += A(i, j) / static_cast<T>(n);
      else out(i, 0) += A(i, j) / static_cast<T>(m);
    }
  }
  return g.record(std::move(out), {a.id}, [axis, n, m](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        (*dA)(i, j) += axis == 0 ? dy(0, j) / static_cast<T>(n) : dy(i, 0) / static_cast<T>(m);
      }
    }
  });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  Graph<T>& g = graph_of(parts[0]);
  const int n = g.value(parts[0]).rows();
  std::vector<int> widths, ids;
  int total = 0;
  for (const auto& p : parts) {
    g.check_owned(p);
    const Tensor<T>& P = g.value(p);
    if (P.rows() != n) throw ShapeError(shapes("concat_cols", g.value(parts[0]).shape_string(), P.shape_string()));
    widths.push_back(P.cols());
    ids.push_back(p.id);
    total += P.cols();
  }
  Tensor<T> out(n, total);
  int off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor<T>& P = g.value(parts[k]);
    for (int i = 0; i < n; ++i) std::copy_n(&P.data[static_cast<std::size_t>(i) * widths[k]], widths[k], &out(i, off));
    off += widths[k];
  }
  return g.record(std::move(out), ids, [widths, n](Graph<T>& g, int id) {
    const Tensor<T>& dy = g.grad_mut(id);
    int off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (Tensor<T>* dP = grad_of(g, g.inputs(id)[k])) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < widths[k]; ++j) (*dP)(i, j) += dy(i, off + j);
        }
      }
      off += widths[k];
    }
  });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  Graph<T>& g = graph_of(parts[0]);
  const int m = g.value(parts[0]).cols();
  std::vector<int> heights, ids;
  int total = 0;
  for (const auto& p : parts) {
    g.check_owned(p);
    const Tensor<T>& P = g.value(p);
    if (P.cols() != m) throw ShapeError(shapes("concat_rows", g.value(parts[0]).shape_string(), P.shape_string()));
    heights.push_back(P.rows());
    ids.push_back(p.id);
    total += P.rows();
  }
  Tensor<T> out(total, m);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const Tensor<T>& P = g.value(p);
    std::copy(P.data.begin(), P.data.end(), out.data.begin() + off);
    off += P.size();
  }
  return g.record(std::move(out), ids, [](Graph<T>& g, int id) {
    const Tensor<T>& dy = g.grad_mut(id);
    std::size_t off = 0;
    for (int in : g.inputs(id)) {
      const std::size_t len = g.value(in).size();
      if (Tensor<T>* dP = grad_of(g, in)) {
        for (std::size_t i = 0; i < len; ++i) dP->data[i] += dy.data[off + i];
      }
      off += len;
    }
  });
}

template <typename T>
Var<T> slice_cols(Var<T> a, int start, int len) {
  Graph<T>& g = graph_of(a);
  const Tensor<T>& A = g.value(a);
  if (start < 0 || len < 0 || start + len > A.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(start) + ", " + std::to_string(start + len) +
                     ") out of range for " + A.shape_string());
  }
  const int n = A.rows();
  Tensor<T> out(n, len);
  for (int i = 0; i < n; ++i) std::copy_n(&A(i, start), len, &out(i, 0));
  return g.record(std::move(out), {a.id}, [n, start, len](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < len; ++j) (*dA)(i, start + j) += dy(i, j);
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> table, const std::vector<int>& ids) {
  Graph<T>& g = graph_of(table);
  const Tensor<T>& E = g.value(table);
  const int m = E.cols();
  Tensor<T> out(static_cast<int>(ids.size()), m);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= E.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(ids[i]) + " outside " + E.shape_string());
    }
    std::copy_n(&E(ids[i], 0), m, &out(static_cast<int>(i), 0));
  }
  return g.record(std::move(out), {table.id}, [ids, m](Graph<T>& g, int id) {
    Tensor<T>* dE = grad_of(g, g.inputs(id)[0]);
    if (dE == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      T* dst = &(*dE)(ids[i], 0);
      const T* src = &dy.data[i * m];
      for (int j = 0; j < m; ++j) dst[j] += src[j];
    }
  });
}

template <typename T>
Var<T> embedding_bag_sum(Var<T> table, const std::vector<std::vector<int>>& bags) {
  Graph<T>& g = graph_of(table);
  const Tensor<T>& E = g.value(table);
  const int m = E.cols();
  Tensor<T> out(static_cast<int>(bags.size()), m);
  for (std::size_t i = 0; i < bags.size(); ++i) {
    T* dst = &out(static_cast<int>(i), 0);
    for (int r : bags[i]) {
      if (r < 0 || r >= E.rows()) {
        throw ShapeError("embedding_bag_sum: index " + std::to_string(r) + " outside " + E.shape_string());
      }
      const T* src = &E(r, 0);
      for (int j = 0; j < m; ++j) dst[j] += src[j];
    }
  }
  return g.record(std::move(out), {table.id}, [bags, m](Graph<T>& g, int id) {
    Tensor<T>* dE = grad_of(g, g.inputs(id)[0]);
    if (dE == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (std::size_t i = 0; i < bags.size(); ++i) {
      const T* src = &dy.data[i * m];
      for (int r : bags[i]) {
        T* dst = &(*dE)(r, 0);
        for (int j = 0; j < m; ++j) dst[j] += src[j];
      }
    }
  });
}

template <typename T>
Var<T> softmax(Var<T> a, const Mask& mask) {
  Graph<T>& g = graph_of(a);
  const Tensor<T>& A = g.value(a);
  check_mask(mask, A, "softmax");
  const int n = A.rows(), m = A.cols();
  Tensor<T> out(A.shape);
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * m;
    T mx = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < m; ++j) {
      if (mask.empty() || mask[row + j]) mx = std::max(mx, A.data[row + j]);
    }
    if (mx == -std::numeric_limits<T>::infinity()) continue;
    T z = 0;
    for (int j = 0; j < m; ++j) {
      if (!mask.empty() && !mask[row + j]) continue;
      const T e = std::exp(A.data[row + j] - mx);
      out.data[row + j] = e;
      z += e;
    }
    for (int j = 0; j < m; ++j) out.data[row + j] /= z;
  }
  return g.record(std::move(out), {a.id}, [n, m](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& y = g.value(id);
    const Tensor<T>& dy = g.grad_mut(id);
    for (int i = 0; i < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * m;
      T dot = 0;
      for (int j = 0; j < m; ++j) dot += y.data[row + j] * dy.data[row + j];
      for (int j = 0; j < m; ++j) dA->data[row + j] += y.data[row + j] * (dy.data[row + j] - dot);
    }
  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  Graph<T>& g = graph_of(x, gain);
  g.check_owned(bias);
  const Tensor<T>& X = g.value(x);
  const int n = X.rows(), m = X.cols();
  if (g.value(gain).size() != static_cast<std::size_t>(m) || g.value(bias).size() != static_cast<std::size_t>(m)) {
    throw ShapeError(shapes("layer_norm", X.shape_string(), g.value(gain).shape_string()));
  }
  const T* gv = g.value(gain).data.data();
  const T* bv = g.value(bias).data.data();
  Tensor<T> xhat(X.shape);
  std::vector<T> inv_std(n);
  Tensor<T> out(X.shape);
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * m;
    T mu = 0;
    for (int j = 0; j < m; ++j) mu += X.data[row + j];
    mu /= static_cast<T>(m);
    T var = 0;
    for (int j = 0; j < m; ++j) var += (X.data[row + j] - mu) * (X.data[row + j] - mu);
    var /= static_cast<T>(m);
    inv_std[i] = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < m; ++j) {
      xhat.data[row + j] = (X.data[row + j] - mu) * inv_std[i];
      out.data[row + j] = xhat.data[row + j] * gv[j] + bv[j];
    }
  }
  return g.record(std::move(out), {x.id, gain.id, bias.id},
                  [xhat = std::move(xhat), inv_std = std::move(inv_std), n, m](Graph<T>& g, int id) {
    const int ix = g.inputs(id)[0], ig = g.inputs(id)[1], ib = g.inputs(id)[2];
    const Tensor<T>& dy = g.grad_mut(id);
    const T* gv = g.value(ig).data.data();
    Tensor<T>* dX = grad_of(g, ix);
    Tensor<T>* dG = grad_of(g, ig);
    Tensor<T>* dB = grad_of(g, ib);
    std::vector<T> dxhat(m);
    for (int i = 0; i < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * m;
      T mean_d = 0, mean_dx = 0;
      for (int j = 0; j < m; ++j) {
        const T d = dy.data[row + j];
        if (dG) dG->data[j] += d * xhat.data[row + j];
        if (dB) dB->data[j] += d;
        dxhat[j] = d * gv[j];
        mean_d += dxhat[j];
        mean_dx += dxhat[j] * xhat.data[row + j];
      }
      if (!dX) continue;
      mean_d /= static_cast<T>(m);
      mean_dx /= static_cast<T>(m);
      for (int j = 0; j < m; ++j) {
        dX->data[row + j] += inv_std[i] * (dxhat[j] - mean_d - xhat.data[row + j] * mean_dx);
      }
    }
  });
}

namespace {

enum class Unary { Relu, Sigmoid, Tanh };

template <typename T>
Var<T> unary(Var<T> a, Unary op) {
  Graph<T>& g = graph_of(a);
  Tensor<T> out = g.value(a);
  out.requires_grad = false;
  for (T& v : out.data) {
    if (op == Unary::Relu) v = v > T(0) ? v : T(0);
    else if (op == Unary::Sigmoid) v = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
    else v = std::tanh(v);
  }
  return g.record(std::move(out), {a.id}, [op](Graph<T>& g, int id) {
    const int ia = g.inputs(id)[0];
    Tensor<T>* dA = grad_of(g, ia);
    if (dA == nullptr) return;
    const Tensor<T>& y = g.value(id);
    const Tensor<T>& dy = g.grad_mut(id);
    for (std::size_t i = 0; i < y.size(); ++i) {
      T d;
      if (op == Unary::Relu) d = g.value(ia).data[i] > T(0) ? T(1) : T(0);
      else if (op == Unary::Sigmoid) d = y.data[i] * (T(1) - y.data[i]);
      else d = T(1) - y.data[i] * y.data[i];
      dA->data[i] += d * dy.data[i];
    }
  });
}

}  // namespace

template <typename T>
Var<T> relu(Var<T> a) {
  return unary(a, Unary::Relu);
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  return unary(a, Unary::Sigmoid);
}

template <typename T>
Var<T> tanh(Var<T> a) {
  return unary(a, Unary::Tanh);
}

template <typename T>
Var<T> dropout(Var<T> a, T p) {
  Graph<T>& g = graph_of(a);
  if (p < T(0) || p >= T(1)) throw ShapeError("dropout probability must be in [0, 1)");
  if (!g.train_mode() || p == T(0)) return a;
  const Tensor<T>& A = g.value(a);
  Buffer<T> keep(A.size());
  const T s = T(1) / (T(1) - p);
  for (T& k : keep) k = g.rng().uniform() >= static_cast<double>(p) ? s : T(0);
  Tensor<T> out(A.shape);
  for (std::size_t i = 0; i < A.size(); ++i) out.data[i] = A.data[i] * keep[i];
  return g.record(std::move(out), {a.id}, [keep = std::move(keep)](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (std::size_t i = 0; i < keep.size(); ++i) dA->data[i] += keep[i] * dy.data[i];
  });
}

template <typename T>
Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets, const Mask& mask) {
  Graph<T>& g = graph_of(logits);
  const Tensor<T>& Z = g.value(logits);
  check_mask(mask, Z, "cross_entropy");
  const int n = Z.rows(), m = Z.cols();
  if (static_cast<int>(targets.size()) != n || n == 0) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " + Z.shape_string());
  }
  Tensor<T> probs(Z.shape);
  T loss = 0;
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * m;
    const int t = targets[i];
    if (t < 0 || t >= m || (!mask.empty() && !mask[row + t])) {
      throw ShapeError("cross_entropy: target " + std::to_string(t) + " is not an allowed class");
    }
    T mx = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < m; ++j) {
      if (mask.empty() || mask[row + j]) mx = std::max(mx, Z.data[row + j]);
    }
    T z = 0;
    for (int j = 0; j < m; ++j) {
      if (!mask.empty() && !mask[row + j]) continue;
      probs.data[row + j] = std::exp(Z.data[row + j] - mx);
      z += probs.data[row + j];
    }
    for (int j = 0; j < m; ++j) probs.data[row + j] /= z;
    loss += std::log(z) + mx - Z.data[row + t];
  }
  loss /= static_cast<T>(n);
  return g.record(Tensor<T>::scalar(loss), {logits.id},
                  [probs = std::move(probs), targets, n, m](Graph<T>& g, int id) {
    Tensor<T>* dZ = grad_of(g, g.inputs(id)[0]);
    if (dZ == nullptr) return;
    const T d = g.grad_mut(id).data[0] / static_cast<T>(n);
    for (int i = 0; i < n; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) dZ->data[row + j] += d * (probs.data[row + j] - (j == targets[i] ? T(1) : T(0)));
    }
  });
}

template <typename T>
Var<T> label_gather(Var<T> a, const std::vector<int>& labels) {
  Graph<T>& g = graph_of(a);
  const Tensor<T>& A = g.value(a);
  const int n = A.rows(), L = A.cols();
  if (labels.size() != static_cast<std::size_t>(n) * n) {
    throw ShapeError("label_gather: " + std::to_string(labels.size()) + " labels for " + A.shape_string());
  }
  for (int l : labels) {
    if (l < 0 || l >= L) throw ShapeError("label_gather: label " + std::to_string(l) + " outside " + A.shape_string());
  }
  Tensor<T> out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = A(i, labels[static_cast<std::size_t>(i) * n + j]);
  }
  return g.record(std::move(out), {a.id}, [labels, n](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) (*dA)(i, labels[static_cast<std::size_t>(i) * n + j]) += dy(i, j);
    }
  });
}

template <typename T>
Var<T> label_scatter(Var<T> a, const std::vector<int>& labels, int num_labels) {
  Graph<T>& g = graph_of(a);
  const Tensor<T>& A = g.value(a);
  const int n = A.rows();
  if (A.cols() != n || labels.size() != static_cast<std::size_t>(n) * n) {
    throw ShapeError("label_scatter: " + std::to_string(labels.size()) + " labels for " + A.shape_string());
  }
  for (int l : labels) {
    if (l < 0 || l >= num_labels) throw ShapeError("label_scatter: label " + std::to_string(l) + " out of range");
  }
  Tensor<T> out(n, num_labels);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, labels[static_cast<std::size_t>(i) * n + j]) += A(i, j);
  }
  return g.record(std::move(out), {a.id}, [labels, n](Graph<T>& g, int id) {
    Tensor<T>* dA = grad_of(g, g.inputs(id)[0]);
    if (dA == nullptr) return;
    const Tensor<T>& dy = g.grad_mut(id);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) (*dA)(i, j) += dy(i, labels[static_cast<std::size_t>(i) * n + j]);
    }
  });
}

#define TGQA_INSTANTIATE_OPS(T)                                                            \
  template Var<T> matmul(Var<T>, Var<T>);                                                  \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                               \
  template Var<T> transpose(Var<T>);                                                       \
  template Var<T> add(Var<T>, Var<T>);                                                     \
  template Var<T> sub(Var<T>, Var<T>);                                                     \
  template Var<T> mul(Var<T>, Var<T>);                                                     \
  template Var<T> scale(Var<T>, T);                                                        \
  template Var<T> scale_rows(Var<T>, std::vector<T>);                                      \
  template Var<T> sum(Var<T>);                                                             \
  template Var<T> mean(Var<T>);                                                            \
  template Var<T> mean_axis(Var<T>, int);                                                  \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                                 \
  template Var<T> concat_rows(const std::vector<Var<T>>&);                                 \
  template Var<T> slice_cols(Var<T>, int, int);                                            \
  template Var<T> gather_rows(Var<T>, const std::vector<int>&);                            \
  template Var<T> embedding_bag_sum(Var<T>, const std::vector<std::vector<int>>&);         \
  template Var<T> softmax(Var<T>, const Mask&);                                            \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, T);                                   \
  template Var<T> relu(Var<T>);                                                            \
  template Var<T> sigmoid(Var<T>);                                                         \
  template Var<T> tanh(Var<T>);                                                            \
  template Var<T> dropout(Var<T>, T);                                                      \
  template Var<T> cross_entropy(Var<T>, const std::vector<int>&, const Mask&);             \
  template Var<T> label_gather(Var<T>, const std::vector<int>&);                           \
  template Var<T> label_scatter(Var<T>, const std::vector<int>&, int);

TGQA_INSTANTIATE_OPS(float)
TGQA_INSTANTIATE_OPS(double)

#undef TGQA_INSTANTIATE_OPS

}  // namespace tgqa::ad
