#pragma once

#include <cstddef>
#include <cstdlib>
#include <initializer_list>
#include <new>
#include <string>
#include <vector>

namespace tgqa::ad {

template <typename T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <typename U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = ((n * sizeof(T) + Align - 1) / Align) * Align;
    void* p = std::aligned_alloc(Align, bytes == 0 ? Align : bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept {
    return true;
  }
};

template <typename T>
using Buffer = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major tensor. Ops view it as a matrix of `rows()` x `cols()`
/// where cols is the last dimension.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  Buffer<T> data;
  bool requires_grad = false;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_, T fill = T(0));
  Tensor(int rows, int cols, T fill = T(0)) : Tensor(std::vector<int>{rows, cols}, fill) {}

  static Tensor matrix(int rows, int cols, std::initializer_list<T> values);
  static Tensor scalar(T v) { return Tensor(std::vector<int>{1, 1}, v); }

  std::size_t size() const { return data.size(); }
  int rows() const;
  int cols() const { return shape.empty() ? 1 : shape.back(); }

  T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  const T& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

  std::string shape_string() const;
  bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }
};

inline std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d < 0 ? 0 : d);
  return n;
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> shape_, T fill)
    : shape(std::move(shape_)), data(shape_product(shape), fill) {}

template <typename T>
Tensor<T> Tensor<T>::matrix(int rows, int cols, std::initializer_list<T> values) {
  Tensor t(rows, cols);
  std::size_t i = 0;
  for (T v : values) {
    if (i < t.data.size()) t.data[i] = v;
    ++i;
  }
  return t;
}

template <typename T>
int Tensor<T>::rows() const {
  if (shape.size() <= 1) return 1;
  std::size_t r = 1;
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) r *= shape[i];
  return static_cast<int>(r);
}

template <typename T>
std::string Tensor<T>::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace tgqa::ad
