#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tgqa/autodiff/graph.hpp"

namespace tgqa::ad {

/// Scalar-valued program over graph inputs, rebuilt for every evaluation.
using Program = std::function<Var<double>(Graph<double>&, const std::vector<Var<double>>&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int worst_input = -1;
  std::size_t worst_index = 0;
};

/// Denominators below this floor are clamped so that gradients which are
/// zero up to rounding compare absolutely.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares backward() with central differences (f(x+h) - f(x-h)) / 2h for
/// every element of every input. Each evaluation uses a fresh graph with the
/// same mode and seed, so dropout masks repeat.
GradCheckResult check_gradients(const Program& f, std::vector<Tensor<double>> inputs,
                                double h = 1e-5, bool train_mode = false, uint64_t seed = 0);

double check_gradients(const std::function<Var<double>(Graph<double>&, Var<double>)>& f,
                       const Tensor<double>& x, double h = 1e-5);

}  // namespace tgqa::ad
