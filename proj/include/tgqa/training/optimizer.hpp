#pragma once

#include <vector>

#include "tgqa/model/parameters.hpp"

namespace tgqa::training {

/// base_lr * d_model^-1/2 * min(step^-1/2, step * warmup^-3/2). Step 0 throws.
double lr_at_step(double base_lr, int d_model, int warmup, long step);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.98;
inline constexpr double kAdamEps = 1e-9;

struct AdamState {
  std::vector<ad::Tensor<float>> m, v;
  long t = 0;

  static AdamState for_params(const model::ModelParameters<float>& params);
};

/// Bias-corrected Adam. A non-finite gradient throws NumericError naming the
/// parameter before anything is modified.
void adam_update(model::ModelParameters<float>& params, const std::vector<ad::Tensor<float>>& grads,
                 AdamState& state, double lr);

/// Scales grads so their global L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_global_norm(std::vector<ad::Tensor<float>>& grads, double max_norm);

}  // namespace tgqa::training
