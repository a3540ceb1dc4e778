#include "tgqa/training/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "tgqa/error.hpp"

namespace tgqa::training {

double lr_at_step(double base_lr, int d_model, int warmup, long step) {
  if (step < 1) throw ConfigError("learning-rate schedule starts at step 1");
  if (warmup < 1 || d_model < 1) throw ConfigError("warmup and d_model must be positive");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return base_lr / std::sqrt(static_cast<double>(d_model)) * std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

AdamState AdamState::for_params(const model::ModelParameters<float>& params) {
  AdamState s;
  for (const auto& t : params.tensors) {
    s.m.emplace_back(t.shape);
    s.v.emplace_back(t.shape);
  }
  return s;
}

void adam_update(model::ModelParameters<float>& params, const std::vector<ad::Tensor<float>>& grads,
                 AdamState& state, double lr) {
  if (grads.size() != params.tensors.size() || state.m.size() != params.tensors.size()) {
    throw ShapeError("optimizer state does not match the parameters");
  }
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (grads[k].size() != params.tensors[k].size()) {
      throw ShapeError("gradient for " + params.names[k] + " has the wrong shape");
    }
    for (float g : grads[k].data) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + params.names[k]);
    }
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  const float b1 = static_cast<float>(kAdamBeta1), b2 = static_cast<float>(kAdamBeta2);
  const float step = static_cast<float>(lr / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float eps = static_cast<float>(kAdamEps);
  for (std::size_t k = 0; k < grads.size(); ++k) {
    float* p = params.tensors[k].data.data();
    float* m = state.m[k].data.data();
    float* v = state.v[k].data.data();
    const float* g = grads[k].data.data();
    const std::size_t n = grads[k].size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      p[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
    }
  }
}

double clip_global_norm(std::vector<ad::Tensor<float>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& t : grads) {
    for (float g : t.data) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const float s = static_cast<float>(max_norm / norm);
    for (auto& t : grads) {
      for (float& g : t.data) g *= s;
    }
  }
  return norm;
}

}  // namespace tgqa::training
