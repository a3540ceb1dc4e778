#include "tgqa/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace tgqa::ad {

namespace {

double evaluate(const Program& f, const std::vector<Tensor<double>>& inputs, bool train_mode,
                uint64_t seed) {
  Graph<double> g(train_mode, seed);
  std::vector<Var<double>> vars;
  for (const auto& t : inputs) vars.push_back(g.input(t));
  return g.value(f(g, vars)).data.at(0);
}

}  // namespace

GradCheckResult check_gradients(const Program& f, std::vector<Tensor<double>> inputs, double h,
                                bool train_mode, uint64_t seed) {
  std::vector<Tensor<double>> analytic;
  {
    Graph<double> g(train_mode, seed);
    std::vector<Var<double>> vars;
    for (const auto& t : inputs) vars.push_back(g.input(t));
    g.backward(f(g, vars));
    for (const auto& v : vars) analytic.push_back(g.grad(v));
  }
  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k].data[i];
      inputs[k].data[i] = x0 + h;
      const double fp = evaluate(f, inputs, train_mode, seed);
      inputs[k].data[i] = x0 - h;
      const double fm = evaluate(f, inputs, train_mode, seed);
      inputs[k].data[i] = x0;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[k].data[i];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (rel > result.max_rel_error || result.worst_input < 0) {
        result.max_rel_error = std::max(rel, result.max_rel_error);
        result.worst_input = static_cast<int>(k);
        result.worst_index = i;
      }
    }
  }
  return result;
}

double check_gradients(const std::function<Var<double>(Graph<double>&, Var<double>)>& f,
                       const Tensor<double>& x, double h) {
  const Program p = [&f](Graph<double>& g, const std::vector<Var<double>>& v) { return f(g, v[0]); };
  return check_gradients(p, {x}, h).max_rel_error;
}

}  // namespace tgqa::ad
