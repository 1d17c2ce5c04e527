#include "gigp/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gigp::nn {

AdamState make_adam(const std::vector<Tensor*>& params, double lr, double beta1,
                    double beta2, double eps) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  for (const Tensor* p : params) {
    s.m.emplace_back(p->data.size(), 0.0);
    s.v.emplace_back(p->data.size(), 0.0);
  }
  return s;
}

void adam_step(AdamState& state, const std::vector<Tensor*>& params) {
  if (params.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter list changed size");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor* p = params[pi];
    if (p->grad.size() != p->data.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    std::vector<double>& m = state.m[pi];
    std::vector<double>& v = state.v[pi];
    for (std::size_t i = 0; i < p->data.size(); ++i) {
      const double g = p->grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p->data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace gigp::nn
