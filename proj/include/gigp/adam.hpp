#pragma once

#include <cstdint>
#include <vector>

#include "gigp/tensor.hpp"

namespace gigp::nn {

// Bias-corrected Adam over a fixed list of parameter tensors. Updates run in
// registration order with serial arithmetic, so training is reproducible.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState make_adam(const std::vector<Tensor*>& params, double lr,
                    double beta1 = 0.9, double beta2 = 0.999,
                    double eps = 1e-8);

// One update using each tensor's grad buffer.
void adam_step(AdamState& state, const std::vector<Tensor*>& params);

}  // namespace gigp::nn
