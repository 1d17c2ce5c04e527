#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gigp/tensor.hpp"

namespace gigp::nn {

struct GradCheckItem {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckItem> items;
  double tol = 0.0;
  bool pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
  double worst() const {
    double w = 0.0;
    for (const auto& it : items) w = std::max(w, it.max_rel_err);
    return w;
  }
};

// Compares tape gradients against central finite differences. loss_fn must
// rebuild its tape from the current parameter values and run backward,
// leaving gradients in each parameter's grad buffer; it returns the loss.
// Parameters are perturbed in place coordinate by coordinate.
GradCheckReport grad_check(
    const std::function<double(bool with_backward)>& loss_fn,
    const std::vector<std::pair<std::string, Tensor*>>& params,
    double step = 1e-6, double tol = 1e-4);

}  // namespace gigp::nn
