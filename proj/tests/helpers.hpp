#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "gigp/tensor.hpp"

namespace testutil {

inline gigp::nn::Tensor randn(std::vector<std::size_t> shape, std::mt19937_64& rng,
                              double scale = 1.0) {
  gigp::nn::Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, scale);
  for (double& v : t.data) v = dist(rng);
  return t;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline bool bitwise_equal(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace testutil
