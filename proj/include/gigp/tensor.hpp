#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gigp::nn {

// Dense 64-bit tensor. Rank is 1 or 2 everywhere in this library; a rank-1
// tensor behaves as a single row where a matrix is expected.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // same length as data once allocated

  Tensor() = default;
  Tensor(std::vector<std::size_t> shp, double fill = 0.0);

  std::size_t numel() const { return data.size(); }
  std::size_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }

  double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  void set_requires_grad(bool b);
  void zero_grad();
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  static Tensor zeros(std::vector<std::size_t> shp);
  static Tensor full(std::vector<std::size_t> shp, double v);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> v);
  static Tensor from(std::vector<std::size_t> shp, std::vector<double> v);
  // U(-s, s) entries
  static Tensor uniform(std::vector<std::size_t> shp, double s,
                        std::mt19937_64& rng);
};

std::string shape_str(const Tensor& t);

}  // namespace gigp::nn
