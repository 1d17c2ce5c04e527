#include "gigp/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gigp::nn {

namespace {
std::size_t shape_numel(const std::vector<std::size_t>& shp) {
  std::size_t n = 1;
  for (std::size_t d : shp) n *= d;
  return shp.empty() ? 0 : n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shp, double fill)
    : shape(std::move(shp)), data(shape_numel(shape), fill) {}

void Tensor::set_requires_grad(bool b) {
  requires_grad = b;
  if (b)
    grad.assign(data.size(), 0.0);
  else
    grad.clear();
}

void Tensor::zero_grad() { grad.assign(data.size(), 0.0); }

Tensor Tensor::zeros(std::vector<std::size_t> shp) { return Tensor(std::move(shp)); }

Tensor Tensor::full(std::vector<std::size_t> shp, double v) {
  return Tensor(std::move(shp), v);
}

Tensor Tensor::scalar(double v) { return Tensor({1}, v); }

Tensor Tensor::row(std::vector<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.data = std::move(v);
  return t;
}

Tensor Tensor::from(std::vector<std::size_t> shp, std::vector<double> v) {
  if (shape_numel(shp) != v.size())
    throw std::invalid_argument("Tensor::from: data length does not match shape");
  Tensor t;
  t.shape = std::move(shp);
  t.data = std::move(v);
  return t;
}

Tensor Tensor::uniform(std::vector<std::size_t> shp, double s,
                       std::mt19937_64& rng) {
  Tensor t(std::move(shp));
  std::uniform_real_distribution<double> dist(-s, s);
  for (double& v : t.data) v = dist(rng);
  return t;
}

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < t.shape.size(); ++i)
    os << (i ? "," : "") << t.shape[i];
  os << ")";
  return os.str();
}

}  // namespace gigp::nn
