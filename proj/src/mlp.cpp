#include "gigp/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace gigp::nn {

Mlp Mlp::make(const std::vector<std::size_t>& widths, std::mt19937_64& rng,
              bool zero_last) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp: need in and out width");
  Mlp m;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fin = widths[l], fout = widths[l + 1];
    const bool last = l + 2 == widths.size();
    Layer layer;
    if (last && zero_last) {
      layer.w = Tensor::zeros({fin, fout});
    } else {
      const double s = std::sqrt(6.0 / static_cast<double>(fin + fout));
      layer.w = Tensor::uniform({fin, fout}, s, rng);
    }
    layer.b = Tensor::zeros({fout});
    layer.w.set_requires_grad(true);
    layer.b.set_requires_grad(true);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

Var Mlp::apply(Tape& tape, Var x) {
  Var h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Var w = tape.leaf(layers[l].w);
    Var b = tape.leaf(layers[l].b);
    h = tape.add_rowvec(tape.matmul(h, w), b);
    if (l + 1 < layers.size()) h = tape.swish(h);
  }
  return h;
}

void Mlp::collect_params(const std::string& prefix,
                         std::vector<std::pair<std::string, Tensor*>>& out) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out.emplace_back(prefix + ".l" + std::to_string(l) + ".w", &layers[l].w);
    out.emplace_back(prefix + ".l" + std::to_string(l) + ".b", &layers[l].b);
  }
}

}  // namespace gigp::nn
