#pragma once

#include <random>
#include <string>
#include <vector>

#include "gigp/tape.hpp"

namespace gigp::nn {

// Fully connected stack with swish between layers and a linear output layer.
struct Mlp {
  struct Layer {
    Tensor w;  // in x out
    Tensor b;  // out
  };
  std::vector<Layer> layers;

  // widths = {in, hidden..., out}; zero_last zeroes the output layer so the
  // surrounding module starts as an exact identity/no-op.
  static Mlp make(const std::vector<std::size_t>& widths, std::mt19937_64& rng,
                  bool zero_last = false);

  std::size_t in_dim() const { return layers.front().w.shape[0]; }
  std::size_t out_dim() const { return layers.back().w.shape[1]; }

  Var apply(Tape& tape, Var x);
  void collect_params(const std::string& prefix,
                      std::vector<std::pair<std::string, Tensor*>>& out);
};

}  // namespace gigp::nn
