#pragma once

#include <cstddef>
#include <vector>

#include "gigp/tensor.hpp"

namespace gigp::nn {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is already
// a topological order, so backward() is a single reverse sweep that visits
// each node exactly once. Leaves bound to external tensors accumulate their
// gradients into Tensor::grad; calling backward twice without zero_grad
// accumulates, as the optimizer-facing contract requires.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Binds an external tensor (parameter or input). Its current values are
  // captured; gradients flow back into t.grad when t.requires_grad is set.
  Var leaf(Tensor& t);
  // An owned constant; never receives gradient.
  Var constant(Tensor t);

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // a (m x n) plus a length-n vector broadcast over rows
  Var add_rowvec(Var a, Var b);
  Var scale(Var a, double c);
  // elementwise product with a 1-element tensor, both sides differentiable
  Var scale_by(Var a, Var s);
  Var swish(Var a);
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);
  Var sum(Var a);
  Var mean(Var a);
  Var gather_rows(Var a, std::vector<std::size_t> idx);
  Var concat_cols(Var a, Var b);
  // w (P x out*in), f (P x in) -> (P x out); per-row matrix-vector product
  Var block_matvec(Var w, Var f, std::size_t out_channels);
  // x (P x c) -> (S x c) where segment s covers rows [offsets[s], offsets[s+1])
  Var segment_mean(Var x, std::vector<std::size_t> offsets);

  const Tensor& value(Var v) const;
  std::size_t size() const;

  // loss must have exactly one element
  void backward(Var loss);
  // gradient buffer of any node after the last backward (test hook)
  const std::vector<double>& grad_of(Var v) const;

 private:
  struct Node;
  int push(Node n);
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
};

}  // namespace gigp::nn
