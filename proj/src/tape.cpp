#include "gigp/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gigp/kernels.hpp"

namespace gigp::nn {

enum class Op {
  Leaf,
  Const,
  MatMul,
  Transpose,
  Add,
  Sub,
  Mul,
  AddRowVec,
  Scale,
  ScaleBy,
  Swish,
  SoftmaxRows,
  LogSoftmaxRows,
  Sum,
  Mean,
  GatherRows,
  ConcatCols,
  BlockMatvec,
  SegmentMean,
};

struct Tape::Node {
  Op op;
  int a = -1, b = -1;
  Tensor val;
  bool needs_grad = false;
  double c = 0.0;
  std::size_t out_ch = 0;
  std::vector<std::size_t> idx;      // GatherRows targets / SegmentMean offsets
  std::vector<std::size_t> row2seg;  // SegmentMean backward
  std::vector<std::size_t> seglen;
  Tensor* bound = nullptr;
};

namespace {
[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              shape_str(a) + " and " + shape_str(b));
}
}  // namespace

Tape::Tape() = default;
Tape::~Tape() = default;

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::leaf(Tensor& t) {
  Node n;
  n.op = Op::Leaf;
  n.val = t;  // snapshot of current values
  n.needs_grad = t.requires_grad;
  n.bound = &t;
  return {push(std::move(n))};
}

Var Tape::constant(Tensor t) {
  Node n;
  n.op = Op::Const;
  n.val = std::move(t);
  return {push(std::move(n))};
}

const Tensor& Tape::value(Var v) const { return nodes_.at(v.id).val; }

std::size_t Tape::size() const { return nodes_.size(); }

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) shape_error("matmul", A, B);
  Node n;
  n.op = Op::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.val = Tensor::zeros({A.rows(), B.cols()});
  kernels::matmul_nn(A.rows(), A.cols(), B.cols(), A.data.data(), B.data.data(),
                     n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::transpose(Var a) {
  const Tensor& A = value(a);
  Node n;
  n.op = Op::Transpose;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  n.val = Tensor::zeros({A.cols(), A.rows()});
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) n.val.at(j, i) = A.at(i, j);
  return {push(std::move(n))};
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.numel() != B.numel()) shape_error("add", A, B);
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  kernels::add(A.numel(), A.data.data(), B.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::sub(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.numel() != B.numel()) shape_error("sub", A, B);
  Node n;
  n.op = Op::Sub;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  kernels::sub(A.numel(), A.data.data(), B.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.numel() != B.numel()) shape_error("mul", A, B);
  Node n;
  n.op = Op::Mul;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  kernels::mul(A.numel(), A.data.data(), B.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::add_rowvec(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (B.numel() != A.cols()) shape_error("add_rowvec", A, B);
  Node n;
  n.op = Op::AddRowVec;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  const std::size_t cols = A.cols();
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      n.val.data[i * cols + j] = A.data[i * cols + j] + B.data[j];
  return {push(std::move(n))};
}

Var Tape::scale(Var a, double c) {
  const Tensor& A = value(a);
  Node n;
  n.op = Op::Scale;
  n.a = a.id;
  n.c = c;
  n.needs_grad = nodes_[a.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  kernels::scale(A.numel(), c, A.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::scale_by(Var a, Var s) {
  const Tensor& A = value(a);
  const Tensor& S = value(s);
  if (S.numel() != 1) shape_error("scale_by", A, S);
  Node n;
  n.op = Op::ScaleBy;
  n.a = a.id;
  n.b = s.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[s.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  kernels::scale(A.numel(), S.data[0], A.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::swish(Var a) {
  const Tensor& A = value(a);
  Node n;
  n.op = Op::Swish;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  kernels::swish(A.numel(), A.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::softmax_rows(Var a) {
  const Tensor& A = value(a);
  Node n;
  n.op = Op::SoftmaxRows;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  const std::size_t cols = A.cols();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* x = A.data.data() + i * cols;
    double* y = n.val.data.data() + i * cols;
    double mx = x[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= z;
  }
  return {push(std::move(n))};
}

Var Tape::log_softmax_rows(Var a) {
  const Tensor& A = value(a);
  Node n;
  n.op = Op::LogSoftmaxRows;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  n.val = Tensor::zeros(A.shape);
  const std::size_t cols = A.cols();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* x = A.data.data() + i * cols;
    double* y = n.val.data.data() + i * cols;
    double mx = x[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(x[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < cols; ++j) y[j] = x[j] - lse;
  }
  return {push(std::move(n))};
}

Var Tape::sum(Var a) {
  const Tensor& A = value(a);
  Node n;
  n.op = Op::Sum;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  double acc = 0.0;
  for (double v : A.data) acc += v;
  n.val = Tensor::scalar(acc);
  return {push(std::move(n))};
}

Var Tape::mean(Var a) {
  const Tensor& A = value(a);
  if (A.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  Node n;
  n.op = Op::Mean;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  double acc = 0.0;
  for (double v : A.data) acc += v;
  n.val = Tensor::scalar(acc / static_cast<double>(A.numel()));
  return {push(std::move(n))};
}

Var Tape::gather_rows(Var a, std::vector<std::size_t> idx) {
  const Tensor& A = value(a);
  for (std::size_t i : idx)
    if (i >= A.rows()) throw std::invalid_argument("gather_rows: index out of range");
  Node n;
  n.op = Op::GatherRows;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  const std::size_t cols = A.cols();
  n.val = Tensor::zeros({idx.size(), cols});
  for (std::size_t p = 0; p < idx.size(); ++p)
    std::copy_n(A.data.data() + idx[p] * cols, cols,
                n.val.data.data() + p * cols);
  n.idx = std::move(idx);
  return {push(std::move(n))};
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rows() != B.rows()) shape_error("concat_cols", A, B);
  Node n;
  n.op = Op::ConcatCols;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  const std::size_t ca = A.cols(), cb = B.cols();
  n.val = Tensor::zeros({A.rows(), ca + cb});
  for (std::size_t i = 0; i < A.rows(); ++i) {
    std::copy_n(A.data.data() + i * ca, ca, n.val.data.data() + i * (ca + cb));
    std::copy_n(B.data.data() + i * cb, cb,
                n.val.data.data() + i * (ca + cb) + ca);
  }
  return {push(std::move(n))};
}

Var Tape::block_matvec(Var w, Var f, std::size_t out_channels) {
  const Tensor& W = value(w);
  const Tensor& F = value(f);
  if (W.rows() != F.rows() || W.cols() != out_channels * F.cols())
    shape_error("block_matvec", W, F);
  Node n;
  n.op = Op::BlockMatvec;
  n.a = w.id;
  n.b = f.id;
  n.out_ch = out_channels;
  n.needs_grad = nodes_[w.id].needs_grad || nodes_[f.id].needs_grad;
  n.val = Tensor::zeros({W.rows(), out_channels});
  kernels::block_matvec(W.rows(), out_channels, F.cols(), W.data.data(),
                        F.data.data(), n.val.data.data());
  return {push(std::move(n))};
}

Var Tape::segment_mean(Var x, std::vector<std::size_t> offsets) {
  const Tensor& X = value(x);
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != X.rows())
    throw std::invalid_argument("segment_mean: bad offsets");
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
    if (offsets[s] > offsets[s + 1])
      throw std::invalid_argument("segment_mean: offsets not nondecreasing");
  Node n;
  n.op = Op::SegmentMean;
  n.a = x.id;
  n.needs_grad = nodes_[x.id].needs_grad;
  const std::size_t nseg = offsets.size() - 1;
  n.val = Tensor::zeros({nseg, X.cols()});
  kernels::segment_mean(nseg, X.cols(), offsets.data(), X.data.data(),
                        n.val.data.data());
  n.row2seg.resize(X.rows());
  n.seglen.resize(nseg);
  for (std::size_t s = 0; s < nseg; ++s) {
    n.seglen[s] = offsets[s + 1] - offsets[s];
    for (std::size_t p = offsets[s]; p < offsets[s + 1]; ++p) n.row2seg[p] = s;
  }
  n.idx = std::move(offsets);
  return {push(std::move(n))};
}

const std::vector<double>& Tape::grad_of(Var v) const { return grads_.at(v.id); }

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("backward: invalid loss var");
  if (value(loss).numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar");

  grads_.assign(nodes_.size(), {});
  auto g = [&](int id) -> std::vector<double>& {
    if (grads_[id].empty()) grads_[id].assign(nodes_[id].val.numel(), 0.0);
    return grads_[id];
  };
  g(loss.id)[0] = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || grads_[id].empty()) continue;
    const std::vector<double>& go = grads_[id];
    const bool need_a = n.a >= 0 && nodes_[n.a].needs_grad;
    const bool need_b = n.b >= 0 && nodes_[n.b].needs_grad;
    switch (n.op) {
      case Op::Leaf:
        if (n.bound && n.bound->requires_grad) {
          if (n.bound->grad.size() != n.bound->data.size())
            n.bound->grad.assign(n.bound->data.size(), 0.0);
          kernels::axpy_acc(go.size(), 1.0, go.data(), n.bound->grad.data());
        }
        break;
      case Op::Const:
        break;
      case Op::MatMul: {
        const Tensor& A = nodes_[n.a].val;
        const Tensor& B = nodes_[n.b].val;
        if (need_a)
          kernels::matmul_nt_acc(A.rows(), B.cols(), A.cols(), go.data(),
                                 B.data.data(), g(n.a).data());
        if (need_b)
          kernels::matmul_tn_acc(A.rows(), A.cols(), B.cols(), A.data.data(),
                                 go.data(), g(n.b).data());
        break;
      }
      case Op::Transpose: {
        if (need_a) {
          const Tensor& A = nodes_[n.a].val;
          std::vector<double>& ga = g(n.a);
          for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t j = 0; j < A.cols(); ++j)
              ga[i * A.cols() + j] += go[j * A.rows() + i];
        }
        break;
      }
      case Op::Add:
        if (need_a) kernels::axpy_acc(go.size(), 1.0, go.data(), g(n.a).data());
        if (need_b) kernels::axpy_acc(go.size(), 1.0, go.data(), g(n.b).data());
        break;
      case Op::Sub:
        if (need_a) kernels::axpy_acc(go.size(), 1.0, go.data(), g(n.a).data());
        if (need_b) kernels::axpy_acc(go.size(), -1.0, go.data(), g(n.b).data());
        break;
      case Op::Mul:
        if (need_a)
          kernels::hadamard_acc(go.size(), go.data(), nodes_[n.b].val.data.data(),
                                g(n.a).data());
        if (need_b)
          kernels::hadamard_acc(go.size(), go.data(), nodes_[n.a].val.data.data(),
                                g(n.b).data());
        break;
      case Op::AddRowVec: {
        if (need_a) kernels::axpy_acc(go.size(), 1.0, go.data(), g(n.a).data());
        if (need_b) {
          const std::size_t cols = n.val.cols();
          std::vector<double>& gb = g(n.b);
          for (std::size_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n.val.rows(); ++i)
              acc += go[i * cols + j];
            gb[j] += acc;
          }
        }
        break;
      }
      case Op::Scale:
        if (need_a) kernels::axpy_acc(go.size(), n.c, go.data(), g(n.a).data());
        break;
      case Op::ScaleBy: {
        const double s = nodes_[n.b].val.data[0];
        if (need_a) kernels::axpy_acc(go.size(), s, go.data(), g(n.a).data());
        if (need_b) {
          const std::vector<double>& av = nodes_[n.a].val.data;
          double acc = 0.0;
          for (std::size_t i = 0; i < go.size(); ++i) acc += go[i] * av[i];
          g(n.b)[0] += acc;
        }
        break;
      }
      case Op::Swish:
        if (need_a)
          kernels::swish_bw(go.size(), nodes_[n.a].val.data.data(), go.data(),
                            g(n.a).data());
        break;
      case Op::SoftmaxRows: {
        if (need_a) {
          const std::size_t cols = n.val.cols();
          std::vector<double>& ga = g(n.a);
          for (std::size_t i = 0; i < n.val.rows(); ++i) {
            const double* y = n.val.data.data() + i * cols;
            const double* gr = go.data() + i * cols;
            double dot = 0.0;
            for (std::size_t j = 0; j < cols; ++j) dot += gr[j] * y[j];
            for (std::size_t j = 0; j < cols; ++j)
              ga[i * cols + j] += y[j] * (gr[j] - dot);
          }
        }
        break;
      }
      case Op::LogSoftmaxRows: {
        if (need_a) {
          const std::size_t cols = n.val.cols();
          std::vector<double>& ga = g(n.a);
          for (std::size_t i = 0; i < n.val.rows(); ++i) {
            const double* y = n.val.data.data() + i * cols;
            const double* gr = go.data() + i * cols;
            double gsum = 0.0;
            for (std::size_t j = 0; j < cols; ++j) gsum += gr[j];
            for (std::size_t j = 0; j < cols; ++j)
              ga[i * cols + j] += gr[j] - std::exp(y[j]) * gsum;
          }
        }
        break;
      }
      case Op::Sum:
        if (need_a) {
          std::vector<double>& ga = g(n.a);
          for (double& v : ga) v += go[0];
        }
        break;
      case Op::Mean:
        if (need_a) {
          std::vector<double>& ga = g(n.a);
          const double s = go[0] / static_cast<double>(ga.size());
          for (double& v : ga) v += s;
        }
        break;
      case Op::GatherRows: {
        if (need_a) {
          const std::size_t cols = n.val.cols();
          std::vector<double>& ga = g(n.a);
          // serial scatter-add: multiple gathered rows may share a source
          for (std::size_t p = 0; p < n.idx.size(); ++p)
            for (std::size_t j = 0; j < cols; ++j)
              ga[n.idx[p] * cols + j] += go[p * cols + j];
        }
        break;
      }
      case Op::ConcatCols: {
        const std::size_t ca = nodes_[n.a].val.cols();
        const std::size_t cb = nodes_[n.b].val.cols();
        const std::size_t rows = n.val.rows();
        if (need_a) {
          std::vector<double>& ga = g(n.a);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < ca; ++j)
              ga[i * ca + j] += go[i * (ca + cb) + j];
        }
        if (need_b) {
          std::vector<double>& gb = g(n.b);
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cb; ++j)
              gb[i * cb + j] += go[i * (ca + cb) + ca + j];
        }
        break;
      }
      case Op::BlockMatvec: {
        const Tensor& W = nodes_[n.a].val;
        const Tensor& F = nodes_[n.b].val;
        if (need_a)
          kernels::block_matvec_bw_w(W.rows(), n.out_ch, F.cols(), go.data(),
                                     F.data.data(), g(n.a).data());
        if (need_b)
          kernels::block_matvec_bw_f(W.rows(), n.out_ch, F.cols(), go.data(),
                                     W.data.data(), g(n.b).data());
        break;
      }
      case Op::SegmentMean: {
        if (need_a) {
          const Tensor& X = nodes_[n.a].val;
          kernels::segment_mean_bw(X.rows(), X.cols(), n.row2seg.data(),
                                   n.seglen.data(), go.data(), g(n.a).data());
        }
        break;
      }
    }
  }
}

}  // namespace gigp::nn
