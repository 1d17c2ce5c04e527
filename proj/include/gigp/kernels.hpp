#pragma once

#include <cstddef>
#include <functional>
#include <vector>

// Dense numeric kernels used by the tape engine and the neighborhood search.
// Every kernel has a serial reference implementation and an OpenMP one; the
// parallel loops only ever split over independent output elements, each of
// which accumulates in a fixed serial order, so the two modes produce
// bitwise-identical results. test_kernels.cpp asserts this and
// tools/bench_kernels.cpp compares their throughput.

namespace gigp::kernels {

enum class Mode { Serial, OpenMP };

Mode mode();
void set_mode(Mode m);

// Caps the OpenMP thread pool; n <= 0 leaves the runtime default.
void set_threads(int n);

namespace detail {
template <class F>
void par_for(std::size_t n, F&& f) {
  if (mode() == Mode::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      f(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) f(i);
  }
}
}  // namespace detail

// C = A(m x k) * B(k x n)
void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c);
// C += A(m x n) * B(k x n)^T, C is m x k
void matmul_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c);
// C += A(m x k)^T * B(m x n), C is k x n
void matmul_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a,
                   const double* b, double* c);

// y[p, o] = sum_j w[p, o*in + j] * f[p, j]
void block_matvec(std::size_t rows, std::size_t out, std::size_t in,
                  const double* w, const double* f, double* y);
void block_matvec_bw_w(std::size_t rows, std::size_t out, std::size_t in,
                       const double* g, const double* f, double* dw);
void block_matvec_bw_f(std::size_t rows, std::size_t out, std::size_t in,
                       const double* g, const double* w, double* df);

// y[s, :] = mean of x rows in [offsets[s], offsets[s+1])
void segment_mean(std::size_t nseg, std::size_t cols,
                  const std::size_t* offsets, const double* x, double* y);
// dx[p, :] += g[row2seg[p], :] / seglen[row2seg[p]]
void segment_mean_bw(std::size_t rows, std::size_t cols,
                     const std::size_t* row2seg, const std::size_t* seglen,
                     const double* g, double* dx);

void swish(std::size_t n, const double* x, double* y);
void swish_bw(std::size_t n, const double* x, const double* g, double* dx);

void add(std::size_t n, const double* a, const double* b, double* y);
void sub(std::size_t n, const double* a, const double* b, double* y);
void mul(std::size_t n, const double* a, const double* b, double* y);
void scale(std::size_t n, double s, const double* x, double* y);
// y += s * x
void axpy_acc(std::size_t n, double s, const double* x, double* y);
// y += a .* b
void hadamard_acc(std::size_t n, const double* a, const double* b, double* y);

// Exact brute-force k-nearest-neighbors. dist(i, j) must be symmetric in
// effect but is only ever called as dist(target, other). For each target the
// k indices are the smallest by (distance, index), always containing the
// target itself, and are returned sorted ascending by index.
void knn_brute_force(std::size_t n, std::size_t k,
                     const std::function<double(std::size_t, std::size_t)>& dist,
                     std::size_t* out_idx);

}  // namespace gigp::kernels
