#include "gigp/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace gigp::kernels {

namespace {
std::atomic<Mode> g_mode{Mode::OpenMP};
}

Mode mode() { return g_mode.load(std::memory_order_relaxed); }
void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

void matmul_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c) {
  detail::par_for(m, [&](std::size_t i) {
    double* crow = c + i * n;
    std::fill(crow, crow + n, 0.0);
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  });
}

void matmul_nt_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
                   const double* b, double* c) {
  detail::par_for(m, [&](std::size_t i) {
    const double* arow = a + i * n;
    double* crow = c + i * k;
    for (std::size_t j = 0; j < k; ++j) {
      const double* brow = b + j * n;
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  });
}

void matmul_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a,
                   const double* b, double* c) {
  detail::par_for(k, [&](std::size_t i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < m; ++p) {
      const double av = a[p * k + i];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  });
}

void block_matvec(std::size_t rows, std::size_t out, std::size_t in,
                  const double* w, const double* f, double* y) {
  detail::par_for(rows, [&](std::size_t p) {
    const double* wrow = w + p * out * in;
    const double* frow = f + p * in;
    double* yrow = y + p * out;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = 0.0;
      const double* wp = wrow + o * in;
      for (std::size_t j = 0; j < in; ++j) acc += wp[j] * frow[j];
      yrow[o] = acc;
    }
  });
}

void block_matvec_bw_w(std::size_t rows, std::size_t out, std::size_t in,
                       const double* g, const double* f, double* dw) {
  detail::par_for(rows, [&](std::size_t p) {
    const double* grow = g + p * out;
    const double* frow = f + p * in;
    double* dwrow = dw + p * out * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double gv = grow[o];
      double* dwp = dwrow + o * in;
      for (std::size_t j = 0; j < in; ++j) dwp[j] += gv * frow[j];
    }
  });
}

void block_matvec_bw_f(std::size_t rows, std::size_t out, std::size_t in,
                       const double* g, const double* w, double* df) {
  detail::par_for(rows, [&](std::size_t p) {
    const double* grow = g + p * out;
    const double* wrow = w + p * out * in;
    double* dfrow = df + p * in;
    for (std::size_t j = 0; j < in; ++j) {
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o) acc += grow[o] * wrow[o * in + j];
      dfrow[j] += acc;
    }
  });
}

void segment_mean(std::size_t nseg, std::size_t cols,
                  const std::size_t* offsets, const double* x, double* y) {
  detail::par_for(nseg, [&](std::size_t s) {
    const std::size_t lo = offsets[s], hi = offsets[s + 1];
    double* yrow = y + s * cols;
    std::fill(yrow, yrow + cols, 0.0);
    for (std::size_t p = lo; p < hi; ++p) {
      const double* xrow = x + p * cols;
      for (std::size_t j = 0; j < cols; ++j) yrow[j] += xrow[j];
    }
    const double inv = hi > lo ? 1.0 / static_cast<double>(hi - lo) : 0.0;
    for (std::size_t j = 0; j < cols; ++j) yrow[j] *= inv;
  });
}

void segment_mean_bw(std::size_t rows, std::size_t cols,
                     const std::size_t* row2seg, const std::size_t* seglen,
                     const double* g, double* dx) {
  detail::par_for(rows, [&](std::size_t p) {
    const std::size_t s = row2seg[p];
    const double inv = 1.0 / static_cast<double>(seglen[s]);
    const double* grow = g + s * cols;
    double* dxrow = dx + p * cols;
    for (std::size_t j = 0; j < cols; ++j) dxrow[j] += grow[j] * inv;
  });
}

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

void swish(std::size_t n, const double* x, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] = x[i] * sigmoid(x[i]); });
}

void swish_bw(std::size_t n, const double* x, const double* g, double* dx) {
  detail::par_for(n, [&](std::size_t i) {
    const double s = sigmoid(x[i]);
    dx[i] += g[i] * (s * (1.0 + x[i] * (1.0 - s)));
  });
}

void add(std::size_t n, const double* a, const double* b, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] = a[i] + b[i]; });
}

void sub(std::size_t n, const double* a, const double* b, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] = a[i] - b[i]; });
}

void mul(std::size_t n, const double* a, const double* b, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] = a[i] * b[i]; });
}

void scale(std::size_t n, double s, const double* x, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] = s * x[i]; });
}

void axpy_acc(std::size_t n, double s, const double* x, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] += s * x[i]; });
}

void hadamard_acc(std::size_t n, const double* a, const double* b, double* y) {
  detail::par_for(n, [&](std::size_t i) { y[i] += a[i] * b[i]; });
}

void knn_brute_force(std::size_t n, std::size_t k,
                     const std::function<double(std::size_t, std::size_t)>& dist,
                     std::size_t* out_idx) {
  if (k > n) throw std::invalid_argument("knn: k exceeds point count");
  detail::par_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;  // target is forced in below
      d.emplace_back(dist(i, j), j);
    }
    const std::size_t rest = k - 1;
    std::partial_sort(d.begin(), d.begin() + rest, d.end());
    std::size_t* row = out_idx + i * k;
    row[0] = i;
    for (std::size_t j = 0; j < rest; ++j) row[j + 1] = d[j].second;
    std::sort(row, row + k);
  });
}

}  // namespace gigp::kernels
