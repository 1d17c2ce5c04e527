// Times the serial reference kernels against the OpenMP ones on
// representative workloads and verifies the outputs stay bitwise identical.

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "gigp/kernels.hpp"

namespace k = gigp::kernels;

namespace {

std::vector<double> randv(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

template <class F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  return best;
}

bool equal(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

struct Row {
  const char* name;
  double serial_ms;
  double omp_ms;
  bool bitwise;
};

template <class F>
Row bench(const char* name, int reps, std::vector<double>& out, F&& fn) {
  Row row{name, 0, 0, false};
  k::set_mode(k::Mode::Serial);
  row.serial_ms = time_best_of(reps, fn) * 1e3;
  const std::vector<double> serial_out = out;
  k::set_mode(k::Mode::OpenMP);
  row.omp_ms = time_best_of(reps, fn) * 1e3;
  row.bitwise = equal(serial_out, out);
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::atoi(argv[1]);
  std::mt19937_64 rng(1);

  std::vector<Row> rows;

  {
    const std::size_t m = 256, kk = 256, n = 256;
    const auto a = randv(m * kk, rng), b = randv(kk * n, rng);
    std::vector<double> c(m * n);
    rows.push_back(bench("matmul 256x256x256", reps, c, [&] {
      k::matmul_nn(m, kk, n, a.data(), b.data(), c.data());
    }));
  }
  {
    const std::size_t rows_n = 65536, out = 16, in = 16;
    const auto w = randv(rows_n * out * in, rng), f = randv(rows_n * in, rng);
    std::vector<double> y(rows_n * out);
    rows.push_back(bench("block_matvec 64k x 16x16", reps, y, [&] {
      k::block_matvec(rows_n, out, in, w.data(), f.data(), y.data());
    }));
  }
  {
    const std::size_t n = 2000, kk = 32;
    const auto pts = randv(n * 3, rng);
    std::vector<std::size_t> idx(n * kk);
    std::vector<double> marker(1, 0.0);
    auto dist = [&](std::size_t i, std::size_t j) {
      double s = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double diff = pts[i * 3 + d] - pts[j * 3 + d];
        s += diff * diff;
      }
      return std::sqrt(s);
    };
    rows.push_back(bench("knn n=2000 k=32", reps, marker, [&] {
      k::knn_brute_force(n, kk, dist, idx.data());
      marker[0] = static_cast<double>(idx[17]);
    }));
  }
  {
    const std::size_t nseg = 4096, per = 16, cols = 32;
    std::vector<std::size_t> offsets{0};
    for (std::size_t s = 0; s < nseg; ++s) offsets.push_back(offsets.back() + per);
    const auto x = randv(nseg * per * cols, rng);
    std::vector<double> y(nseg * cols);
    rows.push_back(bench("segment_mean 64k rows", reps, y, [&] {
      k::segment_mean(nseg, cols, offsets.data(), x.data(), y.data());
    }));
  }
  {
    const std::size_t n = 1 << 22;
    const auto x = randv(n, rng);
    std::vector<double> y(n);
    rows.push_back(bench("swish 4M", reps, y, [&] {
      k::swish(n, x.data(), y.data());
    }));
  }

  std::printf("threads available: %d\n", omp_get_max_threads());
  std::printf("%-26s %12s %12s %9s %8s\n", "kernel", "serial ms", "openmp ms",
              "speedup", "bitwise");
  for (const auto& r : rows)
    std::printf("%-26s %12.3f %12.3f %8.2fx %8s\n", r.name, r.serial_ms,
                r.omp_ms, r.serial_ms / r.omp_ms, r.bitwise ? "yes" : "NO");
  for (const auto& r : rows)
    if (!r.bitwise) return 1;
  return 0;
}
