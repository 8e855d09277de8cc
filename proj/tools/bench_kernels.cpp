// Wall-clock comparison of the OpenMP kernels against the serial reference
// implementations. Times are best-of-three. The last column checks agreement:
// the tensor kernels must match bit for bit; the two eigh_sym orderings differ
// above 128 rows, so their eigenvalues agree only to rounding.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "pbt/eigh.hpp"
#include "pbt/kernels.hpp"
#include "pbt/mat.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace pbt;

namespace {

std::mt19937 rng(12345);

CMat random_cmat(std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CMat a(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = cplx(u(rng), u(rng));
  return a;
}

RMat random_symmetric(std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RMat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = u(rng);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

template <typename F>
double best_of_three_ms(F&& f) {
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

double max_diff(const CMat& a, const CMat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

void report(const char* name, const char* size, double serial_ms, double parallel_ms,
            double diff) {
  std::printf("%-16s %-14s %10.2f %10.2f %8.2fx   %.1e\n", name, size, serial_ms, parallel_ms,
              serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n\n");
#endif
  std::printf("%-16s %-14s %10s %10s %9s   %s\n", "kernel", "size", "serial ms", "openmp ms",
              "speedup", "max |diff|");

  {
    const CMat a = random_cmat(192, 192), b = random_cmat(192, 192);
    CMat rs, rp;
    const double ts = best_of_three_ms([&] { rs = ref::matmul(a, b); });
    const double tp = best_of_three_ms([&] { rp = matmul(a, b); });
    report("matmul", "192x192", ts, tp, max_diff(rs, rp));
  }
  {
    const CMat a = random_cmat(32, 32), b = random_cmat(32, 32);
    CMat rs, rp;
    const double ts = best_of_three_ms([&] { rs = ref::kron(a, b); });
    const double tp = best_of_three_ms([&] { rp = kron(a, b); });
    report("kron", "32x32(x)32x32", ts, tp, max_diff(rs, rp));
  }

  const std::vector<int> dims(10, 2);  // ten qubit factors, total dimension 1024
  const CMat state = random_cmat(1024, 1024);
  {
    CMat rs, rp;
    const double ts =
        best_of_three_ms([&] { rs = ref::partial_trace(state, dims, {0, 2, 4, 6, 8}); });
    const double tp = best_of_three_ms([&] { rp = partial_trace(state, dims, {0, 2, 4, 6, 8}); });
    report("partial_trace", "2^10 keep 5", ts, tp, max_diff(rs, rp));
  }
  {
    const std::vector<int> reversal{9, 8, 7, 6, 5, 4, 3, 2, 1, 0};
    CMat rs, rp;
    const double ts = best_of_three_ms([&] { rs = ref::permute_factors(state, dims, reversal); });
    const double tp = best_of_three_ms([&] { rp = permute_factors(state, dims, reversal); });
    report("permute_factors", "2^10 reverse", ts, tp, max_diff(rs, rp));
  }
  {
    const CMat op = random_cmat(4, 4);
    CMat rs, rp;
    const double ts = best_of_three_ms([&] { rs = ref::apply_left(op, {4, 5}, state, dims); });
    const double tp = best_of_three_ms([&] { rp = apply_left(op, {4, 5}, state, dims); });
    report("apply_left", "4x4 on 2^10", ts, tp, max_diff(rs, rp));
  }
  {
    const RMat a = random_symmetric(192);  // above the parallel-ordering threshold
    RealEigenDecomposition ds, dp;
    const double ts = best_of_three_ms([&] { ds = ref::eigh_sym(a); });
    const double tp = best_of_three_ms([&] { dp = eigh_sym(a); });
    double diff = 0.0;
    for (std::size_t i = 0; i < ds.eigenvalues.size(); ++i)
      diff = std::max(diff, std::abs(ds.eigenvalues[i] - dp.eigenvalues[i]));
    report("eigh_sym", "192x192", ts, tp, diff);
  }
  return 0;
}
