#include "pbt/eigh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "pbt/kernels.hpp"

namespace pbt {

namespace {

std::atomic<double> g_psd_tol{1e-9};

// ---------------------------------------------------------------------------
// Real-symmetric Jacobi core.
//
// One rotation (p,q) is applied in two phases: rows p,q first (J^T A), then
// columns p,q (.. J). Each phase touches only those two rows/columns, so
// rotations on disjoint index pairs commute exactly and can run in parallel.
// ---------------------------------------------------------------------------

struct PairRot {
  int p, q;
  double c, s, t;
};

// Rotation zeroing a_pq, Golub & Van Loan style. Uses the symmetrized
// off-diagonal entry so phase drift between the two triangles cannot bias it.
bool make_rotation(const RMat& a, int p, int q, double thresh, PairRot& r) {
  const double apq = 0.5 * (a(p, q) + a(q, p));
  if (std::abs(apq) <= thresh) return false;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  r.p = p;
  r.q = q;
  r.c = 1.0 / std::sqrt(t * t + 1.0);
  r.s = t * r.c;
  r.t = t;
  return true;
}

void rotate_rows(RMat& a, const PairRot& r) {
  const std::size_t n = a.cols();
  double* rp = a.row(r.p);
  double* rq = a.row(r.q);
  for (std::size_t i = 0; i < n; ++i) {
    const double tp = rp[i], tq = rq[i];
    rp[i] = r.c * tp - r.s * tq;
    rq[i] = r.s * tp + r.c * tq;
  }
}

// column rotations of a whole round applied to one row; keeps the pass over
// the matrix contiguous
void rotate_cols_in_row(double* row, const std::vector<PairRot>& rots) {
  for (const PairRot& r : rots) {
    const double tp = row[r.p], tq = row[r.q];
    row[r.p] = r.c * tp - r.s * tq;
    row[r.q] = r.s * tp + r.c * tq;
  }
}

double off_diag_norm(const RMat& a) {
  const std::size_t n = a.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = a.row(i);
    double racc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) racc += row[j] * row[j];
    acc += racc;
  }
  return std::sqrt(acc);
}

constexpr int kMaxSweeps = 60;
constexpr std::size_t kParallelMinDim = 128;

// vt holds eigenvector candidates as ROWS (the transpose of the usual V), so
// the accumulation V <- V J becomes a contiguous two-row update.
void apply_round(RMat& a, RMat& vt, std::vector<PairRot>& rots, bool parallel) {
  if (rots.empty()) return;
  const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(rots.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::ptrdiff_t k = 0; k < na; ++k) rotate_rows(a, rots[k]);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) rotate_cols_in_row(a.row(i), rots);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::ptrdiff_t k = 0; k < na; ++k) rotate_rows(vt, rots[k]);
#ifndef _OPENMP
  (void)parallel;
#endif
}

void jacobi_serial_sweep(RMat& a, RMat& vt, double thresh) {
  const int n = static_cast<int>(a.rows());
  std::vector<PairRot> one(1);
  for (int p = 0; p < n - 1; ++p)
    for (int q = p + 1; q < n; ++q)
      if (make_rotation(a, p, q, thresh, one[0])) apply_round(a, vt, one, false);
}

// Round-robin tournament sweep: n-1 rounds of n/2 disjoint pairs. Rotation
// angles for a round are computed before any update of that round (the 2x2
// blocks involved are mutually disjoint across the round), then the round is
// applied as one row pass, one column pass, one eigenvector pass.
void jacobi_tournament_sweep(RMat& a, RMat& vt, double thresh) {
  const int n = static_cast<int>(a.rows());
  const int m = (n % 2 == 0) ? n : n + 1;  // odd: pad with a bye slot
  std::vector<int> players(m);
  std::iota(players.begin(), players.end(), 0);
  std::vector<PairRot> active;
  active.reserve(m / 2);
  for (int round = 0; round < m - 1; ++round) {
    active.clear();
    for (int k = 0; k < m / 2; ++k) {
      int p = players[k], q = players[m - 1 - k];
      if (p >= n || q >= n) continue;  // bye
      if (p > q) std::swap(p, q);
      PairRot r;
      if (make_rotation(a, p, q, thresh, r)) active.push_back(r);
    }
    apply_round(a, vt, active, true);
    // rotate the schedule, first slot fixed
    const int last = players[m - 1];
    for (int k = m - 1; k > 1; --k) players[k] = players[k - 1];
    players[1] = last;
  }
}

RealEigenDecomposition jacobi_eig(RMat a, bool allow_parallel) {
  if (!a.square()) throw ValidationError("eigh_sym: matrix must be square");
  const std::size_t n = a.rows();
  RMat vt = RMat::identity(n);
  if (n > 1) {
    const double scale = frob_norm(a);
    const double stop_off = 1e-14 * std::max(scale, 1e-300);
    const double thresh = stop_off / (4.0 * static_cast<double>(n));
    int sweeps = 0;
    while (off_diag_norm(a) > stop_off) {
      if (++sweeps > kMaxSweeps)
        throw ConvergenceError("jacobi sweep limit exceeded", off_diag_norm(a), sweeps);
      if (allow_parallel && n >= kParallelMinDim)
        jacobi_tournament_sweep(a, vt, thresh);
      else
        jacobi_serial_sweep(a, vt, thresh);
    }
  }
  // sort ascending, deterministic tie-break on original position
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  RealEigenDecomposition out;
  out.eigenvalues.resize(n);
  out.vectors = RMat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    // sign convention: largest-magnitude component positive
    const double* vrow = vt.row(src);
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::abs(vrow[i]);
      if (m > best) {
        best = m;
        imax = i;
      }
    }
    const double sgn = (vrow[imax] >= 0.0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sgn * vrow[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Complex wrapper: eigendecompose the 2n x 2n embedding [[A,-B],[B,A]] of
// H = A + iB, then stitch the doubled real spectrum back into n complex
// eigenvectors.
// ---------------------------------------------------------------------------

void phase_fix(std::vector<cplx>& u) {
  std::size_t imax = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = std::abs(u[i]);
    if (m > best) {
      best = m;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const cplx ph = std::conj(u[imax]) / std::abs(u[imax]);
  for (auto& x : u) x *= ph;
}

EigenDecomposition eigh_complex(const CMat& hs) {
  const std::size_t n = hs.rows();
  RMat g(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx z = hs(i, j);
      g(i, j) = z.real();
      g(i + n, j + n) = z.real();
      g(i + n, j) = z.imag();
      g(i, j + n) = -z.imag();
    }
  RealEigenDecomposition re = jacobi_eig(std::move(g), true);

  // Eigenvalues of the embedding come in exact pairs; cluster nearly equal
  // ones and pull one complex vector per pair out of each cluster.
  double wmax = 1.0;
  for (double w : re.eigenvalues) wmax = std::max(wmax, std::abs(w));
  const double ctol = 1e-11 * wmax;

  std::vector<std::pair<double, std::vector<cplx>>> found;
  found.reserve(n);
  std::size_t i = 0;
  while (i < 2 * n) {
    std::size_t j = i + 1;
    while (j < 2 * n &&
           (re.eigenvalues[j] - re.eigenvalues[j - 1] <= ctol || (j - i) % 2 == 1))
      ++j;
    const std::size_t csize = j - i;
    if (csize % 2 != 0)
      throw ConvergenceError("eigenvalue pairing failed in complex embedding",
                             re.eigenvalues[i], 0);
    const std::size_t k = csize / 2;
    // candidates: every real eigenvector of the cluster, read as x + iy
    std::vector<std::vector<cplx>> cand(csize, std::vector<cplx>(n));
    for (std::size_t t = 0; t < csize; ++t)
      for (std::size_t r = 0; r < n; ++r)
        cand[t][r] = cplx(re.vectors(r, i + t), re.vectors(r + n, i + t));
    std::vector<char> used(csize, 0);
    for (std::size_t step = 0; step < k; ++step) {
      // pivot: remaining candidate with the largest residual
      std::size_t tbest = csize;
      double nbest = -1.0;
      for (std::size_t t = 0; t < csize; ++t) {
        if (used[t]) continue;
        double nn = 0.0;
        for (std::size_t r = 0; r < n; ++r) nn += std::norm(cand[t][r]);
        if (nn > nbest + 1e-15) {
          nbest = nn;
          tbest = t;
        }
      }
      nbest = std::sqrt(std::max(nbest, 0.0));
      if (tbest == csize || nbest < 1e-6)
        throw ConvergenceError("degenerate cluster extraction failed", nbest, 0);
      used[tbest] = 1;
      std::vector<cplx> u = cand[tbest];
      for (auto& x : u) x /= nbest;
      // Rayleigh quotient gives the per-vector eigenvalue (clusters may have
      // been force-merged across a tiny genuine gap)
      cplx ray{};
      for (std::size_t r = 0; r < n; ++r) {
        cplx hu{};
        for (std::size_t c2 = 0; c2 < n; ++c2) hu += hs(r, c2) * u[c2];
        ray += std::conj(u[r]) * hu;
      }
      // deflate remaining candidates (i u is also in the cluster span)
      for (std::size_t t = 0; t < csize; ++t) {
        if (used[t]) continue;
        cplx ip{};
        for (std::size_t r = 0; r < n; ++r) ip += std::conj(u[r]) * cand[t][r];
        for (std::size_t r = 0; r < n; ++r) cand[t][r] -= ip * u[r];
        cplx ipi{};
        for (std::size_t r = 0; r < n; ++r) ipi += std::conj(cplx(0, 1) * u[r]) * cand[t][r];
        for (std::size_t r = 0; r < n; ++r) cand[t][r] -= ipi * (cplx(0, 1) * u[r]);
      }
      phase_fix(u);
      found.emplace_back(ray.real(), std::move(u));
    }
    i = j;
  }
  if (found.size() != n)
    throw ConvergenceError("eigenvector extraction count mismatch",
                           static_cast<double>(found.size()), 0);
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.vectors = CMat(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = found[c].first;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = found[c].second[r];
  }
  out.reconstruction_error = 0.0;
  return out;
}

EigenDecomposition eigh_real_fast_path(const CMat& hs) {
  const std::size_t n = hs.rows();
  RMat a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = hs(i, j).real();
  RealEigenDecomposition re = jacobi_eig(a, true);
  // real-arithmetic reconstruction check
  RMat vd = re.vectors;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) vd(r, c) *= re.eigenvalues[c];
  RMat rec = matmul(vd, transpose(re.vectors));
  rec -= a;
  EigenDecomposition out;
  out.reconstruction_error = frob_norm(rec) / std::max(1.0, frob_norm(a));
  out.eigenvalues = std::move(re.eigenvalues);
  out.vectors = to_complex(re.vectors);
  return out;
}

double reconstruction_error(const CMat& hs, const EigenDecomposition& e) {
  const std::size_t n = hs.rows();
  CMat vd = e.vectors;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) vd(r, c) *= e.eigenvalues[c];
  CMat rec = matmul(vd, dagger(e.vectors));
  rec -= hs;
  return frob_norm(rec) / std::max(1.0, frob_norm(hs));
}

}  // namespace

EigenDecomposition eigh(const CMat& h) {
  if (!h.square()) throw ValidationError("eigh: matrix must be square");
  const double defect_tol = 1e-10 * std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > defect_tol)
    throw ValidationError("eigh: matrix is not hermitian within tolerance");
  const std::size_t n = h.rows();
  CMat hs(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      hs(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
  if (max_imag(hs) == 0.0) return eigh_real_fast_path(hs);
  EigenDecomposition out = eigh_complex(hs);
  out.reconstruction_error = reconstruction_error(hs, out);
  return out;
}

RealEigenDecomposition eigh_sym(const RMat& a) {
  if (!a.square()) throw ValidationError("eigh_sym: matrix must be square");
  RMat s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return jacobi_eig(std::move(s), true);
}

namespace ref {
RealEigenDecomposition eigh_sym(const RMat& a) {
  if (!a.square()) throw ValidationError("eigh_sym: matrix must be square");
  RMat s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return jacobi_eig(std::move(s), false);
}
}  // namespace ref

CMat hermitian_function(const CMat& h, double (*f)(double)) {
  EigenDecomposition e = eigh(h);
  const std::size_t n = h.rows();
  CMat vd = e.vectors;
  for (std::size_t c = 0; c < n; ++c) {
    const double fv = f(e.eigenvalues[c]);
    for (std::size_t r = 0; r < n; ++r) vd(r, c) *= fv;
  }
  return matmul(vd, dagger(e.vectors));
}

CMat inv_sqrt_on_support(const CMat& h, double rank_tol) {
  EigenDecomposition e = eigh(h);
  const std::size_t n = h.rows();
  const double lmax = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.back();
  const double thr = rank_tol * std::max(lmax, 0.0);
  CMat vd = e.vectors;
  for (std::size_t c = 0; c < n; ++c) {
    const double lam = e.eigenvalues[c];
    if (lam < -thr)
      throw ValidationError("inv_sqrt_on_support: matrix has a negative eigenvalue");
    const double fv = (lam > thr) ? 1.0 / std::sqrt(lam) : 0.0;
    for (std::size_t r = 0; r < n; ++r) vd(r, c) *= fv;
  }
  return matmul(vd, dagger(e.vectors));
}

CMat sqrt_psd(const CMat& h, double tol) {
  EigenDecomposition e = eigh(h);
  const std::size_t n = h.rows();
  const double lmax = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.back();
  const double floor_tol = tol * std::max(1.0, lmax);
  CMat vd = e.vectors;
  for (std::size_t c = 0; c < n; ++c) {
    double lam = e.eigenvalues[c];
    if (lam < -floor_tol) throw ValidationError("sqrt_psd: matrix is not PSD");
    lam = std::max(lam, 0.0);
    const double fv = std::sqrt(lam);
    for (std::size_t r = 0; r < n; ++r) vd(r, c) *= fv;
  }
  return matmul(vd, dagger(e.vectors));
}

PsdReport psd_check(const CMat& h, double tol) {
  EigenDecomposition e = eigh(h);
  const double lmin = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.front();
  return PsdReport{lmin >= -tol * std::max(1.0, max_abs(h)), lmin};
}

double default_psd_tol() { return g_psd_tol.load(); }
void set_default_psd_tol(double tol) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  g_psd_tol.store(tol);
}

}  // namespace pbt
