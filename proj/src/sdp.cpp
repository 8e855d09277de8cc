#include "pbt/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pbt/eigh.hpp"
#include "pbt/errors.hpp"
#include "pbt/kernels.hpp"

namespace pbt {

namespace {

constexpr std::size_t kPrimaryBuildCap = 64;

// ---- realification -------------------------------------------------------

RMat realify(const CMat& m) {
  const std::size_t n = m.rows();
  RMat out(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = m(i, j).real();
      const double im = m(i, j).imag();
      out(i, j) = re;
      out(n + i, n + j) = re;
      out(i, n + j) = -im;
      out(n + i, j) = im;
    }
  return out;
}

// J-symmetrized inverse of realify: averages the two copies so rounding
// noise cannot break hermiticity.
CMat derealify(const RMat& m) {
  const std::size_t n = m.rows() / 2;
  CMat out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = cplx(0.5 * (m(i, j) + m(n + i, n + j)), 0.5 * (m(n + i, j) - m(i, n + j)));
  return out;
}

struct REntry {
  std::size_t r = 0, c = 0;
  double v = 0.0;
};

void realify_entries(const SparseHermitian& s, std::vector<REntry>& out) {
  const std::size_t n = s.dim;
  for (const auto& e : s.entries) {
    const double re = e.val.real();
    const double im = e.val.imag();
    if (re != 0.0) {
      out.push_back({e.row, e.col, re});
      out.push_back({n + e.row, n + e.col, re});
    }
    if (im != 0.0) {
      out.push_back({e.row, n + e.col, -im});
      out.push_back({n + e.row, e.col, im});
    }
  }
}

// ---- dense real helpers ---------------------------------------------------

using RBlocks = std::vector<RMat>;

void symmetrize(RMat& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
}

double block_dot(const RBlocks& a, const RBlocks& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double* pa = a[k].data();
    const double* pb = b[k].data();
    const std::size_t sz = a[k].rows() * a[k].cols();
    for (std::size_t i = 0; i < sz; ++i) acc += pa[i] * pb[i];
  }
  return acc;
}

double block_max_abs(const RBlocks& a) {
  double best = 0.0;
  for (const auto& m : a) best = std::max(best, max_abs(m));
  return best;
}

bool cholesky_lower(RMat& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0)) return false;
    const double root = std::sqrt(d);
    a(j, j) = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
      a(i, j) = v / root;
    }
    for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
  }
  return true;
}

void chol_solve_in_place(const RMat& l, std::vector<double>& x) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * x[k];
    x[i] = v / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= l(k, ii) * x[k];
    x[ii] = v / l(ii, ii);
  }
}

RMat lower_solve_matrix(const RMat& l, const RMat& m) {
  RMat x = m;  // solve L X = M column-blocked over rows
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= lik * x(k, j);
    }
    const double inv = 1.0 / l(i, i);
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) *= inv;
  }
  return x;
}

// L^{-1} M L^{-T} for symmetric M
RMat congruence_by_inverse(const RMat& l, const RMat& m) {
  RMat p = lower_solve_matrix(l, m);
  RMat q = lower_solve_matrix(l, transpose(p));
  RMat out = transpose(q);
  symmetrize(out);
  return out;
}

// V f(w) V^T
RMat assemble_from_eig(const RealEigenDecomposition& dec, double (*f)(double)) {
  const std::size_t n = dec.vectors.rows();
  RMat scaled = dec.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double g = f(dec.eigenvalues[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= g;
  }
  RMat out = matmul(scaled, transpose(dec.vectors));
  symmetrize(out);
  return out;
}

double f_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }
double f_inv_sqrt(double x) { return 1.0 / std::sqrt(std::max(x, 1e-300)); }
double f_inv(double x) { return 1.0 / x; }

// largest step alpha with X + alpha D >= 0 (X > 0)
double max_psd_step(const RMat& x, const RMat& d) {
  RMat l = x;
  if (!cholesky_lower(l)) throw ConvergenceError("iterate lost positive definiteness", 0.0, 0);
  RMat b = congruence_by_inverse(l, d);
  const double lam = eigh_sym(b).eigenvalues.front();
  if (lam >= -1e-14) return 1e100;
  return -1.0 / lam;
}

// ---- realified instance ---------------------------------------------------

struct RPart {
  std::size_t b = 0;
  std::vector<REntry> e;
};

struct RRow {
  std::vector<RPart> parts;
};

struct RealProblem {
  std::vector<std::size_t> dims;
  RBlocks c;
  std::vector<RRow> rows;
  std::vector<double> b;
  std::size_t nu = 0;  // barrier order: sum of realified dims
};

RealProblem realify_instance(const SdpInstance& inst) {
  RealProblem p;
  for (std::size_t dim : inst.block_dims) {
    p.dims.push_back(2 * dim);
    p.nu += 2 * dim;
  }
  for (const auto& cb : inst.objective) p.c.push_back(realify(cb));
  p.rows.reserve(inst.constraints.size());
  p.b.reserve(inst.constraints.size());
  for (const auto& con : inst.constraints) {
    RRow row;
    for (const auto& [bi, coeff] : con.blocks) {
      RPart part;
      part.b = bi;
      realify_entries(coeff, part.e);
      if (!part.e.empty()) row.parts.push_back(std::move(part));
    }
    std::sort(row.parts.begin(), row.parts.end(),
              [](const RPart& a, const RPart& b) { return a.b < b.b; });
    p.rows.push_back(std::move(row));
    p.b.push_back(2.0 * con.rhs);
  }
  return p;
}

double row_dot(const RRow& row, const RBlocks& z) {
  double acc = 0.0;
  for (const auto& part : row.parts)
    for (const auto& e : part.e) acc += e.v * z[part.b](e.c, e.r);
  return acc;
}

void adjoint_accumulate(const RealProblem& p, const std::vector<double>& y, RBlocks& out) {
  for (std::size_t k = 0; k < p.rows.size(); ++k) {
    const double yk = y[k];
    if (yk == 0.0) continue;
    for (const auto& part : p.rows[k].parts)
      for (const auto& e : part.e) out[part.b](e.r, e.c) += yk * e.v;
  }
}

RBlocks zero_blocks(const std::vector<std::size_t>& dims) {
  RBlocks out;
  out.reserve(dims.size());
  for (std::size_t d : dims) out.emplace_back(d, d);
  return out;
}

// Schur complement M_kl = sum_b tr(A_k W_b A_l W_b) through the sparse rows
RMat build_schur(const RealProblem& p, const RBlocks& w) {
  const std::size_t m = p.rows.size();
  RMat out(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = k; l < m; ++l) {
      double acc = 0.0;
      const auto& pk = p.rows[k].parts;
      const auto& pl = p.rows[l].parts;
      std::size_t ik = 0, il = 0;
      while (ik < pk.size() && il < pl.size()) {
        if (pk[ik].b < pl[il].b) {
          ++ik;
        } else if (pk[ik].b > pl[il].b) {
          ++il;
        } else {
          const RMat& wb = w[pk[ik].b];
          for (const auto& e : pk[ik].e)
            for (const auto& f : pl[il].e) acc += e.v * f.v * wb(e.c, f.r) * wb(f.c, e.r);
          ++ik;
          ++il;
        }
      }
      out(k, l) = acc;
      out(l, k) = acc;
    }
  }
  return out;
}

struct NewtonDirection {
  std::vector<double> dy;
  RBlocks dz, ds;
};

NewtonDirection newton_step(const RealProblem& p, const RMat& schur_chol, const RBlocks& w,
                            const std::vector<double>& r_p, const RBlocks& r_d,
                            const RBlocks& r_c) {
  const std::size_t m = p.rows.size();
  // G = R_c - W R_d W; solve M dy = r_p - A(G)
  RBlocks g(r_c);
  for (std::size_t b = 0; b < g.size(); ++b) {
    RMat wrw = matmul(w[b], matmul(r_d[b], w[b]));
    symmetrize(wrw);
    g[b] -= wrw;
  }
  NewtonDirection dir;
  dir.dy.resize(m);
  for (std::size_t k = 0; k < m; ++k) dir.dy[k] = r_p[k] - row_dot(p.rows[k], g);
  chol_solve_in_place(schur_chol, dir.dy);

  dir.ds = r_d;
  {
    std::vector<double> neg(dir.dy);
    for (auto& v : neg) v = -v;
    adjoint_accumulate(p, neg, dir.ds);  // dS = R_d - A*(dy)
  }
  dir.dz = r_c;
  for (std::size_t b = 0; b < dir.dz.size(); ++b) {
    RMat wsw = matmul(w[b], matmul(dir.ds[b], w[b]));
    symmetrize(wsw);
    dir.dz[b] -= wsw;  // dZ = R_c - W dS W
  }
  return dir;
}

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

// ---- public types ----------------------------------------------------------

SparseHermitian SparseHermitian::from_dense(const CMat& m, double drop_tol) {
  if (!m.square()) throw ValidationError("SparseHermitian: matrix must be square");
  SparseHermitian out;
  out.dim = m.rows();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > drop_tol) out.entries.push_back({i, j, m(i, j)});
  out.check_hermitian();
  return out;
}

CMat SparseHermitian::to_dense() const {
  CMat out(dim, dim);
  for (const auto& e : entries) out(e.row, e.col) += e.val;
  return out;
}

void SparseHermitian::check_hermitian() const {
  const CMat dense = to_dense();
  if (hermiticity_defect(dense) > 1e-12 * std::max(1.0, max_abs(dense)))
    throw ValidationError("SparseHermitian: coefficient is not hermitian");
  for (const auto& e : entries)
    if (e.row >= dim || e.col >= dim)
      throw ValidationError("SparseHermitian: entry out of range");
}

void SdpInstance::validate() const {
  if (block_dims.empty()) throw ValidationError("SdpInstance: no blocks");
  if (objective.size() != block_dims.size())
    throw ValidationError("SdpInstance: objective block count mismatch");
  for (std::size_t b = 0; b < block_dims.size(); ++b) {
    if (objective[b].rows() != block_dims[b] || !objective[b].square())
      throw ValidationError("SdpInstance: objective block dimension mismatch");
    if (hermiticity_defect(objective[b]) > 1e-10 * std::max(1.0, max_abs(objective[b])))
      throw ValidationError("SdpInstance: objective block not hermitian");
  }
  if (constraints.empty()) throw ValidationError("SdpInstance: no equality constraints");
  for (const auto& con : constraints) {
    if (!std::isfinite(con.rhs)) throw ValidationError("SdpInstance: rhs not finite");
    if (con.blocks.empty()) throw ValidationError("SdpInstance: empty constraint row");
    for (const auto& [bi, coeff] : con.blocks) {
      if (bi >= block_dims.size()) throw ValidationError("SdpInstance: block index out of range");
      if (coeff.dim != block_dims[bi])
        throw ValidationError("SdpInstance: coefficient dimension mismatch");
      coeff.check_hermitian();
    }
  }
}

// ---- primary family ---------------------------------------------------------

SdpInstance build_primary(int n_ports, int qudit_dim, bool override_size_cap) {
  return build_primary(n_ports, qudit_dim,
                       qudit_dim == 2 ? Convention::singlet : Convention::phi_plus,
                       override_size_cap);
}

SdpInstance build_primary(int n_ports, int qudit_dim, Convention convention,
                          bool override_size_cap) {
  const auto set = signal_states(n_ports, qudit_dim, convention);
  const std::size_t dim = set.space.dim();
  if (dim > kPrimaryBuildCap && !override_size_cap)
    throw ResourceError("build_primary: dimension " + std::to_string(dim) + " exceeds cap " +
                        std::to_string(kPrimaryBuildCap) + " (pass the size-cap override)");
  const std::size_t dim_x = dim / static_cast<std::size_t>(qudit_dim);
  const double inv_d2 = 1.0 / (qudit_dim * qudit_dim);

  SdpInstance inst;
  inst.n = n_ports;
  inst.d = qudit_dim;
  inst.convention = convention;
  for (int i = 0; i < n_ports; ++i) {
    inst.block_dims.push_back(dim);
    CMat c = set.states[static_cast<std::size_t>(i)];
    c *= cplx(-inv_d2);
    inst.objective.push_back(std::move(c));
  }
  inst.block_dims.push_back(dim_x);
  inst.objective.push_back(CMat(dim_x, dim_x));
  const std::size_t bx = static_cast<std::size_t>(n_ports);

  // orthonormal hermitian basis of the full space; each element pins one
  // entry of sum_i Pi~_i - X (x) 1
  const double r2 = 1.0 / std::sqrt(2.0);
  const int d = qudit_dim;
  for (std::size_t pr = 0; pr < dim; ++pr) {
    for (std::size_t qc = pr; qc < dim; ++qc) {
      const std::size_t ar = pr / static_cast<std::size_t>(d);
      const std::size_t br = pr % static_cast<std::size_t>(d);
      const std::size_t ac = qc / static_cast<std::size_t>(d);
      const std::size_t bc = qc % static_cast<std::size_t>(d);
      const bool b_match = br == bc;
      auto emit = [&](const SparseHermitian& e, const SparseHermitian& x_coeff) {
        SdpConstraint con;
        for (int i = 0; i < n_ports; ++i) con.blocks.emplace_back(static_cast<std::size_t>(i), e);
        if (!x_coeff.entries.empty()) con.blocks.emplace_back(bx, x_coeff);
        con.rhs = 0.0;
        inst.constraints.push_back(std::move(con));
      };
      if (pr == qc) {
        SparseHermitian e{dim, {{pr, pr, cplx(1.0)}}};
        SparseHermitian x{dim_x, {{ar, ar, cplx(-1.0)}}};
        emit(e, x);
      } else {
        SparseHermitian es{dim, {{pr, qc, cplx(r2)}, {qc, pr, cplx(r2)}}};
        SparseHermitian xs{dim_x, {}};
        if (b_match) xs.entries = {{ar, ac, cplx(-r2)}, {ac, ar, cplx(-r2)}};
        emit(es, xs);
        SparseHermitian ea{dim, {{pr, qc, cplx(0.0, r2)}, {qc, pr, cplx(0.0, -r2)}}};
        SparseHermitian xa{dim_x, {}};
        if (b_match) xa.entries = {{ar, ac, cplx(0.0, -r2)}, {ac, ar, cplx(0.0, r2)}};
        emit(ea, xa);
      }
    }
  }
  // normalization row tr X = d^n, kept last so the dual variable is `a`
  SparseHermitian ix{dim_x, {}};
  for (std::size_t i = 0; i < dim_x; ++i) ix.entries.push_back({i, i, cplx(1.0)});
  SdpConstraint trace_row;
  trace_row.blocks.emplace_back(bx, std::move(ix));
  trace_row.rhs = static_cast<double>(dim_x);
  inst.constraints.push_back(std::move(trace_row));
  return inst;
}

SdpWarmStart srm_warm_start(int n_ports, int qudit_dim) {
  return srm_warm_start(n_ports, qudit_dim,
                        qudit_dim == 2 ? Convention::singlet : Convention::phi_plus);
}

SdpWarmStart srm_warm_start(int n_ports, int qudit_dim, Convention convention) {
  const auto set = signal_states(n_ports, qudit_dim, convention);
  const auto povm = srm_povm(set);
  SdpWarmStart warm;
  for (const auto& e : povm.elements) {
    CMat z = e;
    z *= cplx(0.99);
    CMat lift = CMat::identity(z.rows());
    lift *= cplx(0.01 / n_ports);
    z += lift;
    warm.primal_blocks.push_back(std::move(z));
  }
  warm.primal_blocks.push_back(CMat::identity(set.space.dim() / qudit_dim));
  return warm;
}

double instance_objective(const SdpInstance& instance, const std::vector<CMat>& blocks) {
  if (blocks.size() != instance.objective.size())
    throw ValidationError("instance_objective: block count mismatch");
  double acc = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    acc += trace_of_product_real(instance.objective[b], blocks[b]);
  return acc;
}

// ---- solver -----------------------------------------------------------------

SdpSolution solve(const SdpInstance& instance, const SdpOptions& options,
                  const SdpWarmStart* warm) {
  instance.validate();
  if (options.gap_tol <= 0 || options.max_iter < 1 || options.step_fraction <= 0 ||
      options.step_fraction >= 1)
    throw ValidationError("solve: bad options");
  const RealProblem p = realify_instance(instance);
  const std::size_t m = p.rows.size();
  const std::size_t nblocks = p.dims.size();
  const bool family = instance.n > 0;

  // primal start
  RBlocks z = zero_blocks(p.dims);
  if (warm != nullptr) {
    if (warm->primal_blocks.size() != nblocks)
      throw ValidationError("solve: warm start block count mismatch");
    for (std::size_t b = 0; b < nblocks; ++b) {
      if (2 * warm->primal_blocks[b].rows() != p.dims[b])
        throw ValidationError("solve: warm start block dimension mismatch");
      z[b] = realify(warm->primal_blocks[b]);
    }
  } else if (family) {
    // Pi~_i = 1/n, X = 1 is strictly feasible
    for (std::size_t b = 0; b + 1 < nblocks; ++b)
      for (std::size_t i = 0; i < p.dims[b]; ++i) z[b](i, i) = 1.0 / instance.n;
    for (std::size_t i = 0; i < p.dims[nblocks - 1]; ++i) z[nblocks - 1](i, i) = 1.0;
  } else {
    double tau = 1.0;
    for (double bk : p.b) tau = std::max(tau, std::abs(bk) / static_cast<double>(p.nu));
    for (std::size_t b = 0; b < nblocks; ++b)
      for (std::size_t i = 0; i < p.dims[b]; ++i) z[b](i, i) = tau;
  }

  // dual start
  std::vector<double> y(m, 0.0);
  RBlocks s = zero_blocks(p.dims);
  if (family) {
    // Omega_0 = rho + t, a_0 = n/d^n + t(d+1) is strictly dual feasible
    const int d = instance.d;
    CMat rho(instance.block_dims[0], instance.block_dims[0]);
    for (int i = 0; i < instance.n; ++i) {
      CMat si = instance.objective[static_cast<std::size_t>(i)];
      si *= cplx(-static_cast<double>(d * d));
      rho += si;
    }
    double t = 0.5;
    for (int attempt = 0; attempt < 8; ++attempt) {
      CMat omega0 = rho;
      CMat lift = CMat::identity(rho.rows());
      lift *= cplx(t);
      omega0 += lift;
      const double a0 =
          static_cast<double>(instance.n) / static_cast<double>(instance.block_dims.back()) +
          t * (d + 1);
      for (std::size_t k = 0; k + 1 < m; ++k) {
        const auto& coeff = instance.constraints[k].blocks.front().second;
        cplx tr{};
        for (const auto& e : coeff.entries) tr += e.val * omega0(e.col, e.row);
        y[k] = -tr.real() / (d * d);
      }
      y[m - 1] = -a0 / (d * d);
      for (std::size_t b = 0; b < nblocks; ++b) s[b] = p.c[b];
      std::vector<double> neg(y);
      for (auto& v : neg) v = -v;
      adjoint_accumulate(p, neg, s);
      bool ok = true;
      for (std::size_t b = 0; b < nblocks && ok; ++b) {
        RMat l = s[b];
        ok = cholesky_lower(l);
      }
      if (ok) break;
      t *= 2.0;
      std::fill(y.begin(), y.end(), 0.0);
    }
  } else {
    double tau = 1.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
      const auto dec = eigh_sym(p.c[b]);
      tau = std::max(tau, 1.0 - dec.eigenvalues.front());
    }
    for (std::size_t b = 0; b < nblocks; ++b) {
      s[b] = p.c[b];
      for (std::size_t i = 0; i < p.dims[b]; ++i) s[b](i, i) += tau;
    }
  }

  double maxabs_b = 0.0;
  for (double bk : p.b) maxabs_b = std::max(maxabs_b, std::abs(bk));
  const double maxabs_c = std::max(1.0, block_max_abs(p.c));

  auto objective_pair = [&](const RBlocks& zb, const std::vector<double>& yv) {
    const double vp = block_dot(p.c, zb) / 2.0;
    double vd = 0.0;
    for (std::size_t k = 0; k < m; ++k) vd += p.b[k] * yv[k];
    vd /= 2.0;
    return std::pair<double, double>{vp, vd};
  };

  int iter = 0;
  double rp_inf = 0.0, rd_inf = 0.0, gap_c = 0.0;
  std::vector<double> r_p(m);
  RBlocks r_d = zero_blocks(p.dims);
  while (true) {
    // residuals and convergence metrics
    for (std::size_t k = 0; k < m; ++k) r_p[k] = p.b[k] - row_dot(p.rows[k], z);
    for (std::size_t b = 0; b < nblocks; ++b) {
      r_d[b] = p.c[b];
      r_d[b] -= s[b];
    }
    {
      std::vector<double> neg(y);
      for (auto& v : neg) v = -v;
      adjoint_accumulate(p, neg, r_d);
    }
    rp_inf = 0.0;
    for (double v : r_p) rp_inf = std::max(rp_inf, std::abs(v));
    rd_inf = block_max_abs(r_d);
    const auto [vp, vd] = objective_pair(z, y);
    gap_c = vp - vd;
    const double scale = std::max(1.0, std::abs(vp));
    if (gap_c <= options.gap_tol * scale && gap_c >= -options.gap_tol * scale &&
        rp_inf <= 1e-9 * (1.0 + maxabs_b) && rd_inf <= 1e-9 * maxabs_c)
      break;
    if (iter >= options.max_iter)
      throw ConvergenceError("interior-point iteration limit reached", gap_c, iter);

    // Nesterov-Todd scaling point per block
    RBlocks w(nblocks, RMat()), s_inv(nblocks, RMat());
    for (std::size_t b = 0; b < nblocks; ++b) {
      const auto dec_s = eigh_sym(s[b]);
      if (dec_s.eigenvalues.front() <= 0.0)
        throw ConvergenceError("dual iterate lost positive definiteness", gap_c, iter);
      const RMat s_half = assemble_from_eig(dec_s, f_sqrt);
      const RMat s_ihalf = assemble_from_eig(dec_s, f_inv_sqrt);
      s_inv[b] = assemble_from_eig(dec_s, f_inv);
      RMat t = matmul(s_half, matmul(z[b], s_half));
      symmetrize(t);
      const auto dec_t = eigh_sym(t);
      if (dec_t.eigenvalues.front() <= 0.0)
        throw ConvergenceError("primal iterate lost positive definiteness", gap_c, iter);
      const RMat t_half = assemble_from_eig(dec_t, f_sqrt);
      w[b] = matmul(s_ihalf, matmul(t_half, s_ihalf));
      symmetrize(w[b]);
    }

    RMat schur = build_schur(p, w);
    {  // jitter fallback keeps the factorization alive near the boundary
      RMat l = schur;
      double jitter = 0.0;
      double base = 0.0;
      for (std::size_t i = 0; i < m; ++i) base = std::max(base, schur(i, i));
      while (!cholesky_lower(l)) {
        jitter = jitter == 0.0 ? 1e-14 * std::max(base, 1.0) : jitter * 100.0;
        if (jitter > 1e-4 * std::max(base, 1.0))
          throw ConvergenceError("normal equations lost positive definiteness", gap_c, iter);
        l = schur;
        for (std::size_t i = 0; i < m; ++i) l(i, i) += jitter;
      }
      schur = std::move(l);
    }

    const double mu = block_dot(z, s) / static_cast<double>(p.nu);

    // predictor: pure Newton toward the boundary
    RBlocks rc_aff = zero_blocks(p.dims);
    for (std::size_t b = 0; b < nblocks; ++b) rc_aff[b] -= z[b];
    const NewtonDirection aff = newton_step(p, schur, w, r_p, r_d, rc_aff);
    double ap_aff = 1e100, ad_aff = 1e100;
    for (std::size_t b = 0; b < nblocks; ++b) {
      ap_aff = std::min(ap_aff, max_psd_step(z[b], aff.dz[b]));
      ad_aff = std::min(ad_aff, max_psd_step(s[b], aff.ds[b]));
    }
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    {
      RBlocks z_aff = z, s_aff = s;
      for (std::size_t b = 0; b < nblocks; ++b) {
        RMat dz = aff.dz[b];
        dz *= ap_aff;
        z_aff[b] += dz;
        RMat ds = aff.ds[b];
        ds *= ad_aff;
        s_aff[b] += ds;
      }
      mu_aff = block_dot(z_aff, s_aff) / static_cast<double>(p.nu);
    }
    const double sigma = clip01(std::pow(std::max(mu_aff, 0.0) / mu, 3.0));

    // corrector: recentered step
    RBlocks rc = zero_blocks(p.dims);
    for (std::size_t b = 0; b < nblocks; ++b) {
      RMat target = s_inv[b];
      target *= sigma * mu;
      rc[b] += target;
      rc[b] -= z[b];
    }
    const NewtonDirection dir = newton_step(p, schur, w, r_p, r_d, rc);
    double ap = 1e100, ad = 1e100;
    for (std::size_t b = 0; b < nblocks; ++b) {
      ap = std::min(ap, max_psd_step(z[b], dir.dz[b]));
      ad = std::min(ad, max_psd_step(s[b], dir.ds[b]));
    }
    ap = std::min(1.0, options.step_fraction * ap);
    ad = std::min(1.0, options.step_fraction * ad);
    if (ap < 1e-10 && ad < 1e-10)
      throw ConvergenceError("step length collapsed", gap_c, iter);
    for (std::size_t b = 0; b < nblocks; ++b) {
      RMat dz = dir.dz[b];
      dz *= ap;
      z[b] += dz;
      symmetrize(z[b]);
      RMat ds = dir.ds[b];
      ds *= ad;
      s[b] += ds;
      symmetrize(s[b]);
    }
    for (std::size_t k = 0; k < m; ++k) y[k] += ad * dir.dy[k];
    ++iter;
  }

  SdpSolution sol;
  sol.n = instance.n;
  sol.d = instance.d;
  sol.convention = instance.convention;
  sol.iterations = iter;
  // realified rows double every complex trace pairing; entrywise defects don't
  sol.primal_residual = 0.5 * rp_inf;
  sol.dual_residual = rd_inf;
  for (std::size_t b = 0; b < nblocks; ++b) {
    sol.primal_blocks.push_back(derealify(z[b]));
    sol.dual_slacks.push_back(derealify(s[b]));
  }
  sol.dual_y = y;
  const auto [vp, vd] = objective_pair(z, y);
  if (family) {
    sol.primal_value = -vp;
    sol.dual_value = -vd;
    sol.gap = sol.dual_value - sol.primal_value;
    const double d2 = static_cast<double>(instance.d) * instance.d;
    // Omega = -d^2 sum_k y_k E_k = d^2 (S_0 - C_0); slacks are the certificate
    CMat omega = sol.dual_slacks[0];
    omega -= instance.objective[0];
    omega *= cplx(d2);
    sol.omega = HermitianOperator(omega, TensorSpace::ports(instance.n, instance.d));
    sol.a = -d2 * y.back();
  } else {
    sol.primal_value = vp;
    sol.dual_value = vd;
    sol.gap = sol.primal_value - sol.dual_value;
  }
  return sol;
}

ExtractedProtocol extract_resource(const SdpSolution& solution) {
  if (solution.n < 1) throw ValidationError("extract_resource: not a port-protocol solution");
  const CMat& x = solution.primal_blocks.back();
  ExtractedProtocol out;
  out.o = sqrt_psd(x, 1e-9);
  const CMat x_isqrt = inv_sqrt_on_support(x, 1e-9);
  out.support = matmul(x_isqrt, matmul(x, x_isqrt));

  out.povm.n = solution.n;
  out.povm.d = solution.d;
  out.povm.convention = solution.convention;
  out.povm.space = TensorSpace::ports(solution.n, solution.d);
  const auto& dims = out.povm.space.dims();
  std::vector<int> a_factors(static_cast<std::size_t>(solution.n));
  for (int k = 0; k < solution.n; ++k) a_factors[static_cast<std::size_t>(k)] = k;
  CMat total(solution.primal_blocks[0].rows(), solution.primal_blocks[0].rows());
  for (int i = 0; i < solution.n; ++i) {
    CMat pi = conjugate_on_factors(x_isqrt, a_factors,
                                   solution.primal_blocks[static_cast<std::size_t>(i)], dims);
    total += pi;
    out.povm.elements.push_back(std::move(pi));
  }
  out.povm.completeness_defect =
      max_abs_diff(total, embed(out.support, dims, a_factors));
  return out;
}

}  // namespace pbt
