#include "pbt/certificates.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "pbt/eigh.hpp"
#include "pbt/errors.hpp"
#include "pbt/kernels.hpp"

namespace pbt {

namespace {

void check_dense_cap(std::size_t dim, bool override_size_cap, const char* what) {
  const std::size_t cap = override_size_cap ? kSignalDimCap : kDenseDimCap;
  if (dim > cap)
    throw ResourceError(std::string(what) + ": dimension " + std::to_string(dim) +
                        " exceeds dense cap " + std::to_string(cap));
}

CMat hermitize(const CMat& m) {
  CMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return out;
}

double min_eig(const CMat& h) { return eigh(hermitize(h)).eigenvalues.front(); }

void finalize(CertificateReport& rep, double tol) {
  rep.worst_margin = 0.0;
  for (double m : rep.margins) rep.worst_margin = std::min(rep.worst_margin, m);
  rep.passed = rep.worst_margin >= -tol;
}

}  // namespace

CertificateReport certify_srm_optimal(int n_ports, double tol, bool override_size_cap) {
  const auto set = signal_states(n_ports, 2, Convention::singlet);
  check_dense_cap(set.space.dim(), override_size_cap, "certify_srm_optimal");
  const auto povm = srm_povm(set);

  CMat y = matmul(povm.elements[0], set.states[0]);
  for (int i = 1; i < n_ports; ++i)
    y += matmul(povm.elements[static_cast<std::size_t>(i)],
                set.states[static_cast<std::size_t>(i)]);
  y = hermitize(y);

  // independent route: per total-spin sector of all n+1 qubits,
  // c(s)/2^(n-1) times the sector-compressed square root of the port sum
  CMat rho = set.states[0];
  for (int i = 1; i < n_ports; ++i) rho += set.states[static_cast<std::size_t>(i)];
  const CMat rho_sqrt = sqrt_psd(rho);
  const auto basis = su2::build_coupled_basis(n_ports + 1);
  const std::size_t dim = set.space.dim();
  CMat y_sector(dim, dim);
  for (int two_s = (n_ports + 1) % 2; two_s <= n_ports - 1; two_s += 2) {
    const auto cols = basis.sector(two_s);
    if (cols.empty()) continue;
    CMat u(dim, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (std::size_t r = 0; r < dim; ++r) u(r, c) = cplx(basis.vectors(r, cols[c]));
    const CMat compressed = matmul(dagger(u), matmul(rho_sqrt, u));
    CMat lifted = matmul(u, matmul(compressed, dagger(u)));
    lifted *= cplx(c_coefficient(n_ports, two_s) * std::ldexp(1.0, -(n_ports - 1)));
    y_sector += lifted;
  }

  CertificateReport rep;
  rep.kind = "srm_optimal";
  rep.cross_check_defect = max_abs_diff(y, y_sector);
  rep.value_defect = std::abs(y.trace().real() / 4.0 - fidelity_closed_form(n_ports).F);
  for (int i = 0; i < n_ports; ++i) {
    CMat diff = y;
    diff -= set.states[static_cast<std::size_t>(i)];
    rep.margins.push_back(min_eig(diff));
  }
  finalize(rep, tol);
  rep.passed = rep.passed && rep.cross_check_defect <= 1e-10 && rep.value_defect <= 1e-10;
  return rep;
}

CertificateReport certify_universal_upper(int n_ports, int qudit_dim, Convention convention,
                                          double tol, bool override_size_cap) {
  const auto set = signal_states(n_ports, qudit_dim, convention);
  check_dense_cap(set.space.dim(), override_size_cap, "certify_universal_upper");
  CMat omega = set.states[0];
  for (int i = 1; i < n_ports; ++i) omega += set.states[static_cast<std::size_t>(i)];

  CertificateReport rep;
  rep.kind = "universal_upper";
  for (int i = 0; i < n_ports; ++i) {
    CMat diff = omega;
    diff -= set.states[static_cast<std::size_t>(i)];
    rep.margins.push_back(min_eig(diff));
  }
  std::vector<int> keep(static_cast<std::size_t>(n_ports));
  for (int k = 0; k < n_ports; ++k) keep[static_cast<std::size_t>(k)] = k;
  const CMat b_marginal = partial_trace(omega, set.space.dims(), keep);
  const double a = static_cast<double>(n_ports) / static_cast<double>(b_marginal.rows());
  CMat slack = CMat::identity(b_marginal.rows());
  slack *= cplx(a);
  slack -= b_marginal;
  rep.margins.push_back(min_eig(slack));
  finalize(rep, tol);
  return rep;
}

OrthogonalProtocol orthogonal_protocol(int n_ports, int qudit_dim) {
  if (n_ports < 1) throw ValidationError("need at least one port");
  if (qudit_dim < 2) throw ValidationError("qudit dimension must be at least 2");
  if (n_ports > qudit_dim)
    throw ValidationError("orthogonal protocol exists only for n <= d");

  OrthogonalProtocol proto;
  proto.states = signal_states(n_ports, qudit_dim, Convention::phi_plus);
  const int d = qudit_dim;

  // O = (x)_k sqrt(d) |0><k-1| sends the k-th pair to |0>_{A_k} |e_k>_B
  const double rd = std::sqrt(static_cast<double>(d));
  CMat o(1, 1);
  o(0, 0) = cplx(1.0);
  for (int k = 0; k < n_ports; ++k) {
    CMat f(d, d);
    f(0, static_cast<std::size_t>(k)) = cplx(rd);
    o = kron(o, f);
  }
  proto.encoding = std::move(o);

  proto.povm.n = n_ports;
  proto.povm.d = d;
  proto.povm.convention = proto.states.convention;
  proto.povm.space = proto.states.space;
  const auto& dims = proto.states.space.dims();
  CMat rest = CMat::identity(static_cast<std::size_t>(d));
  for (int i = 0; i < n_ports; ++i) {
    CMat e(d, d);
    e(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = cplx(1.0);
    rest(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = cplx(0.0);
    proto.povm.elements.push_back(embed(e, dims, {n_ports}));
  }
  proto.povm.elements.push_back(embed(rest, dims, {n_ports}));
  proto.povm.completeness_defect = 0.0;

  proto.report = fidelity_dense(proto.states, proto.povm, &proto.encoding);
  return proto;
}

CertificateReport certify_orthogonal_achieving(int n_ports, int qudit_dim, double tol) {
  const auto proto = orthogonal_protocol(n_ports, qudit_dim);
  CertificateReport rep;
  rep.kind = "orthogonal_achieving";
  for (const auto& e : proto.povm.elements) rep.margins.push_back(min_eig(e));
  rep.cross_check_defect = proto.povm.completeness_defect;
  rep.value_defect =
      std::abs(proto.report.F - static_cast<double>(n_ports) / (qudit_dim * qudit_dim));
  finalize(rep, tol);
  rep.passed = rep.passed && rep.value_defect <= 1e-12 && rep.cross_check_defect <= 1e-12;
  return rep;
}

}  // namespace pbt
