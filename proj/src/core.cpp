#include "pbt/core.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "pbt/errors.hpp"
#include "pbt/kernels.hpp"

namespace pbt {

namespace {

constexpr double kRankTol = 1e-12;

std::size_t checked_pow_dim(int base, int exp, std::size_t cap, const char* what) {
  std::size_t total = 1;
  for (int k = 0; k < exp; ++k) {
    total *= static_cast<std::size_t>(base);
    if (total > cap)
      throw ResourceError(std::string(what) + ": dimension " + std::to_string(base) + "^" +
                          std::to_string(exp) + " exceeds cap " + std::to_string(cap));
  }
  return total;
}

std::size_t ipow(int base, int exp) {
  std::size_t total = 1;
  for (int k = 0; k < exp; ++k) total *= static_cast<std::size_t>(base);
  return total;
}

// projector onto the chosen maximally entangled pair, d^2 x d^2
CMat pair_projector(int d, Convention convention) {
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  std::vector<cplx> v(dd, cplx(0.0));
  if (convention == Convention::singlet) {
    if (d != 2) throw ValidationError("singlet convention requires d = 2");
    const double r2 = 1.0 / std::sqrt(2.0);
    v[1] = cplx(r2);
    v[2] = cplx(-r2);
  } else {
    const double rd = 1.0 / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < d; ++k) v[static_cast<std::size_t>(k) * d + k] = cplx(rd);
  }
  CMat p(dd, dd);
  for (std::size_t r = 0; r < dd; ++r)
    for (std::size_t c = 0; c < dd; ++c) p(r, c) = v[r] * std::conj(v[c]);
  return p;
}

double lam_minus(int n, int two_j) { return std::ldexp(static_cast<double>(n - two_j), -(n + 1)); }
double lam_plus(int n, int two_j) {
  return std::ldexp(static_cast<double>(n + two_j + 2), -(n + 1));
}

void check_ports(int n_ports) {
  if (n_ports < 1) throw ValidationError("need at least one port");
}

FidelityReport make_report(int n, int d, double F, const char* method, Convention conv) {
  FidelityReport rep;
  rep.n = n;
  rep.d = d;
  rep.F = F;
  rep.f = (F * d + 1.0) / (d + 1.0);
  rep.method = method;
  rep.convention = convention_name(conv);
  return rep;
}

}  // namespace

std::string convention_name(Convention c) {
  return c == Convention::singlet ? "singlet" : "phi_plus";
}

Convention convention_from_name(const std::string& name) {
  if (name == "singlet") return Convention::singlet;
  if (name == "phi_plus") return Convention::phi_plus;
  throw ValidationError("unknown convention '" + name + "' (expected singlet or phi_plus)");
}

SignalStateSet signal_states(int n_ports, int qudit_dim, Convention convention) {
  check_ports(n_ports);
  if (qudit_dim < 2) throw ValidationError("qudit dimension must be at least 2");
  checked_pow_dim(qudit_dim, n_ports + 1, kSignalDimCap, "signal_states");
  SignalStateSet set;
  set.n = n_ports;
  set.d = qudit_dim;
  set.convention = convention;
  set.space = TensorSpace::ports(n_ports, qudit_dim);
  const CMat p = pair_projector(qudit_dim, convention);
  const std::vector<int> dims(static_cast<std::size_t>(n_ports) + 1, qudit_dim);
  const double scale = 1.0 / static_cast<double>(ipow(qudit_dim, n_ports - 1));
  set.states.reserve(static_cast<std::size_t>(n_ports));
  for (int i = 0; i < n_ports; ++i) {
    CMat s = embed(p, dims, {i, n_ports});
    s *= cplx(scale);
    set.states.push_back(std::move(s));
  }
  return set;
}

CMat rho_recursive(int n_ports) {
  check_ports(n_ports);
  checked_pow_dim(2, n_ports + 1, kSignalDimCap, "rho_recursive");
  const CMat p = pair_projector(2, Convention::singlet);
  CMat rho = p;  // one port: A1, B
  for (int k = 2; k <= n_ports; ++k) {
    // previous rho lives on A1..A(k-1), B; append A_k then swap it before B
    std::vector<int> dims(static_cast<std::size_t>(k) + 1, 2);
    std::vector<int> perm(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j < k - 1; ++j) perm[static_cast<std::size_t>(j)] = j;
    perm[static_cast<std::size_t>(k) - 1] = k;
    perm[static_cast<std::size_t>(k)] = k - 1;
    CMat grown = permute_factors(kron(rho, CMat::identity(2)), dims, perm);
    grown *= cplx(0.5);
    CMat last = embed(p, dims, {k - 1, k});
    last *= cplx(std::ldexp(1.0, -(k - 1)));
    grown += last;
    rho = std::move(grown);
  }
  return rho;
}

std::int64_t RhoSpectrum::total_dimension() const {
  std::int64_t total = 0;
  for (const auto& l : lines) total += l.degeneracy;
  return total;
}

RhoSpectrum rho_spectrum(int n_ports) {
  check_ports(n_ports);
  if (n_ports > kClosedFormMaxPorts)
    throw ResourceError("rho_spectrum: exact degeneracies overflow past n = " +
                        std::to_string(kClosedFormMaxPorts));
  RhoSpectrum spec;
  spec.n = n_ports;
  for (int two_j = n_ports % 2; two_j <= n_ports; two_j += 2) {
    const std::int64_t paths = su2::multiplicity(n_ports, two_j);
    spec.lines.push_back(
        {"minus", two_j, lam_minus(n_ports, two_j), (two_j + 2) * paths});
    if (two_j > 0)
      spec.lines.push_back({"plus", two_j, lam_plus(n_ports, two_j), two_j * paths});
  }
  return spec;
}

std::vector<cplx> psi_eigenvector(int n_ports, const std::string& branch, int two_j, int two_m,
                                  const std::vector<int>& path) {
  check_ports(n_ports);
  int two_J = 0;
  int rel_sign = 0;
  if (branch == "minus") {
    two_J = two_j + 1;
    rel_sign = +1;
  } else if (branch == "plus") {
    two_J = two_j - 1;
    rel_sign = -1;
  } else {
    throw ValidationError("branch must be 'minus' or 'plus'");
  }
  if (two_J < 0) throw ValidationError("branch 'plus' needs two_j >= 1");
  if (path.empty() || path.back() != two_j)
    throw ValidationError("coupling path must end at two_j");
  if (std::abs(two_m) > two_J || ((two_m - two_J) & 1) != 0)
    throw ValidationError("two_m out of range for total spin");

  const su2::CoupledBasis basis = su2::build_coupled_basis(n_ports);
  const std::size_t dim_a = static_cast<std::size_t>(1) << n_ports;
  std::vector<cplx> v(dim_a * 2, cplx(0.0));
  const double s = static_cast<double>(rel_sign);
  const double c_down = su2::cg_half(two_j, two_m + 1, -1, two_J).to_double();
  const double c_up = su2::cg_half(two_j, two_m - 1, +1, two_J).to_double();
  if (c_down != 0.0) {
    const std::size_t col = basis.column({two_j, two_m + 1, path});
    for (std::size_t ia = 0; ia < dim_a; ++ia)
      v[ia * 2 + 0] += cplx(s * c_down * basis.vectors(ia, col));
  }
  if (c_up != 0.0) {
    const std::size_t col = basis.column({two_j, two_m - 1, path});
    for (std::size_t ia = 0; ia < dim_a; ++ia)
      v[ia * 2 + 1] += cplx(s * c_up * basis.vectors(ia, col));
  }
  return v;
}

Povm srm_povm(const SignalStateSet& states) {
  check_ports(states.n);
  if (states.states.size() != static_cast<std::size_t>(states.n))
    throw ValidationError("srm_povm: state count does not match port count");
  CMat rho = states.states[0];
  for (int i = 1; i < states.n; ++i) rho += states.states[static_cast<std::size_t>(i)];
  const CMat r = inv_sqrt_on_support(rho, kRankTol);

  Povm povm;
  povm.n = states.n;
  povm.d = states.d;
  povm.convention = states.convention;
  povm.space = states.space;
  const CMat p = pair_projector(states.d, states.convention);
  CMat p_scaled = p;
  p_scaled *= cplx(1.0 / static_cast<double>(ipow(states.d, states.n - 1)));
  const std::vector<int> dims(states.space.dims());
  povm.elements.reserve(static_cast<std::size_t>(states.n));
  for (int i = 0; i < states.n; ++i)
    povm.elements.push_back(matmul(r, apply_left(p_scaled, {i, states.n}, r, dims)));

  // spread the rho-kernel projector evenly so the POVM is complete
  CMat sum = povm.elements[0];
  for (int i = 1; i < states.n; ++i) sum += povm.elements[static_cast<std::size_t>(i)];
  CMat delta = CMat::identity(sum.rows());
  delta -= sum;
  delta *= cplx(1.0 / states.n);
  for (auto& e : povm.elements) e += delta;

  CMat total = povm.elements[0];
  for (int i = 1; i < states.n; ++i) total += povm.elements[static_cast<std::size_t>(i)];
  povm.completeness_defect = max_abs_diff(total, CMat::identity(total.rows()));
  return povm;
}

double c_coefficient(int n_ports, int two_s) {
  check_ports(n_ports);
  if (two_s < 0 || two_s > n_ports - 1 || ((n_ports - 1 - two_s) & 1) != 0)
    throw ValidationError("c_coefficient: spectator spin incompatible with port count");
  const double t1 = two_s == 0 ? 0.0
                               : std::pow(lam_minus(n_ports, two_s - 1), -0.5) * two_s /
                                     (2.0 * (two_s + 1));
  const double t2 =
      std::pow(lam_plus(n_ports, two_s + 1), -0.5) * (two_s + 2) / (2.0 * (two_s + 1));
  return t1 + t2;
}

std::vector<cplx> xi_vector(int n_ports, int i_port, const su2::SpinLabel& label) {
  check_ports(n_ports);
  if (i_port < 0 || i_port >= n_ports) throw ValidationError("xi_vector: port index out of range");
  const double r2 = 1.0 / std::sqrt(2.0);
  const std::size_t dim = checked_pow_dim(2, n_ports + 1, kSignalDimCap, "xi_vector");
  std::vector<cplx> v(dim, cplx(0.0));
  if (n_ports == 1) {
    if (!(label == su2::SpinLabel{0, 0, {}}))
      throw ValidationError("xi_vector: no spectators at n = 1, label must be trivial");
    v[1] = cplx(r2);
    v[2] = cplx(-r2);
    return v;
  }
  const su2::CoupledBasis basis = su2::build_coupled_basis(n_ports - 1);
  const std::size_t col = basis.column(label);
  std::vector<int> rest;
  for (int k = 0; k < n_ports; ++k)
    if (k != i_port) rest.push_back(k);
  const std::size_t dim_rest = static_cast<std::size_t>(1) << (n_ports - 1);
  for (std::size_t ridx = 0; ridx < dim_rest; ++ridx) {
    const double amp = basis.vectors(ridx, col);
    if (amp == 0.0) continue;
    // distribute spectator bits, then the singlet on (A_i, B)
    std::size_t base = 0;
    for (int t = 0; t < n_ports - 1; ++t) {
      const std::size_t bit = (ridx >> (n_ports - 2 - t)) & 1u;
      base |= bit << (n_ports - rest[static_cast<std::size_t>(t)]);
    }
    v[base | (1u << 0)] += cplx(amp * r2);                                       // |0_Ai 1_B>
    v[base | (static_cast<std::size_t>(1) << (n_ports - i_port))] -= cplx(amp * r2);  // |1_Ai 0_B>
  }
  return v;
}

double matrix_element_check(int n_ports, int i_port) {
  check_ports(n_ports);
  const SignalStateSet set = signal_states(n_ports, 2, Convention::singlet);
  CMat rho = set.states[0];
  for (int i = 1; i < n_ports; ++i) rho += set.states[static_cast<std::size_t>(i)];
  const CMat r = inv_sqrt_on_support(rho, kRankTol);

  std::vector<su2::SpinLabel> labels;
  if (n_ports == 1) {
    labels.push_back({0, 0, {}});
  } else {
    labels = su2::build_coupled_basis(n_ports - 1).labels;
  }
  const std::size_t dim = set.space.dim();
  CMat xi(dim, labels.size());
  for (std::size_t l = 0; l < labels.size(); ++l) {
    const auto v = xi_vector(n_ports, i_port, labels[l]);
    for (std::size_t j = 0; j < dim; ++j) xi(j, l) = v[j];
  }
  const CMat gram = matmul(dagger(xi), matmul(r, xi));
  double worst = 0.0;
  for (std::size_t a = 0; a < labels.size(); ++a)
    for (std::size_t b = 0; b < labels.size(); ++b) {
      const double expect = a == b ? c_coefficient(n_ports, labels[a].two_j) : 0.0;
      worst = std::max(worst, std::abs(gram(a, b) - cplx(expect)));
    }
  return worst;
}

FidelityReport fidelity_closed_form(int n_ports) {
  check_ports(n_ports);
  if (n_ports > kClosedFormMaxPorts)
    throw ResourceError("fidelity_closed_form: binomials overflow past n = " +
                        std::to_string(kClosedFormMaxPorts));
  const int n = n_ports;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = (n - 2 * k - 1) / std::sqrt(k + 1.0) + (n - 2 * k + 1) / std::sqrt(n - k + 1.0);
    sum += t * t * static_cast<double>(su2::binomial(n, k));
  }
  return make_report(n, 2, std::ldexp(sum, -(n + 3)), "closed_form", Convention::singlet);
}

FidelityReport fidelity_blocks(int n_ports) {
  check_ports(n_ports);
  if (n_ports > kClosedFormMaxPorts)
    throw ResourceError("fidelity_blocks: multiplicities overflow past n = " +
                        std::to_string(kClosedFormMaxPorts));
  const int n = n_ports;
  double tot = 0.0;
  for (int two_s = (n - 1) % 2; two_s < n; two_s += 2) {
    const std::int64_t m = su2::multiplicity(n - 1, two_s);
    if (m == 0) continue;
    const double c = c_coefficient(n, two_s);
    tot += (two_s + 1) * static_cast<double>(m) * c * c;
  }
  return make_report(n, 2, n * std::ldexp(tot, -2 * n), "block", Convention::singlet);
}

FidelityReport fidelity_dense(const SignalStateSet& states, const Povm& povm,
                              const CMat* encoding) {
  check_ports(states.n);
  if (!(povm.space == states.space) || povm.d != states.d)
    throw ValidationError("fidelity_dense: measurement and states live on different spaces");
  if (povm.elements.size() < states.states.size())
    throw ValidationError("fidelity_dense: fewer measurement outcomes than signal states");
  std::vector<int> a_factors(static_cast<std::size_t>(states.n));
  for (int k = 0; k < states.n; ++k) a_factors[static_cast<std::size_t>(k)] = k;
  const double dn = static_cast<double>(ipow(states.d, states.n));
  if (encoding != nullptr) {
    if (encoding->rows() != encoding->cols() || encoding->rows() != ipow(states.d, states.n))
      throw ValidationError("fidelity_dense: encoding must act on the full port side");
    const double norm = trace_of_product_real(*encoding, dagger(*encoding));
    if (std::abs(norm - dn) > 1e-6 * dn)
      throw ValidationError("fidelity_dense: encoding normalization tr(O O^dag) != d^n");
  }
  double sum = 0.0;
  for (int i = 0; i < states.n; ++i) {
    const CMat& sigma = states.states[static_cast<std::size_t>(i)];
    if (encoding != nullptr) {
      const CMat rotated =
          conjugate_on_factors(*encoding, a_factors, sigma, states.space.dims());
      sum += trace_of_product_real(povm.elements[static_cast<std::size_t>(i)], rotated);
    } else {
      sum += trace_of_product_real(povm.elements[static_cast<std::size_t>(i)], sigma);
    }
  }
  return make_report(states.n, states.d, sum / (states.d * states.d), "dense",
                     states.convention);
}

double classical_fidelity_limit(int qudit_dim) {
  if (qudit_dim < 2) throw ValidationError("qudit dimension must be at least 2");
  return 2.0 / (qudit_dim + 1);
}

double asymptotic_gap(int n_ports) {
  const FidelityReport rep = fidelity_closed_form(n_ports);
  return 2.0 * n_ports * (1.0 - rep.f);
}

}  // namespace pbt
