#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbt/linalg.hpp"
#include "pbt/su2.hpp"

namespace pbt {

// Which maximally entangled pair the resource is built from: the spin
// singlet (d = 2 only) or the unnormalized-identity pair sum_k |kk>/sqrt(d).
enum class Convention { singlet, phi_plus };
std::string convention_name(Convention c);
Convention convention_from_name(const std::string& name);

// Dense-size caps (total Hilbert dimension d^(n+1)).
inline constexpr std::size_t kSignalDimCap = 4096;
inline constexpr std::size_t kDenseDimCap = 512;
inline constexpr int kClosedFormMaxPorts = 50;

// The n signal states sigma_i: the projector pair on (A_i, B) tensored with
// the maximally mixed state on the other ports. Trace 1 each.
struct SignalStateSet {
  int n = 0;
  int d = 2;
  Convention convention = Convention::singlet;
  TensorSpace space;  // A1..An, B
  std::vector<CMat> states;
};

SignalStateSet signal_states(int n_ports, int qudit_dim, Convention convention);

// Port-sum density sum_i sigma_i (d = 2, singlet) built one port at a time;
// trace n. Cross-checks signal_states through an independent construction.
CMat rho_recursive(int n_ports);

struct SpectrumLine {
  std::string branch;  // "minus" or "plus"
  int two_j = 0;
  double eigenvalue = 0.0;
  std::int64_t degeneracy = 0;
};

struct RhoSpectrum {
  int n = 0;
  std::vector<SpectrumLine> lines;
  std::int64_t total_dimension() const;
};

// Closed-form spectrum of sum_i sigma_i for d = 2: per intermediate spin j
// of the n A-qubits, branch minus carries (n - two_j)/2^(n+1) and branch
// plus (n + two_j + 2)/2^(n+1).
RhoSpectrum rho_spectrum(int n_ports);

// Analytic eigenvector of sum_i sigma_i: couple the n A-qubits along `path`
// to spin j, then the B qubit to total spin J = j +- 1/2 (branch minus is
// J = j + 1/2 with the plus relative sign, branch plus is J = j - 1/2 with
// the minus relative sign). two_m is the total magnetic number. Unit norm.
std::vector<cplx> psi_eigenvector(int n_ports, const std::string& branch, int two_j, int two_m,
                                  const std::vector<int>& path);

struct Povm {
  int n = 0;
  int d = 2;
  Convention convention = Convention::singlet;
  TensorSpace space;
  std::vector<CMat> elements;
  // max-entry deviation of the element sum from the identity, measured after
  // the kernel completion term is spread over the outcomes
  double completeness_defect = 0.0;
};

// Square-root measurement: rho^{-1/2} sigma_i rho^{-1/2} plus an equal share
// of the rho-kernel projector per outcome. Elements are hermitian by
// construction; PSD checks are left to the certificate layer.
Povm srm_povm(const SignalStateSet& states);

// Eigenvalue of <xi | rho^{-1/2} | xi> on the spin-s block of the n-1
// spectator qubits (d = 2).
double c_coefficient(int n_ports, int two_s);

// Eigenvector of sigma_i (eigenvalue 1/2^(n-1), d = 2 singlet): the singlet
// on (A_i, B) times the coupled spectator state labeled by `label` (a
// SpinLabel of the remaining n-1 qubits in ascending slot order).
std::vector<cplx> xi_vector(int n_ports, int i_port, const su2::SpinLabel& label);

// Worst deviation of <xi_i(l) | rho^{-1/2} | xi_i(l')> from
// delta_{l l'} c(s) over all spectator label pairs for one port.
double matrix_element_check(int n_ports, int i_port);

struct FidelityReport {
  int n = 0;
  int d = 2;
  double F = 0.0;  // entanglement fidelity
  double f = 0.0;  // average output fidelity (F d + 1) / (d + 1)
  std::string method;
  std::string convention;
};

// Three independent routes to the square-root-measurement fidelity (d = 2):
// a binomial closed form, the spin-block sum over c(s), and the dense trace
// formula evaluated on explicit matrices.
FidelityReport fidelity_closed_form(int n_ports);
FidelityReport fidelity_blocks(int n_ports);
// encoding, if given, is applied to the A side: F = (1/d^2) sum_i
// tr(Pi_i (O x 1) sigma_i (O^dag x 1)); it must satisfy tr(O O^dag) = d^n.
FidelityReport fidelity_dense(const SignalStateSet& states, const Povm& povm,
                              const CMat* encoding = nullptr);

// Largest average fidelity reachable without entanglement.
double classical_fidelity_limit(int qudit_dim);

// 2n(1 - f): approaches 1 from the known asymptotics as n grows.
double asymptotic_gap(int n_ports);

}  // namespace pbt
