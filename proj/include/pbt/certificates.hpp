#pragma once

#include <string>
#include <vector>

#include "pbt/core.hpp"

namespace pbt {

// Outcome of a feasibility/optimality check. `margins` holds the minimum
// eigenvalue of every verified operator inequality, in a fixed order; the
// wire format carries exactly {kind, passed, worst_margin, margins}, the two
// defect fields are in-process diagnostics.
struct CertificateReport {
  std::string kind;
  bool passed = false;
  double worst_margin = 0.0;
  std::vector<double> margins;
  double cross_check_defect = 0.0;  // disagreement between independent constructions
  double value_defect = 0.0;        // |certified value - analytic value|
};

// Dual witness for square-root-measurement optimality (d = 2, singlet):
// Y = sum_i Pi_i sigma_i must dominate every signal state and carry
// tr(Y)/4 = F. Y is assembled twice -- dense accumulation, and per
// total-spin sector as c(s)/2^(n-1) * P_s rho^(1/2) P_s -- and the two
// must agree to 1e-10 before the margins count.
CertificateReport certify_srm_optimal(int n_ports, double tol = default_psd_tol(),
                                      bool override_size_cap = false);

// Feasible dual point (Omega = sum_i sigma_i, a = n/d^n) proving F <= n/d^2
// for any protocol. Margins: min eig(Omega - sigma_i) per port, then
// min eig(a*1 - tr_B Omega), which is analytically exactly zero.
CertificateReport certify_universal_upper(int n_ports, int qudit_dim,
                                          Convention convention = Convention::phi_plus,
                                          double tol = default_psd_tol(),
                                          bool override_size_cap = false);

// Separable protocol saturating the n/d^2 bound when n <= d: the encoding
// collapses each pair to |0>|e_k>, and the receiver reads the port index off
// B with the orthogonal projectors |e_i><e_i| (plus a remainder outcome).
// The measurement completing the protocol is one valid choice; only the
// resource itself is forced.
struct OrthogonalProtocol {
  SignalStateSet states;  // pair-sum signal states the encoding acts on
  CMat encoding;          // O with tr(O O^dag) = d^n
  Povm povm;              // n+1 outcomes, last one the remainder
  FidelityReport report;  // F = n/d^2, f = (d+n)/(d(d+1))
};

OrthogonalProtocol orthogonal_protocol(int n_ports, int qudit_dim);

// Checks the protocol above lands exactly on the certified bound: POVM
// elements PSD, complete, and |F - n/d^2| <= 1e-12.
CertificateReport certify_orthogonal_achieving(int n_ports, int qudit_dim,
                                               double tol = default_psd_tol());

}  // namespace pbt
