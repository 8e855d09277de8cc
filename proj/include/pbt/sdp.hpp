#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pbt/core.hpp"
#include "pbt/linalg.hpp"

namespace pbt {

// Hermitian coefficient matrix in coordinate form. Entries list every nonzero
// including conjugate mirrors, so tr(A Z) = sum_e val * Z(col, row) directly.
struct SparseHermitian {
  std::size_t dim = 0;
  struct Entry {
    std::size_t row = 0, col = 0;
    cplx val;
  };
  std::vector<Entry> entries;

  static SparseHermitian from_dense(const CMat& m, double drop_tol = 0.0);
  CMat to_dense() const;
  void check_hermitian() const;  // throws ValidationError on asymmetry
};

// One equality row: sum over listed blocks of tr(coeff * Z_block) = rhs.
struct SdpConstraint {
  std::vector<std::pair<std::size_t, SparseHermitian>> blocks;
  double rhs = 0.0;
};

// Block-diagonal SDP in minimization form: min sum_b tr(C_b Z_b) subject to
// the equality rows and Z_b >= 0. The teleportation family tags n/d/convention
// so solutions can be read back as fidelities; generic instances leave n = 0.
struct SdpInstance {
  std::vector<std::size_t> block_dims;
  std::vector<CMat> objective;
  std::vector<SdpConstraint> constraints;
  int n = 0;
  int d = 0;
  Convention convention = Convention::singlet;

  void validate() const;
};

struct SdpOptions {
  double gap_tol = 1e-7;
  int max_iter = 200;
  double step_fraction = 0.98;  // fraction-to-boundary
};

// Strictly feasible primal iterate (complex blocks, same order as the
// instance blocks).
struct SdpWarmStart {
  std::vector<CMat> primal_blocks;
};

struct SdpSolution {
  int n = 0;
  int d = 0;
  Convention convention = Convention::singlet;
  std::vector<CMat> primal_blocks;
  std::vector<CMat> dual_slacks;
  std::vector<double> dual_y;
  // family instances: primal_value/dual_value are the fidelities F (primal
  // reachable, dual certified bound) and gap = dual - primal >= 0.
  // generic instances: primal_value = <C,Z>, dual_value = b.y, gap = p - d.
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;  // max |<A_k,Z> - b_k|
  double dual_residual = 0.0;    // max entry of |C - S - A*(y)|
  // dual certificate in the teleportation variables (family instances only)
  HermitianOperator omega;
  double a = 0.0;
};

// The port-discrimination program over a free resource: one PSD block per
// port for the conjugated measurement, one block for X = O^dag O, equality
// rows pinning sum_i Pi~_i = X (x) 1 entrywise (orthonormal Hermitian basis
// of the full space) plus tr X = d^n. Hard cap d^(n+1) <= 64 without the
// override.
SdpInstance build_primary(int n_ports, int qudit_dim, bool override_size_cap = false);
SdpInstance build_primary(int n_ports, int qudit_dim, Convention convention,
                          bool override_size_cap = false);

// Strictly feasible primal point from the square-root measurement:
// Z_i = 0.99 Pi_i + 0.01/n, X = identity.
SdpWarmStart srm_warm_start(int n_ports, int qudit_dim);
SdpWarmStart srm_warm_start(int n_ports, int qudit_dim, Convention convention);

// <C, Z> for candidate blocks (validation/testing hook).
double instance_objective(const SdpInstance& instance, const std::vector<CMat>& blocks);

// Primal-dual path-following interior point with Nesterov-Todd scaling on
// the realified blocks; Mehrotra-style adaptive centering, fraction-to-
// boundary steps. Deterministic. Throws ConvergenceError past max_iter.
SdpSolution solve(const SdpInstance& instance, const SdpOptions& options = {},
                  const SdpWarmStart* warm = nullptr);

// O = X^(1/2) and the de-conjugated POVM Pi_i = (X^(-1/2) (x) 1) Pi~_i
// (X^(-1/2) (x) 1); complete on the support of X (x) 1. `support` is the
// projector onto the support of X.
struct ExtractedProtocol {
  CMat o;
  Povm povm;
  CMat support;
};

ExtractedProtocol extract_resource(const SdpSolution& solution);

}  // namespace pbt
