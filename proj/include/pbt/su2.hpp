#pragma once

#include <cstdint>
#include <vector>

#include "pbt/mat.hpp"

// Spin-half recoupling machinery. All spins are passed around doubled
// (two_j = 2j) so everything stays integer.
namespace pbt::su2 {

// Exact signed square root of a rational: sign * sqrt(num/den). Closed under
// multiplication, which is all the coupled-basis construction needs; doubles
// appear only at the very end.
struct CgValue {
  int sign = 0;  // -1, 0, +1
  std::int64_t num = 0;
  std::int64_t den = 1;

  static CgValue zero() { return CgValue{}; }
  static CgValue of(int sign, std::int64_t num, std::int64_t den);
  CgValue operator*(const CgValue& o) const;
  double to_double() const;
  bool is_zero() const { return sign == 0; }
};

// Coupling coefficient for adding one spin-1/2 to spin j1: the amplitude of
// |j1 m1> (x) |1/2, spin_sign/2> in |j, m1 + spin_sign/2>. spin_sign is +-1;
// two_j must be two_j1 +- 1. Out-of-range magnetic numbers give zero; a
// parity mismatch between two_j1 and two_m1 throws.
CgValue cg_half(int two_j1, int two_m1, int spin_sign, int two_j);

// General Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>, Condon-Shortley
// phase, via the Racah sum. Used as an independent cross-check of cg_half.
double cg_general(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M);

// Confirms cg_half against cg_general including the reordering phase
// (-1)^(j1 + 1/2 - j) between the two argument orders.
bool cg_symmetry_check(int two_j1, int two_m1, int spin_sign, int two_j);

// Exact C(n, k); zero outside 0 <= k <= n, throws past n = 52 where the
// table would overflow.
std::int64_t binomial(int n, int k);

// Number of inequivalent total-spin-s sectors of n spin-halves:
// C(n, (n-2s)/2... ) difference of binomials; equals the number of
// admissible coupling paths ending at two_s. Throws on parity mismatch.
std::int64_t multiplicity(int n, int two_s);

// Admissible intermediate-spin sequences for n qubits: path[k] = total two_j
// after qubit k+1; path[0] = 1, steps +-1, never negative. Lexicographic.
std::vector<std::vector<int>> coupling_paths(int n);

struct SpinLabel {
  int two_j = 0;
  int two_m = 0;
  std::vector<int> path;  // intermediate two_j values, path.back() == two_j

  bool operator==(const SpinLabel& o) const = default;
};

// Orthonormal total-spin basis of n qubits obtained by coupling them in
// index order. Qubit k+1 occupies the k-th tensor slot (first slot most
// significant); bit 1 is m = +1/2. Columns of `vectors` follow `labels`,
// sorted by (two_j, path, two_m). All amplitudes are products of cg_half
// values, assembled exactly and converted to double once.
struct CoupledBasis {
  int n = 0;
  std::vector<SpinLabel> labels;
  RMat vectors;  // 2^n rows, one column per label

  // Column indices whose label has the given total spin, in label order.
  std::vector<std::size_t> sector(int two_j) const;
  std::size_t column(const SpinLabel& l) const;  // throws if absent
};

CoupledBasis build_coupled_basis(int n);

// Same states, but the coupling sequence walks the physical qubits in
// `qubit_order` (0-based slots). Vectors stay indexed by the physical slots.
CoupledBasis permute_basis_qubits(const CoupledBasis& basis, const std::vector<int>& qubit_order);

// Unitary overlap matrix U[a][b] = <basis_a(s, m, path_a) | basis_b(s, m, path_b)>
// between the two_s sectors of two coupled bases of the same qubits. The
// result must be independent of m (checked over every m, 1e-10) and unitary
// within 1e-12; violations throw CertificateError.
RMat rebase_unitary(const CoupledBasis& a, const CoupledBasis& b, int two_s);

}  // namespace pbt::su2
