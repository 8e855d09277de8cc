#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pbt/kernels.hpp"
#include "pbt/linalg.hpp"
#include "test_helpers.hpp"

using namespace pbt;
using namespace pbt::testing;

namespace {

// sign > 0: (|00>+|11>)/sqrt2, else the singlet (|01>-|10>)/sqrt2
CMat bell_projector(int sign) {
  CMat v(4, 1);
  if (sign > 0) {
    v(0, 0) = 1.0 / std::sqrt(2.0);
    v(3, 0) = 1.0 / std::sqrt(2.0);
  } else {
    v(1, 0) = 1.0 / std::sqrt(2.0);
    v(2, 0) = -1.0 / std::sqrt(2.0);
  }
  return matmul(v, dagger(v));
}

}  // namespace

TEST_CASE("matmul agrees with the serial reference") {
  const CMat a = random_cmat(37, 23, 1);
  const CMat b = random_cmat(23, 41, 2);
  const CMat c1 = matmul(a, b);
  const CMat c2 = ref::matmul(a, b);
  CHECK(max_abs_diff(c1, c2) < 1e-12);
  CHECK_THROWS_AS(matmul(a, random_cmat(24, 4, 3)), ValidationError);
}

TEST_CASE("matmul is deterministic across repeated runs") {
  const CMat a = random_cmat(64, 64, 4);
  const CMat b = random_cmat(64, 64, 5);
  const CMat c1 = matmul(a, b);
  const CMat c2 = matmul(a, b);
  CHECK(c1 == c2);
}

TEST_CASE("kron basics and reference agreement") {
  CMat a(2, 2), b(2, 2);
  a(0, 0) = 1; a(0, 1) = 2; a(1, 0) = 3; a(1, 1) = 4;
  b(0, 0) = 0; b(0, 1) = 5; b(1, 0) = 6; b(1, 1) = 7;
  const CMat k = kron(a, b);
  CHECK(k.rows() == 4);
  CHECK(k(0, 1) == cplx(5, 0));
  CHECK(k(0, 3) == cplx(10, 0));
  CHECK(k(3, 2) == cplx(24, 0));
  CHECK(max_abs_diff(k, ref::kron(a, b)) == 0.0);

  const CMat x = random_cmat(6, 6, 7);
  const CMat y = random_cmat(5, 5, 8);
  CHECK(max_abs_diff(kron(x, y), ref::kron(x, y)) < 1e-13);
  // trace multiplicativity
  const cplx t = kron(x, y).trace() - x.trace() * y.trace();
  CHECK(std::abs(t) < 1e-12);
}

TEST_CASE("singlet and triplet projectors convert under 1 x sigma_y") {
  // (1 x sigma_y) P_phi+ (1 x sigma_y) = P_psi- exactly
  const CMat sy = pauli(2);
  const CMat op = kron(CMat::identity(2), sy);
  const CMat conv = matmul(matmul(op, bell_projector(+1)), dagger(op));
  CHECK(max_abs_diff(conv, bell_projector(-1)) < 1e-15);
}

TEST_CASE("partial trace of product states factorizes") {
  const CMat a = random_density(4, 11);
  const CMat b = random_density(3, 12);
  const CMat ab = kron(a, b);
  const std::vector<int> dims{4, 3};
  const CMat ta = partial_trace(ab, dims, {0});
  const CMat tb = partial_trace(ab, dims, {1});
  CHECK(max_abs_diff(ta, a) < 1e-12);
  CHECK(max_abs_diff(tb, b) < 1e-12);
  CHECK(max_abs_diff(ta, ref::partial_trace(ab, dims, {0})) < 1e-14);
  // trace preservation
  CHECK(std::abs(ta.trace() - cplx(1, 0)) < 1e-12);
}

TEST_CASE("partial trace of a Bell pair is maximally mixed") {
  const CMat p = bell_projector(-1);
  const CMat half = partial_trace(p, {2, 2}, {0});
  CMat expect = CMat::identity(2);
  expect *= cplx(0.5, 0);
  CHECK(max_abs_diff(half, expect) < 1e-15);
}

TEST_CASE("permute_factors relabels a product operator") {
  const CMat a = random_hermitian(2, 21);
  const CMat b = random_hermitian(3, 22);
  const CMat c = random_hermitian(2, 23);
  const CMat abc = kron(kron(a, b), c);
  // place factors as (c, a, b)
  const CMat p = permute_factors(abc, {2, 3, 2}, {2, 0, 1});
  const CMat expect = kron(kron(c, a), b);
  CHECK(max_abs_diff(p, expect) < 1e-13);
  CHECK(max_abs_diff(p, ref::permute_factors(abc, {2, 3, 2}, {2, 0, 1})) == 0.0);
  // inverse permutation restores the original
  const CMat back = permute_factors(p, {2, 2, 3}, {1, 2, 0});
  CHECK(max_abs_diff(back, abc) == 0.0);
}

TEST_CASE("embed places an operator on the right factors") {
  const CMat h = random_hermitian(2, 31);
  const std::vector<int> dims{2, 2, 2};
  const CMat e1 = embed(h, dims, {1});
  const CMat expect = kron(kron(CMat::identity(2), h), CMat::identity(2));
  CHECK(max_abs_diff(e1, expect) < 1e-15);

  // two-factor embed with reversed listing order equals a swap conjugation
  const CMat hh = random_hermitian(4, 32);
  const CMat e2 = embed(hh, dims, {2, 0});
  // kron(hh, 1) carries factor order (2, 0, 1); bring it back to (0, 1, 2)
  const CMat swapped = permute_factors(kron(hh, CMat::identity(2)), {2, 2, 2}, {1, 2, 0});
  CHECK(max_abs_diff(e2, swapped) < 1e-13);
}

TEST_CASE("apply_left/right match explicit embedding") {
  const std::vector<int> dims{2, 3, 2};
  const CMat m = random_cmat(12, 12, 41);
  const CMat op = random_cmat(4, 4, 42);
  const CMat big = embed(op, dims, {0, 2});
  CHECK(max_abs_diff(apply_left(op, {0, 2}, m, dims), matmul(big, m)) < 1e-12);
  CHECK(max_abs_diff(apply_right(m, op, {0, 2}, dims), matmul(m, big)) < 1e-12);
  CHECK(max_abs_diff(apply_left(op, {0, 2}, m, dims), ref::apply_left(op, {0, 2}, m, dims)) <
        1e-12);
  const CMat conj = conjugate_on_factors(op, {0, 2}, m, dims);
  CHECK(max_abs_diff(conj, matmul(matmul(big, m), dagger(big))) < 1e-11);
}

TEST_CASE("apply_left works on column vectors") {
  const std::vector<int> dims{2, 2};
  CMat v(4, 1);
  v(0, 0) = 1;  // |00>
  CMat x = pauli(1);
  const CMat w = apply_left(x, {1}, v, dims);
  CHECK(std::abs(w(1, 0) - cplx(1, 0)) < 1e-15);  // |01>
}

TEST_CASE("trace_of_product_real matches the explicit product") {
  const CMat a = random_cmat(9, 9, 51);
  const CMat b = random_cmat(9, 9, 52);
  const double t = trace_of_product_real(a, b);
  CHECK(t == doctest::Approx(matmul(a, b).trace().real()).epsilon(1e-12));
}

TEST_CASE("kernel argument validation") {
  const CMat m = random_cmat(8, 8, 61);
  CHECK_THROWS_AS(partial_trace(m, {2, 2, 2}, {1, 0}), ValidationError);  // not ascending
  CHECK_THROWS_AS(partial_trace(m, {2, 2, 2}, {3}), ValidationError);     // out of range
  CHECK_THROWS_AS(partial_trace(m, {2, 3}, {0}), ValidationError);        // dims mismatch
  CHECK_THROWS_AS(permute_factors(m, {2, 2, 2}, {0, 0, 1}), ValidationError);
  CHECK_THROWS_AS(embed(random_cmat(3, 3, 62), {2, 2, 2}, {0}), ValidationError);
}
