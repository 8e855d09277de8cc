#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pbt/json_io.hpp"
#include "pbt/linalg.hpp"
#include "test_helpers.hpp"

using namespace pbt;
using pbt::testing::random_density;
using pbt::testing::random_hermitian;
using pbt::testing::random_unitary;

TEST_CASE("HermitianOperator validates shape and hermiticity") {
  TensorSpace sp({"A1", "B"}, {2, 2});
  CHECK_NOTHROW(HermitianOperator(random_hermitian(4, 7), sp));
  CHECK_THROWS_AS(HermitianOperator(random_hermitian(8, 7), sp), ValidationError);
  CMat skew = random_hermitian(4, 7);
  skew(0, 1) += cplx(0.0, 1e-3);
  CHECK_THROWS_AS(HermitianOperator(skew, sp), ValidationError);
}

TEST_CASE("partial_trace_keep matches factorized states") {
  TensorSpace sp({"A1", "A2", "B"}, {2, 2, 2});
  CMat a = random_density(2, 11);
  CMat b = random_density(2, 12);
  CMat c = random_density(2, 13);
  HermitianOperator op(kron(kron(a, b), c), sp);
  CHECK(max_abs_diff(op.partial_trace_keep({"A2"}), b) < 1e-14);
  CHECK(max_abs_diff(op.partial_trace_keep({"A1", "B"}), kron(a, c)) < 1e-14);
  CHECK_THROWS_AS(op.partial_trace_keep({"Q"}), ValidationError);
}

TEST_CASE("eig on an operator diagonalizes it") {
  TensorSpace sp({"A1", "B"}, {2, 2});
  HermitianOperator op(random_hermitian(4, 21), sp);
  auto d = op.eig();
  CHECK(d.reconstruction_error < 1e-12);
}

TEST_CASE("state_fidelity: pure states, identical states, unitary invariance") {
  // orthogonal pure states
  CMat e0(2, 2), e1(2, 2);
  e0(0, 0) = 1.0;
  e1(1, 1) = 1.0;
  CHECK(state_fidelity(e0, e1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(state_fidelity(e0, e0) == doctest::Approx(1.0));

  // pure vs pure: |<a|b>|^2
  CMat plus(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) plus(i, j) = 0.5;
  CHECK(state_fidelity(e0, plus) == doctest::Approx(0.5));

  CMat r = random_density(6, 31);
  CMat s = random_density(6, 32);
  const double f = state_fidelity(r, s);
  CHECK(f > 0.0);
  CHECK(f < 1.0);
  CHECK(state_fidelity(r, r) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(state_fidelity(s, r) == doctest::Approx(f).epsilon(1e-9));

  CMat u = random_unitary(6, 33);
  CMat ru = matmul(u, matmul(r, dagger(u)));
  CMat su = matmul(u, matmul(s, dagger(u)));
  CHECK(state_fidelity(ru, su) == doctest::Approx(f).epsilon(1e-9));
}

TEST_CASE("state_fidelity bounds: qubit closed form") {
  // for qubits F = tr(r s) + 2 sqrt(det r det s)
  CMat r = random_density(2, 41);
  CMat s = random_density(2, 42);
  auto det2 = [](const CMat& m) { return (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real(); };
  double expect = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) expect += (r(i, j) * s(j, i)).real();
  expect += 2.0 * std::sqrt(det2(r) * det2(s));
  CHECK(state_fidelity(r, s) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("matrix JSON round trip preserves entries and labels") {
  TensorSpace sp({"A1", "A2", "B"}, {2, 3, 2});
  CMat m = pbt::testing::random_cmat(12, 12, 55);
  auto j = matrix_to_json(m, sp);
  CHECK(j["dims"].size() == 3);
  TensorSpace sp2;
  CMat back = matrix_from_json(j, &sp2);
  CHECK(max_abs_diff(m, back) == 0.0);
  CHECK(sp2 == sp);
}

TEST_CASE("matrix JSON defaults: missing im, generated labels") {
  nlohmann::json j;
  j["dims"] = {2};
  j["re"] = {{1.0, 0.0}, {0.0, 2.0}};
  TensorSpace sp;
  CMat m = matrix_from_json(j, &sp);
  CHECK(m(1, 1) == cplx(2.0));
  CHECK(sp.labels()[0] == "F1");
  j["im"] = {{0.0, 1.0}};  // wrong shape
  CHECK_THROWS_AS(matrix_from_json(j, nullptr), ValidationError);
}

TEST_CASE("json file io: bad path and bad syntax throw") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/x.json"), ValidationError);
  const char* path = "bad_syntax_tmp.json";
  write_text_file(path, "{not json");
  CHECK_THROWS_AS(read_json_file(path), ValidationError);
  std::remove(path);
}
