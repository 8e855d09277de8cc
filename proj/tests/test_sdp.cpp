#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pbt/core.hpp"
#include "pbt/eigh.hpp"
#include "pbt/kernels.hpp"
#include "pbt/sdp.hpp"
#include "test_helpers.hpp"

using namespace pbt;

namespace {

double min_eig(const CMat& m) { return eigh(m).eigenvalues.front(); }

// residual of one equality row against complex candidate blocks
double row_residual(const SdpConstraint& con, const std::vector<CMat>& blocks) {
  cplx acc{};
  for (const auto& [bi, coeff] : con.blocks)
    for (const auto& e : coeff.entries) acc += e.val * blocks[bi](e.col, e.row);
  return std::abs(acc - cplx(con.rhs));
}

double max_equality_residual(const SdpInstance& inst, const std::vector<CMat>& blocks) {
  double worst = 0.0;
  for (const auto& con : inst.constraints)
    worst = std::max(worst, row_residual(con, blocks));
  return worst;
}

SdpInstance min_eigenvalue_instance(const CMat& c) {
  SdpInstance inst;
  inst.block_dims = {c.rows()};
  inst.objective = {c};
  SparseHermitian tr{c.rows(), {}};
  for (std::size_t i = 0; i < c.rows(); ++i) tr.entries.push_back({i, i, cplx(1.0)});
  SdpConstraint con;
  con.blocks.emplace_back(0, std::move(tr));
  con.rhs = 1.0;
  inst.constraints.push_back(std::move(con));
  return inst;
}

}  // namespace

TEST_CASE("sparse coordinate form round-trips and rejects asymmetry") {
  const CMat h = testing::random_hermitian(5, 404);
  const auto s = SparseHermitian::from_dense(h, 0.0);
  CHECK(max_abs_diff(s.to_dense(), h) == 0.0);

  SparseHermitian bad{2, {{0, 1, cplx(1.0)}}};  // missing the mirror entry
  CHECK_THROWS_AS(bad.check_hermitian(), ValidationError);
  SparseHermitian oob{2, {{0, 3, cplx(1.0)}, {3, 0, cplx(1.0)}}};
  CHECK_THROWS_AS(oob.check_hermitian(), ValidationError);
  CHECK_THROWS_AS(SparseHermitian::from_dense(testing::random_cmat(3, 3, 7)), ValidationError);
}

TEST_CASE("generic solve finds the smallest eigenvalue of a hermitian matrix") {
  const CMat c = testing::random_hermitian(6, 909);
  const double lam = min_eig(c);
  const auto sol = solve(min_eigenvalue_instance(c));
  CHECK(sol.n == 0);
  CHECK(std::abs(sol.primal_value - lam) < 1e-6);
  CHECK(std::abs(sol.dual_value - lam) < 1e-6);
  CHECK(sol.gap >= -1e-9);
  CHECK(sol.gap < 1e-6);
  CHECK(std::abs(sol.dual_y[0] - lam) < 1e-6);  // multiplier of tr Z = 1
  CHECK(sol.primal_residual < 1e-8);
  CHECK(sol.dual_residual < 1e-8);
  // minimizer concentrates on the bottom eigenvector
  CHECK(std::abs(trace_of_product_real(c, sol.primal_blocks[0]) - lam) < 1e-6);
}

TEST_CASE("generic solve handles coupled blocks") {
  const CMat c1 = testing::random_hermitian(4, 11);
  const CMat c2 = testing::random_hermitian(3, 22);
  SdpInstance inst;
  inst.block_dims = {4, 3};
  inst.objective = {c1, c2};
  // one unit of trace split freely between the two blocks
  SdpConstraint con;
  SparseHermitian t1{4, {}}, t2{3, {}};
  for (std::size_t i = 0; i < 4; ++i) t1.entries.push_back({i, i, cplx(1.0)});
  for (std::size_t i = 0; i < 3; ++i) t2.entries.push_back({i, i, cplx(1.0)});
  con.blocks.emplace_back(0, t1);
  con.blocks.emplace_back(1, t2);
  con.rhs = 1.0;
  inst.constraints.push_back(con);
  const double lam = std::min(min_eig(c1), min_eig(c2));
  const auto sol = solve(inst);
  CHECK(std::abs(sol.primal_value - lam) < 1e-6);
}

TEST_CASE("instance validation rejects malformed input") {
  CHECK_THROWS_AS(SdpInstance{}.validate(), ValidationError);

  auto inst = min_eigenvalue_instance(testing::random_hermitian(3, 5));
  auto broken = inst;
  broken.objective[0] = testing::random_cmat(3, 3, 6);  // not hermitian
  CHECK_THROWS_AS(broken.validate(), ValidationError);

  broken = inst;
  broken.constraints[0].blocks[0].first = 4;  // block index out of range
  CHECK_THROWS_AS(broken.validate(), ValidationError);

  broken = inst;
  broken.constraints[0].blocks[0].second.dim = 2;  // wrong coefficient size
  CHECK_THROWS_AS(broken.validate(), ValidationError);

  broken = inst;
  broken.constraints.clear();
  CHECK_THROWS_AS(broken.validate(), ValidationError);

  CHECK_THROWS_AS(solve(inst, {0.0, 200, 0.98}), ValidationError);
  CHECK_THROWS_AS(solve(inst, {1e-7, 0, 0.98}), ValidationError);

  SdpWarmStart warm;  // wrong block count
  CHECK_THROWS_AS(solve(inst, {}, &warm), ValidationError);

  CHECK_THROWS_AS(instance_objective(inst, {}), ValidationError);
}

TEST_CASE("port program has one block per port plus the resource block") {
  const auto inst = build_primary(1, 2);
  REQUIRE(inst.block_dims.size() == 2);
  CHECK(inst.block_dims[0] == 4);
  CHECK(inst.block_dims[1] == 2);
  CHECK(inst.n == 1);
  CHECK(inst.d == 2);
  CHECK(inst.convention == Convention::singlet);
  // full entrywise pinning plus the normalization row
  REQUIRE(inst.constraints.size() == 17);
  for (std::size_t k = 0; k + 1 < inst.constraints.size(); ++k)
    CHECK(inst.constraints[k].rhs == 0.0);
  CHECK(inst.constraints.back().rhs == 2.0);
  CHECK(inst.constraints.back().blocks.size() == 1);
  CHECK(inst.constraints.back().blocks[0].first == 1);

  // objective carries -sigma_i / d^2
  const auto set = signal_states(1, 2, Convention::singlet);
  CMat expect = set.states[0];
  expect *= cplx(-0.25);
  CHECK(max_abs_diff(inst.objective[0], expect) < 1e-15);
  CHECK(max_abs(inst.objective[1]) == 0.0);
}

TEST_CASE("pinning rows form an orthonormal basis tied to the partial trace") {
  const auto inst = build_primary(1, 2);
  const std::vector<int> dims{2, 2};
  // orthonormality and completeness: expanding a random hermitian matrix in
  // the row coefficients and resumming reproduces it
  const CMat h = testing::random_hermitian(4, 321);
  CMat resum(4, 4);
  for (std::size_t k = 0; k + 1 < inst.constraints.size(); ++k) {
    const CMat e = inst.constraints[k].blocks[0].second.to_dense();
    CHECK(std::abs(trace_of_product_real(e, e) - 1.0) < 1e-14);
    cplx w{};
    for (const auto& ent : inst.constraints[k].blocks[0].second.entries)
      w += ent.val * h(ent.col, ent.row);
    CMat term = e;
    term *= w;
    resum += term;
  }
  CHECK(max_abs_diff(resum, h) < 1e-13);

  // the resource coefficient of every row is minus the B-marginal of the
  // full-space coefficient
  for (std::size_t k = 0; k + 1 < inst.constraints.size(); ++k) {
    const auto& con = inst.constraints[k];
    const CMat e = con.blocks[0].second.to_dense();
    CMat marg = partial_trace(e, dims, {0});
    marg *= cplx(-1.0);
    CMat coeff(2, 2);
    if (con.blocks.size() == 2) coeff = con.blocks[1].second.to_dense();
    CHECK(max_abs_diff(coeff, marg) < 1e-15);
  }
}

TEST_CASE("port program rejects oversized builds unless overridden") {
  CHECK_NOTHROW(build_primary(5, 2));  // 64-dimensional, right at the cap
  CHECK_THROWS_AS(build_primary(6, 2), ResourceError);
  CHECK_NOTHROW(build_primary(6, 2, true));
  CHECK_THROWS_AS(build_primary(3, 3), ResourceError);
}

TEST_CASE("square-root measurement start is strictly feasible") {
  const auto inst = build_primary(2, 2);
  const auto warm = srm_warm_start(2, 2);
  REQUIRE(warm.primal_blocks.size() == 3);
  CHECK(max_equality_residual(inst, warm.primal_blocks) < 1e-12);
  for (const auto& b : warm.primal_blocks) CHECK(min_eig(b) > 1e-3);

  // the unmixed measurement itself scores exactly the dense fidelity
  const auto set = signal_states(2, 2, Convention::singlet);
  const auto povm = srm_povm(set);
  std::vector<CMat> pure = povm.elements;
  pure.push_back(CMat::identity(4));
  const double f_srm = fidelity_dense(set, povm).F;
  CHECK(std::abs(-instance_objective(inst, pure) - f_srm) < 1e-14);
}

TEST_CASE("solver reproduces the known optima for few ports") {
  const auto s1 = solve(build_primary(1, 2));
  CHECK(std::abs(s1.primal_value - 0.25) < 1e-6);
  CHECK(s1.gap >= -1e-9);
  CHECK(s1.gap <= 1e-7);
  CHECK(s1.primal_residual < 1e-8);

  const auto s2 = solve(build_primary(2, 2));
  CHECK(std::abs(s2.primal_value - 0.5) < 1e-6);
  CHECK(s2.gap >= -1e-9);
  CHECK(s2.gap <= 1e-7);

  const auto s3 = solve(build_primary(3, 2));
  CHECK(std::abs(s3.primal_value - 0.6545084971874737) < 1e-6);

  // strictly increasing in the number of ports, and the optimum at three
  // ports beats the square-root measurement there
  CHECK(s1.primal_value < s2.primal_value);
  CHECK(s2.primal_value < s3.primal_value);
  CHECK(s3.primal_value > fidelity_closed_form(3).F + 1e-3);
  for (int n = 1; n <= 3; ++n) {
    const double f_srm = fidelity_closed_form(n).F;
    const auto sol = n == 1 ? s1 : (n == 2 ? s2 : s3);
    CHECK(sol.primal_value >= f_srm - 1e-7);
    CHECK(sol.dual_value >= sol.primal_value - 1e-9);  // weak duality
  }
}

TEST_CASE("dual solution is a feasible operator certificate") {
  const auto sol = solve(build_primary(3, 2));
  const auto set = signal_states(3, 2, Convention::singlet);
  REQUIRE(sol.omega.m.rows() == 16);
  for (const auto& sigma : set.states) {
    CMat diff = sol.omega.m;
    diff -= sigma;
    CHECK(min_eig(diff) >= -1e-12);  // interior dual iterates stay feasible
  }
  const CMat marg = sol.omega.partial_trace_keep({"A1", "A2", "A3"});
  CMat slack = CMat::identity(8);
  slack *= cplx(sol.a);
  slack -= marg;
  CHECK(min_eig(slack) >= -1e-12);
  // certified value reads off the normalization dual variable
  CHECK(std::abs(2.0 * sol.a - sol.dual_value) < 1e-12);
}

TEST_CASE("warm start lands on the same optimum") {
  const auto inst = build_primary(2, 2);
  const auto warm = srm_warm_start(2, 2);
  const auto cold = solve(inst);
  const auto hot = solve(inst, {}, &warm);
  CHECK(std::abs(cold.primal_value - hot.primal_value) < 1e-7);
}

TEST_CASE("repeat solves are bit-identical") {
  const auto a = solve(build_primary(2, 2));
  const auto b = solve(build_primary(2, 2));
  CHECK(a.primal_value == b.primal_value);
  CHECK(a.dual_value == b.dual_value);
  CHECK(a.gap == b.gap);
  CHECK(a.iterations == b.iterations);
  CHECK(max_abs_diff(a.primal_blocks.back(), b.primal_blocks.back()) == 0.0);
}

TEST_CASE("iteration cap raises a convergence error that reports progress") {
  SdpOptions tight;
  tight.max_iter = 2;
  bool thrown = false;
  try {
    solve(build_primary(2, 2), tight);
  } catch (const ConvergenceError& e) {
    thrown = true;
    CHECK(e.iterations == 2);
    CHECK(e.gap > 0.0);
    CHECK(std::isfinite(e.gap));
  }
  CHECK(thrown);
}

TEST_CASE("identity resource extraction returns the measurement unchanged") {
  const auto set = signal_states(2, 2, Convention::singlet);
  const auto povm = srm_povm(set);
  SdpSolution sol;
  sol.n = 2;
  sol.d = 2;
  sol.convention = Convention::singlet;
  sol.primal_blocks = povm.elements;
  sol.primal_blocks.push_back(CMat::identity(4));
  const auto ex = extract_resource(sol);
  CHECK(max_abs_diff(ex.o, CMat::identity(4)) < 1e-12);
  CHECK(max_abs_diff(ex.support, CMat::identity(4)) < 1e-12);
  REQUIRE(ex.povm.elements.size() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(max_abs_diff(ex.povm.elements[i], povm.elements[i]) < 1e-12);
  CHECK(ex.povm.completeness_defect < 1e-12);

  SdpSolution generic;  // n = 0 marks a generic instance
  CHECK_THROWS_AS(extract_resource(generic), ValidationError);
}

TEST_CASE("extracted protocol replays the optimal value through the dense route") {
  const auto sol = solve(build_primary(2, 2));
  const auto ex = extract_resource(sol);
  CHECK(ex.povm.completeness_defect < 1e-9);
  for (const auto& el : ex.povm.elements) CHECK(min_eig(el) > -1e-9);
  const auto set = signal_states(2, 2, Convention::singlet);
  const auto rep = fidelity_dense(set, ex.povm, &ex.o);
  CHECK(std::abs(rep.F - sol.primal_value) < 1e-6);
  CHECK(rep.method == "dense");
}

TEST_CASE("convention choice does not move the optimum") {
  const auto a = solve(build_primary(2, 2, Convention::singlet));
  const auto b = solve(build_primary(2, 2, Convention::phi_plus));
  CHECK(std::abs(a.primal_value - b.primal_value) < 1e-6);
  CHECK(b.convention == Convention::phi_plus);
}

TEST_CASE("qutrit optimum saturates the port-counting bound") {
  // with n <= d the program reaches n/d^2 exactly
  const auto s1 = solve(build_primary(1, 3));
  CHECK(std::abs(s1.primal_value - 1.0 / 9.0) < 1e-6);
  const auto s2 = solve(build_primary(2, 3));
  CHECK(std::abs(s2.primal_value - 2.0 / 9.0) < 1e-6);
  // strictly above the square-root measurement there
  CHECK(s2.primal_value > 0.22);
}
