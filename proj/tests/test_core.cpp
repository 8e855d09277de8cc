#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "pbt/core.hpp"
#include "pbt/eigh.hpp"
#include "pbt/kernels.hpp"
#include "test_helpers.hpp"

using namespace pbt;

namespace {

CMat sum_states(const SignalStateSet& set) {
  CMat rho = set.states[0];
  for (std::size_t i = 1; i < set.states.size(); ++i) rho += set.states[i];
  return rho;
}

double residual_norm(const CMat& m, const std::vector<cplx>& v, double lam) {
  CMat col(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) col(i, 0) = v[i];
  CMat mv = matmul(m, col);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += std::norm(mv(i, 0) - lam * v[i]);
  return std::sqrt(acc);
}

double vec_norm(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("signal states: traces, overlaps, port sum") {
  for (int n = 1; n <= 5; ++n) {
    auto set = signal_states(n, 2, Convention::singlet);
    REQUIRE(set.states.size() == static_cast<std::size_t>(n));
    for (const auto& s : set.states) {
      CHECK(std::abs(s.trace() - cplx(1.0)) < 1e-13);
      CHECK(hermiticity_defect(s) < 1e-15);
    }
    CHECK(max_abs_diff(sum_states(set), rho_recursive(n)) < 1e-14);
  }
  auto two = signal_states(2, 2, Convention::singlet);
  CHECK(trace_of_product_real(two.states[0], two.states[1]) == doctest::Approx(0.125));
}

TEST_CASE("signal states: conventions related by a one-qubit rotation on B") {
  // sigma_y on B maps the pair-sum projector onto the singlet one
  CMat sy(2, 2);
  sy(0, 1) = cplx(0.0, -1.0);
  sy(1, 0) = cplx(0.0, 1.0);
  for (int n : {1, 2, 3}) {
    auto sing = signal_states(n, 2, Convention::singlet);
    auto plus = signal_states(n, 2, Convention::phi_plus);
    for (int i = 0; i < n; ++i) {
      CMat rotated = conjugate_on_factors(sy, {n}, plus.states[i], plus.space.dims());
      CHECK(max_abs_diff(rotated, sing.states[i]) < 1e-14);
    }
  }
}

TEST_CASE("size caps and validation") {
  CHECK_THROWS_AS(signal_states(12, 2, Convention::singlet), ResourceError);
  CHECK_NOTHROW(signal_states(5, 4, Convention::phi_plus));  // 4^6 = 4096 exactly
  CHECK_THROWS_AS(signal_states(6, 4, Convention::phi_plus), ResourceError);
  CHECK_THROWS_AS(signal_states(0, 2, Convention::singlet), ValidationError);
  CHECK_THROWS_AS(signal_states(2, 1, Convention::phi_plus), ValidationError);
  CHECK_THROWS_AS(signal_states(2, 3, Convention::singlet), ValidationError);
  CHECK_THROWS_AS(fidelity_closed_form(51), ResourceError);
  CHECK_THROWS_AS(fidelity_blocks(51), ResourceError);
  CHECK_THROWS_AS(rho_spectrum(51), ResourceError);
  CHECK_THROWS_AS(convention_from_name("bell"), ValidationError);
  CHECK(convention_from_name(convention_name(Convention::phi_plus)) == Convention::phi_plus);
}

TEST_CASE("analytic spectrum matches dense diagonalization") {
  for (int n = 1; n <= 6; ++n) {
    auto spec = rho_spectrum(n);
    CHECK(spec.total_dimension() == (std::int64_t{1} << (n + 1)));
    std::vector<double> predicted;
    for (const auto& line : spec.lines)
      predicted.insert(predicted.end(), static_cast<std::size_t>(line.degeneracy),
                       line.eigenvalue);
    std::sort(predicted.begin(), predicted.end());

    auto dec = eigh(sum_states(signal_states(n, 2, Convention::singlet)));
    REQUIRE(dec.eigenvalues.size() == predicted.size());
    for (std::size_t k = 0; k < predicted.size(); ++k)
      CHECK(std::abs(dec.eigenvalues[k] - predicted[k]) < 1e-12);
    // rank deficiency: the top-spin minus line sits at eigenvalue zero
    int zeros = 0;
    for (double w : dec.eigenvalues)
      if (w < 1e-12) ++zeros;
    CHECK(zeros == n + 2);
  }
}

TEST_CASE("every analytic eigenvector hits its eigenvalue") {
  for (int n = 1; n <= 4; ++n) {
    const CMat rho = sum_states(signal_states(n, 2, Convention::singlet));
    std::map<std::pair<std::string, int>, double> lam;
    for (const auto& line : rho_spectrum(n).lines) lam[{line.branch, line.two_j}] = line.eigenvalue;
    int count = 0;
    for (const auto& path : su2::coupling_paths(n)) {
      const int two_j = path.back();
      for (const char* branch : {"minus", "plus"}) {
        const int two_J = branch[0] == 'm' ? two_j + 1 : two_j - 1;
        if (two_J < 0) continue;
        for (int two_m = -two_J; two_m <= two_J; two_m += 2) {
          const auto v = psi_eigenvector(n, branch, two_j, two_m, path);
          CHECK(std::abs(vec_norm(v) - 1.0) < 1e-12);
          CHECK(residual_norm(rho, v, lam.at({branch, two_j})) < 1e-12);
          ++count;
        }
      }
    }
    CHECK(count == (1 << (n + 1)));  // the eigenvectors exhaust the space
  }
  CHECK_THROWS_AS(psi_eigenvector(2, "up", 2, 0, {1, 2}), ValidationError);
  CHECK_THROWS_AS(psi_eigenvector(2, "plus", 0, 1, {1, 0}), ValidationError);
  CHECK_THROWS_AS(psi_eigenvector(2, "minus", 2, 5, {1, 2}), ValidationError);
  CHECK_THROWS_AS(psi_eigenvector(2, "minus", 2, 1, {1, 0}), ValidationError);
}

TEST_CASE("square-root measurement: completeness and positivity") {
  for (int n = 1; n <= 5; ++n) {
    auto set = signal_states(n, 2, Convention::singlet);
    auto povm = srm_povm(set);
    REQUIRE(povm.elements.size() == static_cast<std::size_t>(n));
    CHECK(povm.completeness_defect < 1e-12);
    for (const auto& e : povm.elements) {
      CHECK(hermiticity_defect(e) < 1e-12);
      CHECK(psd_check(e, 1e-9).ok);
    }
  }
  // the kernel completion term carries no weight against the signals
  auto set = signal_states(2, 2, Convention::singlet);
  auto povm = srm_povm(set);
  CHECK(trace_of_product_real(povm.elements[0], set.states[0]) ==
        doctest::Approx(0.9330127018922192).epsilon(1e-12));
}

TEST_CASE("xi vectors: signal eigenvectors with flat overlap spectrum") {
  CHECK(c_coefficient(2, 1) == doctest::Approx(1.3660254037844386).epsilon(1e-14));
  CHECK(c_coefficient(1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(c_coefficient(3, 1), ValidationError);  // parity
  CHECK_THROWS_AS(c_coefficient(3, 4), ValidationError);  // beyond spectators
  CHECK_THROWS_AS(xi_vector(2, 2, su2::SpinLabel{1, 1, {1}}), ValidationError);
  CHECK_THROWS_AS(xi_vector(1, 0, su2::SpinLabel{1, 1, {1}}), ValidationError);

  for (int n = 1; n <= 4; ++n) {
    auto set = signal_states(n, 2, Convention::singlet);
    std::vector<su2::SpinLabel> labels;
    if (n == 1)
      labels.push_back({0, 0, {}});
    else
      labels = su2::build_coupled_basis(n - 1).labels;
    const double lam = std::ldexp(1.0, -(n - 1));
    for (int i = 0; i < n; ++i) {
      for (const auto& l : labels) {
        const auto v = xi_vector(n, i, l);
        CHECK(std::abs(vec_norm(v) - 1.0) < 1e-12);
        CHECK(residual_norm(set.states[static_cast<std::size_t>(i)], v, lam) < 1e-12);
      }
      CHECK(matrix_element_check(n, i) < 1e-10);
    }
  }
}

TEST_CASE("fidelity: frozen closed-form values") {
  const std::map<int, double> frozen = {
      {1, 0.24999999999999994}, {2, 0.46650635094610976},  {3, 0.625},
      {4, 0.732838894363083},   {5, 0.8038604626844723},   {6, 0.8502224117771747},
      {10, 0.9257901780517473}, {20, 0.9637155116784856},  {30, 0.9755716540981059},
      {50, 0.9852136291510386}};
  for (const auto& [n, F] : frozen) {
    const auto rep = fidelity_closed_form(n);
    CHECK(std::abs(rep.F - F) < 1e-13);
    CHECK(std::abs(rep.f - (2.0 * F + 1.0) / 3.0) < 1e-13);
    CHECK(rep.method == "closed_form");
    CHECK(rep.d == 2);
  }
  CHECK(fidelity_closed_form(2).f == doctest::Approx(0.6443375672974065).epsilon(1e-14));
  CHECK(fidelity_closed_form(50).f == doctest::Approx(0.9901424194340258).epsilon(1e-14));
}

TEST_CASE("fidelity: the two analytic routes agree everywhere") {
  for (int n = 1; n <= 50; ++n) {
    const auto closed = fidelity_closed_form(n);
    const auto blocks = fidelity_blocks(n);
    CHECK(std::abs(closed.F - blocks.F) < 1e-12);
    CHECK(blocks.method == "block");
  }
}

TEST_CASE("fidelity: dense route reproduces the analytic one") {
  for (int n = 1; n <= 5; ++n) {
    auto set = signal_states(n, 2, Convention::singlet);
    const auto dense = fidelity_dense(set, srm_povm(set));
    CHECK(std::abs(dense.F - fidelity_closed_form(n).F) < 1e-10);
    CHECK(dense.method == "dense");

    // unitary freedom of the pair convention leaves the figure unchanged
    auto plus = signal_states(n, 2, Convention::phi_plus);
    const auto dense_plus = fidelity_dense(plus, srm_povm(plus));
    CHECK(std::abs(dense_plus.F - dense.F) < 1e-10);
  }
}

TEST_CASE("fidelity: dense route with an explicit encoding") {
  auto set = signal_states(2, 2, Convention::singlet);
  auto povm = srm_povm(set);
  CMat id = CMat::identity(4);
  const auto plain = fidelity_dense(set, povm);
  const auto enc = fidelity_dense(set, povm, &id);
  CHECK(enc.F == doctest::Approx(plain.F).epsilon(1e-14));
  CMat bad = CMat::identity(4);
  bad *= cplx(2.0);
  CHECK_THROWS_AS(fidelity_dense(set, povm, &bad), ValidationError);
  CMat wrong_shape = CMat::identity(8);
  CHECK_THROWS_AS(fidelity_dense(set, povm, &wrong_shape), ValidationError);
}

TEST_CASE("fidelity: qutrit pair-sum values") {
  const std::map<int, std::pair<double, double>> frozen = {
      {2, {0.215867671287, 0.411900753465}},
      {3, {0.313984449717, 0.485488337288}},
  };
  for (const auto& [n, Ff] : frozen) {
    auto set = signal_states(n, 3, Convention::phi_plus);
    const auto rep = fidelity_dense(set, srm_povm(set));
    CHECK(rep.F == doctest::Approx(Ff.first).epsilon(1e-9));
    CHECK(rep.f == doctest::Approx(Ff.second).epsilon(1e-9));
    // with this few ports a qutrit still loses to the classical strategy
    CHECK(rep.f < classical_fidelity_limit(3));
  }
}

TEST_CASE("asymptotics: f climbs, the scaled gap settles near one") {
  double prev = 0.0;
  for (int n = 1; n <= 50; ++n) {
    const double f = fidelity_closed_form(n).f;
    CHECK(f > prev);
    prev = f;
  }
  CHECK(asymptotic_gap(10) == doctest::Approx(0.9894642926433694).epsilon(1e-12));
  CHECK(asymptotic_gap(20) == doctest::Approx(0.9675863552403863).epsilon(1e-12));
  CHECK(asymptotic_gap(50) == doctest::Approx(0.9857580565974189).epsilon(1e-12));
  CHECK(std::abs(asymptotic_gap(50) - 1.0) < std::abs(asymptotic_gap(20) - 1.0));
  for (int n = 20; n <= 50; n += 10) {
    CHECK(asymptotic_gap(n) > 0.8);
    CHECK(asymptotic_gap(n) < 1.3);
  }
  CHECK(classical_fidelity_limit(2) == doctest::Approx(2.0 / 3.0));
}
