#include <doctest.h>

#include <Eigen/SVD>

#include "backstep/errors.hpp"
#include "backstep/polynomial.hpp"
#include "backstep/problem.hpp"
#include "fixtures.hpp"

using namespace backstep;
using namespace fixtures;

TEST_CASE("polynomial evaluation and derivative") {
  const Polynomial p{1.0, -2.0, 3.0};
  CHECK(p(2.0) == doctest::Approx(9.0));
  CHECK(p.derivative()(2.0) == doctest::Approx(10.0));
  CHECK(Polynomial{0.0, 0.0}.is_zero());
  CHECK(Polynomial{}.degree() == -1);
  const auto [lo, hi] = extrema_on_unit_interval(Polynomial{0.0, 1.0, -1.0});
  CHECK(lo.value == doctest::Approx(0.0));
  CHECK(hi.value == doctest::Approx(0.25));
  CHECK(hi.at == doctest::Approx(0.5));
}

TEST_CASE("ordered constant diffusivities are valid") {
  ProblemSpec s = ProblemSpec::zeros(2);
  s.sigma[0] = Polynomial{2.0};
  s.sigma[1] = Polynomial{1.0};
  s.phi_at(0, 1) = Polynomial{3.0};
  s.lambda_at(1, 0) = Polynomial{-7.0};
  CHECK_NOTHROW(validate_problem(s, Grid{16, 1e-3}));
}

TEST_CASE("equal diffusivities are rejected") {
  ProblemSpec s = ProblemSpec::zeros(2);
  s.sigma[0] = Polynomial{1.0};
  s.sigma[1] = Polynomial{1.0};
  CHECK_THROWS_AS(validate_problem(s, Grid{16, 1e-3}), OrderingViolation);
}

TEST_CASE("ordering violated only inside the interval is found") {
  // eps1 - eps2 = (x - 1/2)^2 touches zero at x = 1/2
  ProblemSpec s = ProblemSpec::zeros(2);
  s.sigma[0] = Polynomial{1.25, -1.0, 1.0};
  s.sigma[1] = Polynomial{1.0};
  try {
    validate_problem(s, Grid{16, 1e-3});
    FAIL("expected OrderingViolation");
  } catch (const OrderingViolation& e) {
    CHECK(e.index == 0);
    CHECK(e.at == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("non-positive diffusivity is rejected") {
  ProblemSpec s = ProblemSpec::zeros(1);
  s.sigma[0] = Polynomial{0.5, -1.0};
  CHECK_THROWS_AS(validate_problem(s, Grid{16, 1e-3}), NonPositiveDiffusivity);
}

TEST_CASE("single varying diffusivity is valid") {
  ProblemSpec s = scalar(1.0, 5.0);
  s.sigma[0] = Polynomial{1.0, 1.0};
  CHECK_NOTHROW(validate_problem(s, Grid{16, 1e-3}));
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(validate_problem(scalar(1, 0), Grid{4, 1e-3}), InvalidProblem);
  CHECK_THROWS_AS(validate_problem(scalar(1, 0), Grid{16, 0.0}), InvalidProblem);
  for (int m : {8, 13, 64}) {
    const Grid g{m, 1e-3};
    CHECK(g.triangle_nodes() == static_cast<std::size_t>((m + 1) * (m + 2) / 2));
    std::size_t expect = 0;
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= a; ++b) CHECK(Grid::tri(a, b) == expect++);
  }
}

TEST_CASE("coefficient bounds") {
  SUBCASE("zero advection") {
    const auto b = coefficient_bounds(validate_problem(unstable_pair(), Grid{16, 1e-3}));
    CHECK(b.p == 0.0);
    CHECK(b.eps_lo == doctest::Approx(1.0));
    CHECK(b.eps_hi == doctest::Approx(2.0));
    CHECK(b.eps_prime_hi == 0.0);
    CHECK_FALSE(b.g.has_value());
  }
  SUBCASE("unit scalar diffusivity") {
    const auto b = coefficient_bounds(validate_problem(scalar(1.0, 3.0), Grid{16, 1e-3}));
    CHECK(b.eps_lo == 1.0);
    CHECK(b.eps_hi == 1.0);
    CHECK(b.eps_prime_hi == 0.0);
  }
  SUBCASE("constant nilpotent advection has p = 1.01") {
    ProblemSpec s = unstable_pair();
    s.phi_at(0, 1) = Polynomial{1.0};
    const auto b = coefficient_bounds(validate_problem(s, Grid{16, 1e-3}));
    Matrix phi(2, 2);
    phi << 0, 1, 0, 0;
    const double sv = Eigen::JacobiSVD<Matrix>(phi).singularValues()(0);
    CHECK(b.p == doctest::Approx(1.01 * sv).epsilon(1e-12));
  }
  SUBCASE("p scales with advection") {
    const auto b1 = coefficient_bounds(validate_problem(variable_pair(), Grid{16, 1e-3}));
    ProblemSpec s = variable_pair();
    s.phi_at(0, 1) = s.phi_at(0, 1).scaled(3.0);
    const auto b3 = coefficient_bounds(validate_problem(s, Grid{16, 1e-3}));
    CHECK(b3.p == doctest::Approx(3.0 * b1.p).epsilon(1e-12));
  }
  SUBCASE("bounds dominate a fine sampling") {
    const ValidatedProblem vp = validate_problem(variable_pair(), Grid{16, 1e-3});
    const auto b = coefficient_bounds(vp);
    for (int k = 0; k <= 1000; ++k) {
      const double x = k / 1000.0;
      CHECK(vp.phi(x).operatorNorm() <= b.p);
      for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(vp.eps_prime(i, x)) <= b.eps_prime_hi);
        CHECK(vp.eps(i, x) >= b.eps_lo);
        CHECK(vp.eps(i, x) <= b.eps_hi);
      }
    }
  }
}
