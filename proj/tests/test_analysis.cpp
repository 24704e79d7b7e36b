#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "backstep/analysis.hpp"
#include "backstep/errors.hpp"
#include "fixtures.hpp"

using namespace backstep;
using namespace fixtures;

namespace {

CoefficientBounds bounds(double p, double lo, double hi, double dprime, std::optional<double> g) {
  CoefficientBounds b;
  b.p = p;
  b.eps_lo = lo;
  b.eps_hi = hi;
  b.eps_prime_hi = dprime;
  b.g = g;
  return b;
}

Matrix brute_lql(const Vector& q) {
  const int n = static_cast<int>(q.size());
  Matrix L = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) L(i, j) = 1.0;
  return L.transpose() * q.asDiagonal() * L;
}

}  // namespace

TEST_CASE("constants at zero bounds") {
  const Constants k = compute_constants(bounds(0, 1, 1, 0, 0.0));
  CHECK(k.K5 == 1.0);
  CHECK(k.K6 == -1.75);
  CHECK(k.K8 == 0.0);
  CHECK_FALSE(k.alphas.a2.has_value());
  CHECK_FALSE(k.alphas.a3.has_value());
  CHECK_FALSE(k.alphas.a4.has_value());
  CHECK(compute_cstar(k, 1.0) == 0.5);
}

TEST_CASE("constants with unit advection") {
  const Constants k = compute_constants(bounds(1, 1, 1, 0, 0.0));
  CHECK(k.K5 == 3.0);
  CHECK(k.K6 == doctest::Approx(13.0 / 4));
  CHECK(compute_cstar(k, 1.0) == doctest::Approx(7.0 / 4));
  CHECK(*k.alphas.a3 == doctest::Approx(1.0 / 3));
}

TEST_CASE("missing g") {
  CHECK_THROWS_AS(compute_constants(bounds(0, 1, 1, 0, std::nullopt)), MissingBound);
}

TEST_CASE("K5 is affine in p with slope 2") {
  const double k0 = compute_constants(bounds(0.0, 1, 2, 0.3, 1.0)).K5;
  for (double p : {0.5, 1.0, 4.0})
    CHECK(compute_constants(bounds(p, 1, 2, 0.3, 1.0)).K5 == doctest::Approx(k0 + 2 * p));
}

TEST_CASE("benchmark constants match an independent evaluation") {
  const ValidatedProblem vp = validate_problem(variable_pair(1.0), Grid{32, 1e-4});
  const KernelField f = solve_kernel(vp, vec({3.0, 3.0}));
  const GMatrix G = extract_G(f, vp);
  const CoefficientBounds b = with_g(coefficient_bounds(vp), G);
  const Constants k = compute_constants(b);
  double g = 0.0;
  for (const Matrix& m : G.g) g = std::max(g, m.cwiseAbs().maxCoeff());
  const double p = b.p, e = b.eps_lo, d = b.eps_prime_hi;
  CHECK(std::abs(*b.g - g) <= 1e-12 * g);
  CHECK(std::abs(k.K5 - (1 + 2 * p)) <= 1e-12);
  CHECK(std::abs(k.K6 - (2 * p + e / 4 + 3 * (d * d + p * p) / e - 2 * e)) <= 1e-12);
  CHECK(std::abs(k.K8 - g * g * (1 + 1 / (3 * e)) / 2) <= 1e-12);
  CHECK(std::abs(*k.alphas.a2 - e / (3 * d)) <= 1e-12);
  CHECK(std::abs(*k.alphas.a4 - e / (3 * g)) <= 1e-12);
}

TEST_CASE("c* depends on Sigma and Phi bounds only") {
  auto cstar_of = [](const ProblemSpec& s) {
    const ValidatedProblem vp = validate_problem(s, Grid{16, 1e-4});
    CoefficientBounds b = coefficient_bounds(vp);
    b.g = 1.0;
    return compute_cstar(compute_constants(b), b.eps_lo);
  };
  ProblemSpec s = variable_pair(1.0);
  const double base = cstar_of(s);
  s.lambda_at(1, 0) = Polynomial{-40.0, 3.0};
  CHECK(cstar_of(s) == base);
  s.phi_at(0, 1) = s.phi_at(0, 1).scaled(2.0);
  CHECK(cstar_of(s) >= base);
}

TEST_CASE("margin") {
  CHECK(margin(vec({1.5, 2.0}), 0.5) == 1.0);
  CHECK(margin(vec({0.2}), 0.5) == doctest::Approx(-0.3));
}

TEST_CASE("lql closed formula") {
  CHECK(lql(vec({3.0})).isZero());
  Matrix expect(3, 3);
  expect << 5, 3, 0, 3, 3, 0, 0, 0, 0;
  CHECK(lql(vec({1, 2, 3})) == expect);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int n = 1; n <= 8; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      Vector q(n);
      for (int i = 0; i < n; ++i) q(i) = u(rng);
      const Matrix m = lql(q);
      CHECK((m - brute_lql(q)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(m == m.transpose());
      CHECK(m.row(n - 1).isZero());
    }
}

TEST_CASE("cyclic Jacobi against a dense eigensolver") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 8; ++n) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    a = (a + a.transpose()).eval();
    const auto ev = jacobi_eigenvalues(a);
    const Vector ref = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues();
    for (int i = 0; i < n; ++i) CHECK(ev[static_cast<std::size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-10));
  }
}

TEST_CASE("build_Q worked examples") {
  SUBCASE("n = 1") {
    const QConstruction q = build_Q(1, 2.0, 0.8);
    CHECK(q.q(0) == 1.0);
    CHECK(q.min_eig_r == doctest::Approx(0.2));
  }
  SUBCASE("n = 2, K8 = 1, eps = 1") {
    const QConstruction q = build_Q(2, 1.0, 1.0);
    CHECK(q.q(1) == 0.125);
    CHECK(q.R(0, 0) == 0.125);
    CHECK(q.R(1, 1) == 0.03125);
    CHECK(q.R(0, 1) == 0.0);
    CHECK(q.min_eig_r == 0.03125);
  }
  SUBCASE("n = 6 against a dense eigensolver") {
    const QConstruction q = build_Q(6, 1.0, 1.0);
    Matrix R = -lql(q.q);
    R.diagonal() += 0.25 * q.q;
    const double ref = Eigen::SelfAdjointEigenSolver<Matrix>(R).eigenvalues()(0);
    CHECK(ref > 0.0);
    CHECK(q.min_eig_r == doctest::Approx(ref).epsilon(1e-10));
  }
  SUBCASE("K8 = 0 gives the identity") {
    const QConstruction q = build_Q(4, 0.0, 2.0);
    CHECK(q.q == Vector::Ones(4));
    CHECK(q.min_eig_r == doctest::Approx(0.5));
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(build_Q(0, 1.0, 1.0), InvalidProblem);
    CHECK_THROWS_AS(build_Q(2, -1.0, 1.0), InvalidProblem);
    CHECK_THROWS_AS(build_Q(2, 1.0, 0.0), InvalidProblem);
  }
}

TEST_CASE("build_Q is positive definite over random draws") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> k8(0.0, 10.0), eps(0.1, 10.0);
  for (int n = 1; n <= 8; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const QConstruction q = build_Q(n, k8(rng), eps(rng));
      CHECK(q.min_eig_r > 0.0);
      CHECK((q.q.array() > 0).all());
    }
}

TEST_CASE("K7 and the certificate") {
  const Vector q = vec({1.0, 0.25});
  CHECK(compute_K7(q, vec({2.0, 3.0}), 0.5, 2.0) == doctest::Approx(1.0 / (2 * 0.5 * 0.25) * 36.0));
  const StabilityCertificate c = certify(bounds(0, 1, 2, 0, 1.0), vec({1.5, 1.5}));
  CHECK(c.cstar == 0.5);
  CHECK(c.delta == 1.0);
  CHECK(c.margin_ok());
  CHECK(c.K8 == doctest::Approx(0.5 * (1.0 / 3 + 1)));
  CHECK(c.q(0) == 1.0);
  CHECK(c.min_eig_r > 0.0);
  CHECK(c.K7 == doctest::Approx(compute_K7(c.q, vec({1.5, 1.5}), 1.0, 2.0)));
  CHECK_FALSE(certify(bounds(0, 1, 2, 0, 1.0), vec({0.4, 1.5})).margin_ok());
}

TEST_CASE("Lyapunov values") {
  CHECK(lyapunov_values(StateField::zeros(2, 16), vec({1, 1})).V3 == 0.0);
  const LyapunovValues v = lyapunov_values(sine_state(1, 128), vec({2.0}));
  CHECK(v.V1 == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(v.V2 == doctest::Approx(kPi * kPi / 2).epsilon(1e-2));
  CHECK(v.V3 == doctest::Approx(std::pow(kPi, 4) / 2).epsilon(1e-2));
  CHECK_THROWS_AS(lyapunov_values(sine_state(2, 16), vec({1.0})), GridMismatch);
}

TEST_CASE("decay fit") {
  std::vector<std::pair<double, double>> exp2, flat, wobble;
  for (int k = 0; k <= 200; ++k) {
    const double t = k * 0.01;
    exp2.emplace_back(t, std::exp(-2 * t));
    flat.emplace_back(t, 3.0);
    wobble.emplace_back(t, std::exp(-2 * t) * (1 + 0.01 * std::sin(50 * t)));
  }
  CHECK(std::abs(fit_decay_rate(exp2, 0, 2).rate - 2) <= 1e-6);
  CHECK(std::abs(fit_decay_rate(flat, 0, 2).rate) <= 1e-12);
  CHECK(std::abs(fit_decay_rate(wobble, 0, 2).rate - 2) <= 0.05);
  CHECK(fit_decay_rate(exp2, 0.5, 1.0).samples == 51);
  CHECK_THROWS_AS(fit_decay_rate(exp2, 0, 0.05), InsufficientSnapshots);
  exp2[50].second = 0.0;
  CHECK_THROWS_AS(fit_decay_rate(exp2, 0, 2), NonPositiveSeries);
}
