#include <doctest.h>

#include <random>

#include "backstep/errors.hpp"
#include "backstep/kernel.hpp"
#include "backstep/transform.hpp"
#include "fixtures.hpp"

using namespace backstep;
using namespace fixtures;

namespace {

KernelField constant_kernel(int m, double v) {
  KernelField f = KernelField::zeros(1, m);
  for (double& k : f.k) k = v;
  return f;
}

StateField random_state(int n, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StateField s = StateField::zeros(n, m);
  for (int a = 1; a <= m; ++a)
    for (int i = 0; i < n; ++i) s.values(i, a) = u(rng);
  return s;
}

}  // namespace

TEST_CASE("zero kernel is the identity") {
  std::mt19937_64 rng(1);
  const KernelField f = KernelField::zeros(2, 16);
  const StateField s = random_state(2, 16, rng);
  CHECK(forward_transform(f, s).values == s.values);
  CHECK(inverse_transform(f, s).values == s.values);
}

TEST_CASE("unit kernel integrates") {
  const int m = 32;
  const KernelField f = constant_kernel(m, 1.0);
  StateField one = StateField::zeros(1, m);
  one.values.setOnes();
  const StateField g = forward_transform(f, one);
  for (int a = 0; a <= m; ++a) CHECK(g.values(0, a) == doctest::Approx(1.0 - a / double(m)).epsilon(1e-13));
  const StateField back = inverse_transform(f, g);
  for (int a = 0; a <= m; ++a) CHECK(back.values(0, a) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("grid mismatch") {
  const KernelField f = KernelField::zeros(1, 16);
  CHECK_THROWS_AS(forward_transform(f, StateField::zeros(1, 32)), GridMismatch);
  CHECK_THROWS_AS(inverse_transform(f, StateField::zeros(2, 16)), GridMismatch);
}

TEST_CASE("norms") {
  const int m = 64;
  StateField lin = StateField::zeros(1, m);
  for (int a = 0; a <= m; ++a) lin.values(0, a) = a / double(m);
  const SquaredNorms nl = norms(lin);
  CHECK(std::abs(nl.l2 - 1.0 / 3) <= 1e-4);
  CHECK(std::abs(nl.h1 - 4.0 / 3) <= 1e-4);
  const SquaredNorms ns = norms(sine_state(1, m));
  CHECK(std::abs(ns.l2 - 0.5) <= 1e-3);
  CHECK(std::abs(ns.h1 - (0.5 + kPi * kPi / 2)) <= 1e-3 * (0.5 + kPi * kPi / 2));
  const SquaredNorms nz = norms(StateField::zeros(2, m));
  CHECK(nz.l2 == 0.0);
  CHECK(nz.h1 == 0.0);
}

TEST_CASE("round trip, linearity and H1 bounds on the unstable pair") {
  const int m = 64;
  const ValidatedProblem vp = validate_problem(unstable_pair(), Grid{m, 1e-4});
  const KernelField f = solve_kernel(vp, vec({1.5, 1.5}));
  const TransformBounds tb = transform_bounds(f);
  CHECK(tb.k1 == doctest::Approx(1 + tb.sup_k * (1 + tb.sup_kx)));
  std::mt19937_64 rng(7);
  for (const VolterraOperator& op : {VolterraOperator(f), VolterraOperator(f, vp)}) {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const StateField s = random_state(2, m, rng);
      worst = std::max(worst, (inverse_transform(op, forward_transform(op, s)).values - s.values)
                                  .cwiseAbs().maxCoeff());
      worst = std::max(worst, (forward_transform(op, inverse_transform(op, s)).values - s.values)
                                  .cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);

    const StateField s1 = random_state(2, m, rng), s2 = random_state(2, m, rng);
    StateField mix = s1;
    mix.values = 2.0 * s1.values - 3.0 * s2.values;
    const Matrix lin = 2.0 * forward_transform(op, s1).values - 3.0 * forward_transform(op, s2).values;
    CHECK((forward_transform(op, mix).values - lin).cwiseAbs().maxCoeff() <= 1e-10);
  }
  for (int trial = 0; trial < 20; ++trial) {
    StateField s = StateField::zeros(2, m);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 1; k <= 4; ++k)
      for (int i = 0; i < 2; ++i) {
        const double amp = u(rng);
        for (int a = 0; a <= m; ++a) s.values(i, a) += amp * std::sin(k * kPi * a / m);
      }
    const StateField g = forward_transform(f, s);
    CHECK(norms(g).h1 <= tb.k1 * norms(s).h1);
    CHECK(norms(s).h1 <= tb.k2 * norms(g).h1);
  }
}

TEST_CASE("trapezoid operator weights") {
  const KernelField f = constant_kernel(8, 2.0);
  const VolterraOperator op(f);
  CHECK(op.weight(0, 0)(0, 0) == 0.0);
  CHECK(op.weight(3, 0)(0, 0) == doctest::Approx(2.0 * 0.5 / 8));
  CHECK(op.weight(3, 1)(0, 0) == doctest::Approx(2.0 / 8));
  CHECK(op.weight(3, 3)(0, 0) == doctest::Approx(2.0 * 0.5 / 8));
}

TEST_CASE("kink-split operator integrates smooth products to high order") {
  // K(x,xi) = x + xi on the scalar problem (no corner curves): the integral of K f with
  // f = xi^2 is x^4 / 3 + x^4 / 4.
  const int m = 16;
  const ValidatedProblem vp = validate_problem(scalar(1.0, 0.0), Grid{m, 1e-3});
  KernelField f = KernelField::zeros(1, m);
  for (int a = 0; a <= m; ++a)
    for (int b = 0; b <= a; ++b) f.k[f.slot(a, b, 0, 0)] = (a + b) / double(m);
  const VolterraOperator op(f, vp);
  StateField s = StateField::zeros(1, m);
  for (int a = 0; a <= m; ++a) s.values(0, a) = std::pow(a / double(m), 2);
  const StateField g = forward_transform(op, s);
  // row 1 has only two nodes for f, so its interpolant is linear
  for (int a = 2; a <= m; ++a) {
    const double x = a / double(m);
    CHECK(g.values(0, a) == doctest::Approx(x * x - 7.0 / 12.0 * std::pow(x, 4)).epsilon(1e-12));
  }
}
