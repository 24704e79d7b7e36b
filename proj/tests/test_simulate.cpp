#include <doctest.h>

#include <cmath>

#include "backstep/errors.hpp"
#include "backstep/kernel.hpp"
#include "backstep/simulate.hpp"
#include "bessel_kernel.hpp"
#include "fixtures.hpp"

using namespace backstep;
using namespace fixtures;

TEST_CASE("zero state stays zero") {
  const ValidatedProblem vp = validate_problem(unstable_pair(), Grid{16, 1e-3});
  const Stepper st(vp, 1e-3);
  const StateField z = StateField::zeros(2, 16);
  const StateField next = st.step(z, Vector::Zero(2), Vector::Zero(2));
  CHECK(next.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(next.time == doctest::Approx(1e-3));
}

TEST_CASE("heat eigenmode decays at the exact rate") {
  const ValidatedProblem vp = validate_problem(scalar(1.0, 0.0), Grid{128, 1e-4});
  const Trajectory tr = simulate(vp, sine_state(1, 128), std::nullopt, {0.1, 100});
  const double ratio = tr.norm_series.back().l2 / tr.norm_series.front().l2;
  CHECK(ratio == doctest::Approx(std::exp(-2 * kPi * kPi * 0.1)).epsilon(0.02));
}

TEST_CASE("unstable scalar eigenmode grows at 2(lambda - pi^2)") {
  const ValidatedProblem vp = validate_problem(scalar(1.0, 2 * kPi * kPi), Grid{128, 1e-4});
  const Trajectory tr = simulate(vp, sine_state(1, 128), std::nullopt, {0.1, 100});
  const double rate = std::log(tr.norm_series.back().l2 / tr.norm_series.front().l2) / 0.1;
  CHECK(rate == doctest::Approx(2 * kPi * kPi).epsilon(0.05));
}

TEST_CASE("stable scalar plant decays monotonically in open loop") {
  const ValidatedProblem vp = validate_problem(scalar(1.0, 1.0, 0.5), Grid{32, 1e-3});
  const Trajectory tr = simulate(vp, sine_state(1, 32), std::nullopt, {0.3, 10});
  for (std::size_t k = 1; k < tr.norm_series.size(); ++k)
    CHECK(tr.norm_series[k].h1 < tr.norm_series[k - 1].h1);
  CHECK(tr.snapshots.size() == 31);
  CHECK(tr.snapshot_interval == doctest::Approx(1e-2));
}

TEST_CASE("controller offsets") {
  const int m = 32;
  const KernelField zero = KernelField::zeros(1, m);
  SUBCASE("zero kernel, zero right value") {
    const Controller c = make_controller(zero, sine_state(1, m), vec({1.0}), 1.0);
    CHECK(c.b0(0) == 0.0);
    CHECK(c.feedback(sine_state(1, m))(0) == 0.0);
  }
  SUBCASE("zero kernel, right value v") {
    StateField u0 = sine_state(1, m);
    u0.values(0, m) = 0.8;
    const Controller c = make_controller(zero, u0, vec({1.0}), 2.0);
    CHECK(c.b0(0) == 0.8);
    CHECK(c.b(std::log(2.0) / 2.0)(0) == doctest::Approx(0.4));
    CHECK(c.b_dot(0.0)(0) == doctest::Approx(-1.6));
  }
  SUBCASE("closed-form kernel, two resolutions agree") {
    // independent value: Simpson on 4096 intervals straight from the closed form
    double ref = 0.0;
    for (int q = 0; q <= 4096; ++q) {
      const double xi = q / 4096.0, w = (q == 0 || q == 4096) ? 1 : (q % 2 ? 4 : 2);
      ref += w * oracle::scalar_kernel(1.0, xi, 15.0) * std::sin(kPi * xi);
    }
    ref = -ref / (3 * 4096);
    const ValidatedProblem vp128 = validate_problem(scalar(1.0, 10.0), Grid{128, 1e-4});
    double b[2];
    for (int r = 0; r < 2; ++r) {
      const int mm = r == 0 ? 128 : 256;
      KernelField f = KernelField::zeros(1, mm);
      for (int a = 0; a <= mm; ++a)
        for (int q = 0; q <= a; ++q) f.k[f.slot(a, q, 0, 0)] = oracle::scalar_kernel(a / double(mm), q / double(mm), 15.0);
      b[r] = make_controller(f, sine_state(1, mm), vec({5.0}), 1.0).b0(0);
      if (mm == 128) {
        const double gl = make_controller(VolterraOperator(f, vp128), sine_state(1, mm), vec({5.0}), 1.0).b0(0);
        CHECK(std::abs(gl - ref) <= 1e-6);
      }
    }
    CHECK(std::abs(b[0] - b[1]) <= 1e-4);
    CHECK(std::abs(b[1] - ref) <= 1e-4);
  }
  SUBCASE("errors") {
    StateField bad = sine_state(1, m);
    bad.values(0, 0) = 1e-3;
    CHECK_THROWS_AS(make_controller(zero, bad, vec({1.0}), 1.0), IncompatibleInitialCondition);
    CHECK_THROWS_AS(make_controller(zero, sine_state(1, 16), vec({1.0}), 1.0), GridMismatch);
    CHECK_THROWS_AS(make_controller(zero, sine_state(1, m), vec({0.0}), 1.0), InvalidProblem);
    CHECK_THROWS_AS(make_controller(zero, sine_state(1, m), vec({1.0}), 0.0), InvalidProblem);
  }
}

TEST_CASE("closed loop boundary identity, linearity and determinism") {
  const int m = 32;
  const ValidatedProblem vp = validate_problem(unstable_pair(), Grid{m, 1e-4});
  const Vector c = vec({1.5, 1.5});
  const KernelField f = solve_kernel(vp, c);
  const VolterraOperator op(f, vp);
  const StateField u0 = sine_state(2, m);
  const Controller ctl = make_controller(op, u0, c, 1.0);
  const Trajectory tr = simulate(vp, u0, ctl, {0.05, 25});
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const StateField w = forward_transform(op, tr.snapshots[k]);
    CHECK((w.values.col(m) - ctl.b(tr.snapshots[k].time)).cwiseAbs().maxCoeff() <= 1e-10);
  }
  CHECK((tr.control_series.front().u - u0.values.col(m)).cwiseAbs().maxCoeff() <= 1e-14);

  StateField u3 = u0;
  u3.values *= 3.0;
  const Controller ctl3 = make_controller(op, u3, c, 1.0);
  const Trajectory t3 = simulate(vp, u3, ctl3, {0.05, 25});
  CHECK((t3.snapshots.back().values - 3.0 * tr.snapshots.back().values).cwiseAbs().maxCoeff() <=
        1e-9 * tr.snapshots.back().values.cwiseAbs().maxCoeff());

  const Trajectory again = simulate(vp, u0, ctl, {0.05, 25});
  for (std::size_t k = 0; k < tr.norm_series.size(); ++k) CHECK(again.norm_series[k].h1 == tr.norm_series[k].h1);
}

TEST_CASE("target residual") {
  const int m = 16;
  const ValidatedProblem vp = validate_problem(unstable_pair(), Grid{m, 1e-3});
  const Vector c = vec({1.5, 1.5});
  const KernelField f = solve_kernel(vp, c);
  const VolterraOperator op(f, vp);
  const GMatrix g = extract_G(f, vp);
  SUBCASE("zero initial condition, zero control") {
    const StateField z = StateField::zeros(2, m);
    const Trajectory tr = simulate(vp, z, make_controller(op, z, c, 1.0), {0.01, 2});
    const auto rep = target_residual(tr, op, vp, c, g, make_controller(op, z, c, 1.0));
    CHECK(rep.rows.size() == tr.snapshots.size() - 2);
    CHECK(rep.max_interior() == 0.0);
    CHECK(rep.max_l2() == 0.0);
    CHECK(rep.max_boundary() == 0.0);
  }
  SUBCASE("too few snapshots") {
    const StateField z = StateField::zeros(2, m);
    const Trajectory tr = simulate(vp, z, std::nullopt, {0.002, 2});
    CHECK_THROWS_AS(target_residual(tr, op, vp, c, g, std::nullopt), InsufficientSnapshots);
  }
}

TEST_CASE("non-finite state is reported with its time") {
  const ValidatedProblem vp = validate_problem(scalar(1.0, 1e4), Grid{16, 1e-2});
  try {
    simulate(vp, sine_state(1, 16, 1e300), std::nullopt, {5.0, 1});
    FAIL("expected NonFiniteState");
  } catch (const NonFiniteState& e) {
    CHECK(e.time > 0.0);
  }
}

TEST_CASE("power iteration finds the dominant eigenvalue") {
  // Dirichlet Laplacian plus lambda: top discrete eigenvalue lambda - (4/h^2) sin^2(pi h / 2)
  const int m = 64;
  const double lambda = 2 * kPi * kPi, h = 1.0 / m;
  const ValidatedProblem vp = validate_problem(scalar(1.0, lambda), Grid{m, 1e-4});
  const GrowthEstimate est = estimate_growth_rate(vp, 0.1);
  const double exact = lambda - 4 / (h * h) * std::pow(std::sin(kPi * h / 2), 2);
  CHECK(est.converged);
  CHECK(est.mu == doctest::Approx(exact).epsilon(1e-6));
}
