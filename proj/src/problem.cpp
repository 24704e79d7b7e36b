#include "backstep/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backstep/errors.hpp"

namespace backstep {

ProblemSpec ProblemSpec::zeros(int n) {
  ProblemSpec s;
  s.n = n;
  s.sigma.assign(static_cast<std::size_t>(n), Polynomial{});
  s.phi.assign(static_cast<std::size_t>(n * n), Polynomial{});
  s.lambda.assign(static_cast<std::size_t>(n * n), Polynomial{});
  return s;
}

ValidatedProblem::ValidatedProblem(ProblemSpec s, Grid g) : spec_(std::move(s)), grid_(g) {
  for (const auto& p : spec_.sigma) {
    dsigma_.push_back(p.derivative());
    d2sigma_.push_back(dsigma_.back().derivative());
  }
  for (const auto& p : spec_.phi) {
    dphi_.push_back(p.derivative());
    d2phi_.push_back(dphi_.back().derivative());
  }
}

double ValidatedProblem::sqrt_eps(int i, double x) const { return std::sqrt(eps(i, x)); }

namespace {

Matrix eval_matrix(const std::vector<Polynomial>& polys, int n, double x) {
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = polys[static_cast<std::size_t>(i * n + j)](x);
  return out;
}

}  // namespace

Matrix ValidatedProblem::phi(double x) const { return eval_matrix(spec_.phi, n(), x); }
Matrix ValidatedProblem::phi_prime(double x) const { return eval_matrix(dphi_, n(), x); }
Matrix ValidatedProblem::phi_second(double x) const { return eval_matrix(d2phi_, n(), x); }
Matrix ValidatedProblem::lambda(double x) const { return eval_matrix(spec_.lambda, n(), x); }

Vector ValidatedProblem::sigma_diag(double x) const {
  Vector v(n());
  for (int i = 0; i < n(); ++i) v(i) = eps(i, x);
  return v;
}

ValidatedProblem validate_problem(const ProblemSpec& spec, const Grid& grid) {
  const int n = spec.n;
  if (n < 1) throw InvalidProblem("n must be a positive integer");
  const auto nn = static_cast<std::size_t>(n);
  if (spec.sigma.size() != nn) throw InvalidProblem("sigma must have n entries");
  if (spec.phi.size() != nn * nn) throw InvalidProblem("phi must have n*n entries");
  if (spec.lambda.size() != nn * nn) throw InvalidProblem("lambda must have n*n entries");
  if (grid.m < kMinGridIntervals) throw InvalidProblem("grid.m must be at least 8");
  if (!(grid.dt > 0.0) || !std::isfinite(grid.dt)) throw InvalidProblem("grid.dt must be > 0");

  auto check_poly = [](const Polynomial& p, const char* what) {
    if (p.degree() > kMaxPolynomialDegree) {
      std::ostringstream os;
      os << what << " polynomial degree " << p.degree() << " exceeds " << kMaxPolynomialDegree;
      throw InvalidProblem(os.str());
    }
    for (double c : p.coefficients())
      if (!std::isfinite(c)) throw InvalidProblem(std::string(what) + " has a non-finite coefficient");
  };
  for (const auto& p : spec.sigma) check_poly(p, "sigma");
  for (const auto& p : spec.phi) check_poly(p, "phi");
  for (const auto& p : spec.lambda) check_poly(p, "lambda");

  // Positivity of every diffusivity (the ordering then carries it to all states, but
  // checking each one yields a sharper message).
  for (int i = 0; i < n; ++i) {
    const auto [lo, hi] = extrema_on_unit_interval(spec.sigma[static_cast<std::size_t>(i)]);
    (void)hi;
    if (!(lo.value > 0.0)) {
      std::ostringstream os;
      os << "diffusivity eps_" << (i + 1) << " = " << lo.value << " <= 0 at x = " << lo.at;
      throw NonPositiveDiffusivity(os.str());
    }
  }

  // Strict ordering eps_1 > eps_2 > ... > eps_n: minimum of each difference over a
  // validation grid and over the critical points of the difference polynomial.
  constexpr int kValidationPoints = 1000;
  for (int i = 0; i + 1 < n; ++i) {
    const Polynomial d = spec.sigma[static_cast<std::size_t>(i)] - spec.sigma[static_cast<std::size_t>(i + 1)];
    Extremum worst = extrema_on_unit_interval(d).first;
    for (int k = 0; k <= kValidationPoints; ++k) {
      const double x = static_cast<double>(k) / kValidationPoints;
      if (d(x) < worst.value) worst = {d(x), x};
    }
    if (!(worst.value > 0.0)) {
      std::ostringstream os;
      os << "diffusivities not strictly ordered: eps_" << (i + 1) << " <= eps_" << (i + 2)
         << " at x = " << worst.at << " (difference " << worst.value << ")";
      throw OrderingViolation(i, worst.at, os.str());
    }
  }
  return ValidatedProblem(spec, grid);
}

CoefficientBounds coefficient_bounds(const ValidatedProblem& vp) {
  const auto& spec = vp.spec();
  CoefficientBounds b;
  b.eps_lo = std::numeric_limits<double>::infinity();
  b.eps_hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.n; ++i) {
    const auto& s = spec.sigma[static_cast<std::size_t>(i)];
    const auto [lo, hi] = extrema_on_unit_interval(s);
    b.eps_lo = std::min(b.eps_lo, lo.value);
    b.eps_hi = std::max(b.eps_hi, hi.value);
    const auto [dlo, dhi] = extrema_on_unit_interval(s.derivative());
    b.eps_prime_hi = std::max({b.eps_prime_hi, std::abs(dlo.value), std::abs(dhi.value)});
  }
  b.eps_prime_hi *= kBoundInflation;

  int max_degree = 0;
  for (const auto& p : spec.phi) max_degree = std::max(max_degree, p.degree());
  const int samples = std::max(1000, 10 * max_degree + 1);
  double p = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const Matrix phi = vp.phi(static_cast<double>(k) / samples);
    if (phi.isZero(0.0)) continue;
    Eigen::JacobiSVD<Matrix> svd(phi);
    p = std::max(p, svd.singularValues()(0));
  }
  b.p = p * kBoundInflation;
  return b;
}

}  // namespace backstep
