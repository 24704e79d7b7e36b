#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "backstep/polynomial.hpp"

namespace backstep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Plant u_t = (Sigma u_x)_x + Phi u_x + Lambda u on [0,1] with polynomial coefficients.
/// phi and lambda are stored row-major, entry (i,j) at i*n + j.
struct ProblemSpec {
  int n = 0;
  std::vector<Polynomial> sigma;
  std::vector<Polynomial> phi;
  std::vector<Polynomial> lambda;

  static ProblemSpec zeros(int n);

  const Polynomial& phi_at(int i, int j) const { return phi[static_cast<std::size_t>(i * n + j)]; }
  const Polynomial& lambda_at(int i, int j) const {
    return lambda[static_cast<std::size_t>(i * n + j)];
  }
  Polynomial& phi_at(int i, int j) { return phi[static_cast<std::size_t>(i * n + j)]; }
  Polynomial& lambda_at(int i, int j) { return lambda[static_cast<std::size_t>(i * n + j)]; }
};

/// Uniform spatial grid with m intervals plus the time step used by the simulator.
struct Grid {
  int m = 64;
  double dt = 1e-4;

  double h() const { return 1.0 / m; }
  double x(int a) const { return static_cast<double>(a) / m; }
  /// Nodes of the triangle 0 <= xi <= x <= 1 sharing the spacing h.
  std::size_t triangle_nodes() const {
    return static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 2) / 2;
  }
  /// Node (a, b) of the triangle, b <= a: x = a h, xi = b h.
  static std::size_t tri(int a, int b) {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(a + 1) / 2 +
           static_cast<std::size_t>(b);
  }
};

inline constexpr int kMaxPolynomialDegree = 16;
inline constexpr int kMinGridIntervals = 8;
/// Safety factor applied to sampled suprema (p, eps', g).
inline constexpr double kBoundInflation = 1.01;

/// A plant whose diffusivities were checked to be positive and strictly ordered.
class ValidatedProblem {
 public:
  const ProblemSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  int n() const { return spec_.n; }

  double eps(int i, double x) const { return spec_.sigma[static_cast<std::size_t>(i)](x); }
  double eps_prime(int i, double x) const { return dsigma_[static_cast<std::size_t>(i)](x); }
  double eps_second(int i, double x) const { return d2sigma_[static_cast<std::size_t>(i)](x); }
  double sqrt_eps(int i, double x) const;

  Matrix phi(double x) const;
  Matrix phi_prime(double x) const;
  Matrix phi_second(double x) const;
  Matrix lambda(double x) const;
  Vector sigma_diag(double x) const;

 private:
  friend ValidatedProblem validate_problem(const ProblemSpec&, const Grid&);
  ValidatedProblem(ProblemSpec s, Grid g);

  ProblemSpec spec_;
  Grid grid_;
  std::vector<Polynomial> dsigma_, d2sigma_;
  std::vector<Polynomial> dphi_, d2phi_;
};

/// Throws OrderingViolation, NonPositiveDiffusivity or InvalidProblem.
ValidatedProblem validate_problem(const ProblemSpec& spec, const Grid& grid);

struct CoefficientBounds {
  double p = 0.0;             // sup_x ||Phi(x)||_2, inflated
  double eps_lo = 0.0;        // min_{i,x} eps_i(x)
  double eps_hi = 0.0;        // max_{i,x} eps_i(x)
  double eps_prime_hi = 0.0;  // sup |eps_i'(x)|, inflated
  std::optional<double> g;    // sup |g_ij(x)|, filled once G is known
};

CoefficientBounds coefficient_bounds(const ValidatedProblem& vp);

}  // namespace backstep
