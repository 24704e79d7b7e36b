#pragma once

#include <cmath>
#include <numbers>

#include "backstep/boundary.hpp"
#include "backstep/problem.hpp"
#include "backstep/transform.hpp"

namespace fixtures {

using namespace backstep;

inline constexpr double kPi = std::numbers::pi;

inline ProblemSpec scalar(double eps, double lambda, double phi = 0.0) {
  ProblemSpec s = ProblemSpec::zeros(1);
  s.sigma[0] = Polynomial{eps};
  s.phi[0] = Polynomial{phi};
  s.lambda[0] = Polynomial{lambda};
  return s;
}

/// Sigma = diag(2,1), Lambda = [[3pi^2, 2], [2, 3pi^2]], Phi = 0.
inline ProblemSpec unstable_pair() {
  ProblemSpec s = ProblemSpec::zeros(2);
  s.sigma[0] = Polynomial{2.0};
  s.sigma[1] = Polynomial{1.0};
  s.lambda_at(0, 0) = Polynomial{3 * kPi * kPi};
  s.lambda_at(1, 1) = Polynomial{3 * kPi * kPi};
  s.lambda_at(0, 1) = Polynomial{2.0};
  s.lambda_at(1, 0) = Polynomial{2.0};
  return s;
}

/// eps1 = 2 + x/2, eps2 = 1, phi12 = x, Lambda = [[4, l12], [2, 3]].
inline ProblemSpec variable_pair(double l12 = 0.0) {
  ProblemSpec s = ProblemSpec::zeros(2);
  s.sigma[0] = Polynomial{2.0, 0.5};
  s.sigma[1] = Polynomial{1.0};
  s.phi_at(0, 1) = Polynomial{0.0, 1.0};
  s.lambda_at(0, 0) = Polynomial{4.0};
  s.lambda_at(0, 1) = Polynomial{l12};
  s.lambda_at(1, 0) = Polynomial{2.0};
  s.lambda_at(1, 1) = Polynomial{3.0};
  return s;
}

/// K21(1, xi) for variable_pair(0) with c = (1,1), matched to K_xi and K_xixi at (1,1):
/// -(4/3)(xi - 1) + (34/27)(xi - 1)^2.
inline FreeDataOverrides compatible_free_data() {
  return {{{1, 0}, Polynomial{70.0 / 27.0, -104.0 / 27.0, 34.0 / 27.0}}};
}

inline StateField sine_state(int n, int m, double amplitude = 1.0) {
  StateField u = StateField::zeros(n, m);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) u.values(i, a) = amplitude * std::sin(kPi * a / m);
  return u;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

}  // namespace fixtures
