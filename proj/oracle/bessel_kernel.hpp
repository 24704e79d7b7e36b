#pragma once

// Closed-form kernel of the scalar constant-coefficient plant u_t = u_xx + lambda u with
// damping c:  k(x, xi) = -(lambda + c) xi I1(z) / z,  z^2 = (lambda + c)(x^2 - xi^2).
// Evaluated from the power series of I1(z)/z; kept apart from the solver as a test oracle.

namespace backstep::oracle {

/// I1(z)/z as a function of z^2 (valid for negative z^2 too, giving J1(|z|)/|z|).
inline double bessel_i1_over_z(double z2) {
  double term = 0.5;  // k = 0: 1 / (2 * 0! * 1!)
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= (z2 / 4.0) / (static_cast<double>(k) * static_cast<double>(k + 1));
    sum += term;
    if (term == 0.0 || (term < 0 ? -term : term) < 1e-18 * (sum < 0 ? -sum : sum)) break;
  }
  return sum;
}

inline double scalar_kernel(double x, double xi, double lambda_plus_c) {
  return -lambda_plus_c * xi * bessel_i1_over_z(lambda_plus_c * (x * x - xi * xi));
}

}  // namespace backstep::oracle
