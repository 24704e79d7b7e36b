#pragma once

#include <vector>

#include "backstep/problem.hpp"

namespace backstep {

/// Coefficients of the first-order (K, L) system
///   sqrt(S(x)) K_x + K_xi sqrt(S(xi)) = L - F1(x) K - K F2(xi)
///   sqrt(S(x)) L_x - L_xi sqrt(S(xi)) = K F3(xi) + F4(x) K - F1(x) L + L F2(xi)
/// Evaluated analytically from the polynomial coefficients; also cached at grid nodes.
class ReductionFields {
 public:
  ReductionFields(const ValidatedProblem& vp, Vector c);

  Matrix F1(double x) const;
  Matrix F1_prime(double x) const;
  Matrix F2(double xi) const;
  Matrix F2_prime(double xi) const;
  Matrix F3(double xi) const;
  Matrix F4(double x) const;

  /// Values at x_a = a h, a = 0..m.
  const Matrix& F1_at(int a) const { return f1_[static_cast<std::size_t>(a)]; }
  const Matrix& F2_at(int a) const { return f2_[static_cast<std::size_t>(a)]; }
  const Matrix& F3_at(int a) const { return f3_[static_cast<std::size_t>(a)]; }
  const Matrix& F4_at(int a) const { return f4_[static_cast<std::size_t>(a)]; }

  const Vector& c() const { return c_; }
  int n() const { return vp_.n(); }
  const ValidatedProblem& problem() const { return vp_; }

 private:
  // (N, N') for F1 (sign = +1) or F2 (sign = -1): N_ij = delta_ij eps_i'/2 + sign phi_ij.
  Matrix quotient(double x, int sign) const;
  Matrix quotient_prime(double x, int sign) const;

  ValidatedProblem vp_;
  Vector c_;
  std::vector<Matrix> f1_, f2_, f3_, f4_;
};

ReductionFields compute_reduction(const ValidatedProblem& vp, const Vector& c);

}  // namespace backstep
