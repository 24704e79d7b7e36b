#include "backstep/reduction.hpp"

#include <cmath>

#include "backstep/errors.hpp"

namespace backstep {

ReductionFields::ReductionFields(const ValidatedProblem& vp, Vector c) : vp_(vp), c_(std::move(c)) {
  if (c_.size() != vp_.n()) throw InvalidProblem("C must have n diagonal entries");
  const int m = vp_.grid().m;
  for (int a = 0; a <= m; ++a) {
    const double x = vp_.grid().x(a);
    f1_.push_back(F1(x));
    f2_.push_back(F2(x));
    f3_.push_back(F3(x));
    f4_.push_back(F4(x));
  }
}

Matrix ReductionFields::quotient(double x, int sign) const {
  const int n = vp_.n();
  const Matrix phi = vp_.phi(x);
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double num = (i == j ? 0.5 * vp_.eps_prime(i, x) : 0.0) + sign * phi(i, j);
      out(i, j) = num / (vp_.sqrt_eps(i, x) + vp_.sqrt_eps(j, x));
    }
  }
  return out;
}

Matrix ReductionFields::quotient_prime(double x, int sign) const {
  const int n = vp_.n();
  const Matrix phi = vp_.phi(x);
  const Matrix dphi = vp_.phi_prime(x);
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double num = (i == j ? 0.5 * vp_.eps_prime(i, x) : 0.0) + sign * phi(i, j);
      const double dnum = (i == j ? 0.5 * vp_.eps_second(i, x) : 0.0) + sign * dphi(i, j);
      const double si = vp_.sqrt_eps(i, x);
      const double sj = vp_.sqrt_eps(j, x);
      const double den = si + sj;
      const double dden = 0.5 * vp_.eps_prime(i, x) / si + 0.5 * vp_.eps_prime(j, x) / sj;
      out(i, j) = (dnum * den - num * dden) / (den * den);
    }
  }
  return out;
}

Matrix ReductionFields::F1(double x) const { return quotient(x, +1); }
Matrix ReductionFields::F1_prime(double x) const { return quotient_prime(x, +1); }
Matrix ReductionFields::F2(double xi) const { return quotient(xi, -1); }
Matrix ReductionFields::F2_prime(double xi) const { return quotient_prime(xi, -1); }

Matrix ReductionFields::F3(double xi) const {
  const Matrix f2 = F2(xi);
  const Vector s = vp_.sigma_diag(xi).cwiseSqrt();
  return vp_.lambda(xi) - vp_.phi_prime(xi) - F2_prime(xi) * s.asDiagonal() - f2 * f2;
}

Matrix ReductionFields::F4(double x) const {
  const Matrix f1 = F1(x);
  const Vector s = vp_.sigma_diag(x).cwiseSqrt();
  Matrix out = s.asDiagonal() * F1_prime(x) + f1 * f1;
  out.diagonal() += c_;
  return out;
}

ReductionFields compute_reduction(const ValidatedProblem& vp, const Vector& c) {
  return ReductionFields(vp, c);
}

}  // namespace backstep
