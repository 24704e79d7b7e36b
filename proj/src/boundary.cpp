#include "backstep/boundary.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "backstep/errors.hpp"

namespace backstep {

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

}  // namespace

BoundaryData::BoundaryData(const ValidatedProblem& vp, Vector c, std::vector<Polynomial> free_data)
    : vp_(vp), c_(std::move(c)), free_(std::move(free_data)) {
  const int n = vp_.n();
  const int m = vp_.grid().m;
  const double h = vp_.grid().h();
  k_diag_.assign(static_cast<std::size_t>((m + 1) * n), 0.0);
  for (int i = 0; i < n; ++i) {
    // K_ii(x,x) = -(1/sqrt(eps_i(x))) int_0^x (lambda_ii + c_i) / (2 sqrt(eps_i)) dxi
    auto integrand = [&](double xi) {
      return (vp_.spec().lambda_at(i, i)(xi) + c_(i)) / (2.0 * vp_.sqrt_eps(i, xi));
    };
    double acc = 0.0;
    for (int a = 1; a <= m; ++a) {
      const double mid = (a - 0.5) * h;
      double part = 0.0;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q)
        part += kGaussWeights[q] * integrand(mid + 0.5 * h * kGaussNodes[q]);
      acc += 0.5 * h * part;
      k_diag_[static_cast<std::size_t>(a * n + i)] = -acc / vp_.sqrt_eps(i, a * h);
    }
  }
}

double BoundaryData::l_trace(double x, int i, int j) const {
  const double lam = vp_.spec().lambda_at(i, j)(x);
  if (i == j) return -(lam + c_(i)) / (2.0 * vp_.sqrt_eps(i, x));
  return -lam / (vp_.sqrt_eps(i, x) + vp_.sqrt_eps(j, x));
}

Matrix BoundaryData::l_trace(double x) const {
  Matrix out(n(), n());
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j) out(i, j) = l_trace(x, i, j);
  return out;
}

BoundaryData assemble_boundary_data(const ValidatedProblem& vp, const Vector& c,
                                    const FreeDataOverrides& overrides) {
  const int n = vp.n();
  if (c.size() != n) throw InvalidProblem("C must have n diagonal entries");
  std::vector<Polynomial> free(static_cast<std::size_t>(n * n));
  for (const auto& [ij, poly] : overrides) {
    const auto [i, j] = ij;
    if (i < 0 || j < 0 || i >= n || j >= n || i <= j) {
      std::ostringstream os;
      os << "free data l_" << (i + 1) << (j + 1) << " only exists below the diagonal (i > j)";
      throw InvalidProblem(os.str());
    }
    if (std::abs(poly(1.0)) > 1e-12) {
      std::ostringstream os;
      os << "free data l_" << (i + 1) << (j + 1) << " must vanish at xi = 1 (got " << poly(1.0) << ")";
      throw InvalidProblem(os.str());
    }
    free[static_cast<std::size_t>(i * n + j)] = poly;
  }
  return BoundaryData(vp, c, std::move(free));
}

}  // namespace backstep
