#pragma once

#include <map>
#include <utility>
#include <vector>

#include "backstep/problem.hpp"

namespace backstep {

/// Trace data for the (K, L) system on the edges of the triangle.
///
///  - K_ii(x,x) from the explicit integral of the diagonal condition,
///  - K_ij(x,x) = 0 for i != j and K_ij(x,0) = 0 for i <= j,
///  - L_ii(x,x) = -(lambda_ii + c_i) / (2 sqrt(eps_i)),
///    L_ij(x,x) = -lambda_ij / (sqrt(eps_i) + sqrt(eps_j)),
///  - K_ij(1,xi) = l_ij(xi) for i > j (free data, zero unless overridden).
class BoundaryData {
 public:
  BoundaryData(const ValidatedProblem& vp, Vector c, std::vector<Polynomial> free_data);

  int n() const { return vp_.n(); }
  int m() const { return vp_.grid().m; }

  /// K_ii(x_a, x_a).
  double k_diag(int a, int i) const { return k_diag_[static_cast<std::size_t>(a * n() + i)]; }
  /// L(x, x) at any x in [0,1].
  Matrix l_trace(double x) const;
  double l_trace(double x, int i, int j) const;
  /// K_ij(1, xi) for i > j.
  double free_data(int i, int j, double xi) const {
    return free_[static_cast<std::size_t>(i * n() + j)](xi);
  }
  const Polynomial& free_polynomial(int i, int j) const {
    return free_[static_cast<std::size_t>(i * n() + j)];
  }
  const Vector& c() const { return c_; }

 private:
  ValidatedProblem vp_;
  Vector c_;
  std::vector<double> k_diag_;
  std::vector<Polynomial> free_;
};

/// Free data overrides keyed by 0-based (i, j) with i > j.
using FreeDataOverrides = std::map<std::pair<int, int>, Polynomial>;

/// Throws InvalidProblem when an override sits on or above the diagonal or has l_ij(1) != 0.
BoundaryData assemble_boundary_data(const ValidatedProblem& vp, const Vector& c,
                                    const FreeDataOverrides& overrides = {});

}  // namespace backstep
