#pragma once

#include "backstep/kernel.hpp"
#include "backstep/problem.hpp"

namespace backstep {

/// n-vector state on the x-grid: column a holds the value at x_a, boundaries included.
struct StateField {
  Matrix values;  // n x (m+1)
  double time = 0.0;

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()) - 1; }
  static StateField zeros(int n, int m, double time = 0.0);
};

/// Discrete Volterra operator (V f)(x_a) = sum_{b <= a} W(a,b) f_b approximating
/// int_0^{x_a} K(x_a,xi) f(xi) dxi.
class VolterraOperator {
 public:
  /// Composite trapezoid on the grid nodes.
  explicit VolterraOperator(const KernelField& field);
  /// Splits each integral where a corner characteristic crosses the row, then uses
  /// Gauss-Legendre on the pieces with K interpolated from row nodes on the same side and f
  /// interpolated by cubics on nodes 0..a. Second order where K has gradient jumps.
  VolterraOperator(const KernelField& field, const ValidatedProblem& vp);

  int n() const { return n_; }
  int m() const { return m_; }
  const Matrix& weight(int a, int b) const { return w_[Grid::tri(a, b)]; }
  Vector apply_row(int a, const Matrix& f) const;

 private:
  int n_, m_;
  std::vector<Matrix> w_;
};

/// g(x) = f(x) - int_0^x K(x,xi) f(xi) dxi, composite trapezoid. Throws GridMismatch.
StateField forward_transform(const KernelField& field, const StateField& f);
StateField forward_transform(const VolterraOperator& op, const StateField& f);

/// Solves f(x) = g(x) + int_0^x K(x,xi) f(xi) dxi by marching in x with the same quadrature,
/// so it inverts forward_transform to rounding. Throws GridMismatch.
StateField inverse_transform(const KernelField& field, const StateField& g);
StateField inverse_transform(const VolterraOperator& op, const StateField& g);

/// Squared norms: l2 = int |f|^2, h1 = l2 + int |f_x|^2.
struct SquaredNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};

SquaredNorms norms(const StateField& f);

/// Constants of H1(g) <= k1 H1(f) and H1(f) <= k2 H1(g) built from kernel max norms.
/// The inverse uses the resolvent bounds |P| <= kP = sup|K| e^{sup|K|} and
/// |P_x| <= sup|K_x| (1 + kP) + sup|K| kP.
struct TransformBounds {
  double sup_k = 0.0;
  double sup_kx = 0.0;
  double sup_p = 0.0;
  double sup_px = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
};

TransformBounds transform_bounds(const KernelField& field);

}  // namespace backstep
