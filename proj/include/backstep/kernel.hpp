#pragma once

#include <string>
#include <vector>

#include "backstep/boundary.hpp"
#include "backstep/problem.hpp"
#include "backstep/reduction.hpp"

namespace backstep {

inline constexpr const char* kSchemeId = "characteristics-successive-approximation-p3-simpson";

struct KernelOptions {
  double tol = 1e-8;        // max-norm fixed-point update
  int max_iterations = 10000;
  bool parallel = true;     // OpenMP sweeps; the serial path gives bitwise-identical fields
  double sample_density = 1.0;
};

/// K and L on the triangle nodes, node-major (see Grid::tri) with n*n row-major entries.
struct KernelField {
  int n = 0;
  int m = 0;
  std::vector<double> k;
  std::vector<double> l;
  std::string scheme = kSchemeId;
  double tol = 0.0;
  int iterations = 0;
  double final_update = 0.0;

  double h() const { return 1.0 / m; }
  std::size_t slot(int a, int b, int i, int j) const {
    return Grid::tri(a, b) * static_cast<std::size_t>(n * n) + static_cast<std::size_t>(i * n + j);
  }
  double K(int a, int b, int i, int j) const { return k[slot(a, b, i, j)]; }
  double L(int a, int b, int i, int j) const { return l[slot(a, b, i, j)]; }
  Matrix K_at(int a, int b) const;
  Matrix L_at(int a, int b) const;

  static KernelField zeros(int n, int m);
};

/// Throws GridTooCoarse or NoConvergence.
KernelField solve_kernel(const ValidatedProblem& vp, const Vector& c, const KernelOptions& opts = {},
                         const FreeDataOverrides& free_data = {});
KernelField solve_kernel(const ReductionFields& rf, const BoundaryData& bd,
                         const KernelOptions& opts = {});

/// Max-norm residuals for one (i, j) entry. The *_smooth variants skip nodes within a few
/// cells of any corner characteristic (through (0,0) for K_kl with k < l, through (1,1) for
/// k > l). Unless the data are compatible at those corners the kernel is only piecewise
/// differentiable across them.
struct EntryResidual {
  int i = 0;
  int j = 0;
  double pde = 0.0;
  double pde_smooth = 0.0;
  double kbc1 = 0.0;
  double kbc1_smooth = 0.0;
  double kbc2 = 0.0;  // |K_ij(x,x)|, i != j
  double kbc3 = 0.0;  // |K_ij(x,0)|, i <= j
  double first_order_k = 0.0;
  double first_order_k_smooth = 0.0;
  double first_order_l = 0.0;
  double first_order_l_smooth = 0.0;
};

struct ResidualReport {
  std::vector<EntryResidual> entries;
  double max_pde() const;
  double max_pde_smooth() const;
  double max_kbc1() const;
  double max_kbc1_smooth() const;
  double max_kbc2() const;
  double max_kbc3() const;
  double max_first_order_k() const;
  double max_first_order_l() const;
  double max_first_order_smooth() const;
};

/// Width of the excluded band around a corner characteristic, in grid cells.
inline constexpr double kSingularBandCells = 2.5;

ResidualReport kernel_residual(const KernelField& field, const ValidatedProblem& vp,
                               const Vector& c);

/// True when node (a, b) lies within the excluded band of entry (i, j).
bool near_corner_characteristic(const ValidatedProblem& vp, int i, int j, int a, int b);

/// G(x) = -K(x,0) Sigma(0), strictly lower triangular, on the x-grid.
struct GMatrix {
  int n = 0;
  int m = 0;
  std::vector<Matrix> g;  // g[a] at x_a
  double sup_abs() const;
};

/// Throws StructureViolation if |K_ij(x,0)| > tol for some i <= j.
GMatrix extract_G(const KernelField& field, const ValidatedProblem& vp, double tol = 1e-8);

}  // namespace backstep
