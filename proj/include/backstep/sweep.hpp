#pragma once

#include <span>

#include "backstep/characteristics.hpp"
#include "backstep/reduction.hpp"

namespace backstep {

/// Cubic interpolation of one entry of a triangle field at (x, xi). Uses the 10-node
/// principal lattice of a sub-triangle of the grid that lies inside 0 <= xi <= x, so no
/// value outside the domain is ever read.
double interpolate_cubic(std::span<const double> field, int n2, int entry, int m, double x,
                         double xi);

/// Same on the stencil with corner (a0, b0); (x, xi) may lie a little outside it.
double interpolate_stencil(std::span<const double> field, int n2, int entry, int m, int a0,
                           int b0, double x, double xi);

/// Right-hand sides of the first-order system at every node:
///   rhs_k = L - F1 K - K F2,   rhs_l = K F3 + F4 K - F1 L + L F2.
/// Arrays are node-major with n*n row-major entries per node.
void evaluate_rhs_serial(const ReductionFields& rf, std::span<const double> k,
                         std::span<const double> l, std::span<double> rhs_k,
                         std::span<double> rhs_l);
void evaluate_rhs_parallel(const ReductionFields& rf, std::span<const double> k,
                           std::span<const double> l, std::span<double> rhs_k,
                           std::span<double> rhs_l);

/// Integrates rhs along every planned characteristic and writes the new K and L values of
/// the non-imposed slots. Slots owned by no path are left untouched.
void sweep_serial(const PathPlan& plan, std::span<const double> rhs_k,
                  std::span<const double> rhs_l, std::span<double> k_out,
                  std::span<double> l_out);
void sweep_parallel(const PathPlan& plan, std::span<const double> rhs_k,
                    std::span<const double> rhs_l, std::span<double> k_out,
                    std::span<double> l_out);

}  // namespace backstep
