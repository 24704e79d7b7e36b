#include "backstep/sweep.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace backstep {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

inline double lagrange_factor(int alpha, double t) {
  switch (alpha) {
    case 0: return 1.0;
    case 1: return t;
    case 2: return 0.5 * t * (t - 1.0);
    default: return t * (t - 1.0) * (t - 2.0) / 6.0;
  }
}

inline void rhs_at_node(const ReductionFields& rf, int n, int a, int b, const double* k,
                        const double* l, double* rk, double* rl) {
  ConstMap K(k, n, n), L(l, n, n);
  MutMap RK(rk, n, n), RL(rl, n, n);
  const Matrix& f1 = rf.F1_at(a);
  const Matrix& f2 = rf.F2_at(b);
  RK = L - f1 * K - K * f2;
  RL = K * rf.F3_at(b) + rf.F4_at(a) * K - f1 * L + L * f2;
}

inline double integrate_path(const PathPlan& plan, const Path& p, std::span<const double> rhs) {
  const int n2 = plan.n * plan.n;
  double acc = 0.0;
  for (std::size_t k = 0; k < p.count; ++k) {
    const PathPoint& q = plan.points[p.offset + k];
    acc += q.weight * interpolate_stencil(rhs, n2, p.entry, plan.m, q.a0, q.b0, q.x, q.xi);
  }
  return p.boundary_value + p.sign * acc;
}

}  // namespace

double interpolate_cubic(std::span<const double> field, int n2, int entry, int m, double x,
                         double xi) {
  const auto [a0, b0] = default_stencil(m, x, xi);
  return interpolate_stencil(field, n2, entry, m, a0, b0, x, xi);
}

double interpolate_stencil(std::span<const double> field, int n2, int entry, int m, int a0,
                           int b0, double x, double xi) {
  const double u = x * m - a0;
  const double v = xi * m - b0;
  const double t1 = 3.0 - u, t2 = u - v, t3 = v;
  double acc = 0.0;
  for (int p = 0; p <= 3; ++p) {
    const double l1 = lagrange_factor(3 - p, t1);
    for (int q = 0; q <= p; ++q) {
      const double w = l1 * lagrange_factor(p - q, t2) * lagrange_factor(q, t3);
      const std::size_t node = Grid::tri(a0 + p, b0 + q);
      acc += w * field[node * static_cast<std::size_t>(n2) + static_cast<std::size_t>(entry)];
    }
  }
  return acc;
}

void evaluate_rhs_serial(const ReductionFields& rf, std::span<const double> k,
                         std::span<const double> l, std::span<double> rhs_k,
                         std::span<double> rhs_l) {
  const int n = rf.n();
  const int m = rf.problem().grid().m;
  const std::size_t n2 = static_cast<std::size_t>(n * n);
  for (int a = 0; a <= m; ++a) {
    for (int b = 0; b <= a; ++b) {
      const std::size_t off = Grid::tri(a, b) * n2;
      rhs_at_node(rf, n, a, b, k.data() + off, l.data() + off, rhs_k.data() + off,
                  rhs_l.data() + off);
    }
  }
}

void evaluate_rhs_parallel(const ReductionFields& rf, std::span<const double> k,
                           std::span<const double> l, std::span<double> rhs_k,
                           std::span<double> rhs_l) {
  const int n = rf.n();
  const int m = rf.problem().grid().m;
  const std::size_t n2 = static_cast<std::size_t>(n * n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int a = 0; a <= m; ++a) {
    for (int b = 0; b <= a; ++b) {
      const std::size_t off = Grid::tri(a, b) * n2;
      rhs_at_node(rf, n, a, b, k.data() + off, l.data() + off, rhs_k.data() + off,
                  rhs_l.data() + off);
    }
  }
}

void sweep_serial(const PathPlan& plan, std::span<const double> rhs_k,
                  std::span<const double> rhs_l, std::span<double> k_out,
                  std::span<double> l_out) {
  const std::size_t n2 = static_cast<std::size_t>(plan.n * plan.n);
  for (const Path& p : plan.paths) {
    const std::size_t slot = static_cast<std::size_t>(p.node) * n2 + p.entry;
    if (p.field == Field::K)
      k_out[slot] = integrate_path(plan, p, rhs_k);
    else
      l_out[slot] = integrate_path(plan, p, rhs_l);
  }
}

void sweep_parallel(const PathPlan& plan, std::span<const double> rhs_k,
                    std::span<const double> rhs_l, std::span<double> k_out,
                    std::span<double> l_out) {
  const std::size_t n2 = static_cast<std::size_t>(plan.n * plan.n);
  const auto count = static_cast<std::ptrdiff_t>(plan.paths.size());
  // Each slot is written by exactly one path, so the result does not depend on the schedule.
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t idx = 0; idx < count; ++idx) {
    const Path& p = plan.paths[static_cast<std::size_t>(idx)];
    const std::size_t slot = static_cast<std::size_t>(p.node) * n2 + p.entry;
    if (p.field == Field::K)
      k_out[slot] = integrate_path(plan, p, rhs_k);
    else
      l_out[slot] = integrate_path(plan, p, rhs_l);
  }
}

}  // namespace backstep
