#include "backstep/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backstep/characteristics.hpp"
#include "backstep/errors.hpp"
#include "backstep/sweep.hpp"

namespace backstep {

Matrix KernelField::K_at(int a, int b) const {
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = K(a, b, i, j);
  return out;
}

Matrix KernelField::L_at(int a, int b) const {
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = L(a, b, i, j);
  return out;
}

KernelField KernelField::zeros(int n, int m) {
  KernelField f;
  f.n = n;
  f.m = m;
  const std::size_t size = static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 2) / 2 *
                           static_cast<std::size_t>(n * n);
  f.k.assign(size, 0.0);
  f.l.assign(size, 0.0);
  return f;
}

KernelField solve_kernel(const ValidatedProblem& vp, const Vector& c, const KernelOptions& opts,
                         const FreeDataOverrides& free_data) {
  const ReductionFields rf = compute_reduction(vp, c);
  const BoundaryData bd = assemble_boundary_data(vp, c, free_data);
  return solve_kernel(rf, bd, opts);
}

KernelField solve_kernel(const ReductionFields& rf, const BoundaryData& bd,
                         const KernelOptions& opts) {
  const ValidatedProblem& vp = rf.problem();
  const int n = vp.n();
  const int m = vp.grid().m;
  const double slope = max_characteristic_slope(vp);
  if (slope * vp.grid().h() > 0.5) {
    std::ostringstream os;
    os << "grid too coarse: characteristic slope " << slope << " times h = " << vp.grid().h()
       << " exceeds half the domain";
    throw GridTooCoarse(os.str());
  }

  std::vector<TravelTime> travel;
  for (int i = 0; i < n; ++i) travel.emplace_back(vp, i);
  const PathPlan plan = plan_characteristics(vp, bd, travel, opts.sample_density);

  KernelField field = KernelField::zeros(n, m);
  field.tol = opts.tol;
  field.k = plan.k_imposed;
  field.l = plan.l_imposed;

  std::vector<double> rhs_k(field.k.size()), rhs_l(field.l.size());
  std::vector<double> next_k = field.k, next_l = field.l;

  double update = 0.0;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    if (opts.parallel) {
      evaluate_rhs_parallel(rf, field.k, field.l, rhs_k, rhs_l);
      sweep_parallel(plan, rhs_k, rhs_l, next_k, next_l);
    } else {
      evaluate_rhs_serial(rf, field.k, field.l, rhs_k, rhs_l);
      sweep_serial(plan, rhs_k, rhs_l, next_k, next_l);
    }
    update = 0.0;
    for (std::size_t s = 0; s < next_k.size(); ++s) {
      update = std::max(update, std::abs(next_k[s] - field.k[s]));
      update = std::max(update, std::abs(next_l[s] - field.l[s]));
    }
    field.k.swap(next_k);
    field.l.swap(next_l);
    if (!std::isfinite(update)) {
      throw NoConvergence(iter, update, "kernel iteration diverged (non-finite update)");
    }
    if (update < opts.tol) {
      field.iterations = iter;
      field.final_update = update;
      return field;
    }
    // The sweeps only write path-owned slots; carry imposed values into the scratch arrays.
    next_k = field.k;
    next_l = field.l;
  }
  std::ostringstream os;
  os << "kernel iteration did not reach tol " << opts.tol << " after " << opts.max_iterations
     << " iterations (last update " << update << ")";
  throw NoConvergence(opts.max_iterations, update, os.str());
}

// ---------------------------------------------------------------------------------------------
// Residuals

namespace {

struct Stencil {
  const KernelField& f;
  double h;

  // d/dx of the (i,j) entry of field `which` at (a,b); false if no stencil fits.
  bool dx(const std::vector<double>& v, int a, int b, int i, int j, double& out) const {
    auto at = [&](int aa) { return v[f.slot(aa, b, i, j)]; };
    if (a - 1 >= b && a + 1 <= f.m) {
      out = (at(a + 1) - at(a - 1)) / (2 * h);
    } else if (a + 2 <= f.m) {
      out = (-3 * at(a) + 4 * at(a + 1) - at(a + 2)) / (2 * h);
    } else if (a - 2 >= b) {
      out = (3 * at(a) - 4 * at(a - 1) + at(a - 2)) / (2 * h);
    } else {
      return false;
    }
    return true;
  }
  bool dxi(const std::vector<double>& v, int a, int b, int i, int j, double& out) const {
    auto at = [&](int bb) { return v[f.slot(a, bb, i, j)]; };
    if (b >= 1 && b + 1 <= a) {
      out = (at(b + 1) - at(b - 1)) / (2 * h);
    } else if (b + 2 <= a) {
      out = (-3 * at(b) + 4 * at(b + 1) - at(b + 2)) / (2 * h);
    } else if (b >= 2) {
      out = (3 * at(b) - 4 * at(b - 1) + at(b - 2)) / (2 * h);
    } else {
      return false;
    }
    return true;
  }
};

// Characteristics through the corners where the edge data of K_ij meet: (0,0) for i < j,
// (1,1) for i > j. Unless the data are compatible there, K is only piecewise smooth across
// them, and the coupling carries the break into every entry. Each is a level set
// T_i(x) - T_j(xi) = offset.
class CornerBands {
 public:
  explicit CornerBands(const ValidatedProblem& vp) : vp_(vp) {
    const int n = vp.n();
    for (int i = 0; i < n; ++i) travel_.emplace_back(vp, i);
    scale_ = 1.0 / std::sqrt(coefficient_bounds(vp).eps_lo);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) curves_.push_back({i, j, offset(i, j)});
  }
  bool near_any(int a, int b) const {
    for (const auto& c : curves_)
      if (near_curve(c, a, b)) return true;
    return false;
  }
  bool near(int i, int j, int a, int b) const {
    if (i == j) return false;
    return near_curve({i, j, offset(i, j)}, a, b);
  }

 private:
  struct Curve {
    int k, l;
    double offset;
  };
  const TravelTime& T(int i) const { return travel_[static_cast<std::size_t>(i)]; }
  double offset(int i, int j) const { return i < j ? 0.0 : T(i).total() - T(j).total(); }
  bool near_curve(const Curve& c, int a, int b) const {
    const double h = vp_.grid().h();
    const double psi = T(c.k)(a * h) - T(c.l)(b * h) - c.offset;
    return std::abs(psi) <= kSingularBandCells * h * scale_;
  }

  const ValidatedProblem& vp_;
  std::vector<TravelTime> travel_;
  std::vector<Curve> curves_;
  double scale_;
};

}  // namespace

bool near_corner_characteristic(const ValidatedProblem& vp, int i, int j, int a, int b) {
  return CornerBands(vp).near(i, j, a, b);
}

double ResidualReport::max_pde() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.pde);
  return v;
}
double ResidualReport::max_pde_smooth() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.pde_smooth);
  return v;
}
double ResidualReport::max_kbc1() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.kbc1);
  return v;
}
double ResidualReport::max_kbc1_smooth() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.kbc1_smooth);
  return v;
}
double ResidualReport::max_kbc2() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.kbc2);
  return v;
}
double ResidualReport::max_kbc3() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.kbc3);
  return v;
}
double ResidualReport::max_first_order_k() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.first_order_k);
  return v;
}
double ResidualReport::max_first_order_l() const {
  double v = 0;
  for (const auto& e : entries) v = std::max(v, e.first_order_l);
  return v;
}
double ResidualReport::max_first_order_smooth() const {
  double v = 0;
  for (const auto& e : entries) v = std::max({v, e.first_order_k_smooth, e.first_order_l_smooth});
  return v;
}

ResidualReport kernel_residual(const KernelField& field, const ValidatedProblem& vp,
                               const Vector& c) {
  const int n = field.n;
  const int m = field.m;
  if (n != vp.n() || m != vp.grid().m) throw GridMismatch("kernel field does not match the problem grid");
  const double h = 1.0 / m;
  const ReductionFields rf(vp, c);
  const CornerBands bands(vp);
  const Stencil st{field, h};

  ResidualReport rep;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rep.entries.push_back(EntryResidual{i, j});
  auto entry = [&](int i, int j) -> EntryResidual& { return rep.entries[static_cast<std::size_t>(i * n + j)]; };
  auto bump = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };

  // (a) second-order kernel PDE at interior nodes:
  // (S K_x)_x - (K_xi S)_xi + Phi K_x + K_xi Phi - K Lambda - C K + K Phi' = 0
  for (int a = 2; a <= m - 1; ++a) {
    const double x = a * h;
    const Matrix phix = vp.phi(x);
    for (int b = 1; b <= a - 1; ++b) {
      const double xi = b * h;
      const Matrix K = field.K_at(a, b);
      const Matrix Kx = (field.K_at(a + 1, b) - field.K_at(a - 1, b)) / (2 * h);
      const Matrix Kxi = (field.K_at(a, b + 1) - field.K_at(a, b - 1)) / (2 * h);
      Matrix R = phix * Kx + Kxi * vp.phi(xi) - K * vp.lambda(xi) - c.asDiagonal() * K +
                 K * vp.phi_prime(xi);
      for (int i = 0; i < n; ++i) {
        const double ep = vp.eps(i, x + 0.5 * h), em = vp.eps(i, x - 0.5 * h);
        for (int j = 0; j < n; ++j) {
          const double fp = vp.eps(j, xi + 0.5 * h), fm = vp.eps(j, xi - 0.5 * h);
          const double k0 = K(i, j);
          const double dxx = (ep * (field.K(a + 1, b, i, j) - k0) - em * (k0 - field.K(a - 1, b, i, j))) / (h * h);
          const double dxixi = (fp * (field.K(a, b + 1, i, j) - k0) - fm * (k0 - field.K(a, b - 1, i, j))) / (h * h);
          const double r = R(i, j) + dxx - dxixi;
          bump(entry(i, j).pde, r);
          if (!bands.near_any(a, b)) bump(entry(i, j).pde_smooth, r);
        }
      }
    }
  }

  // (b) boundary conditions on the diagonal and on xi = 0.
  auto diag_value = [&](int a, int i, int j) { return vp.eps(i, a * h) * field.K(a, a, i, j); };
  for (int a = 0; a <= m; ++a) {
    const double x = a * h;
    const Matrix phi = vp.phi(x);
    const Matrix lam = vp.lambda(x);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) bump(entry(i, j).kbc2, field.K(a, a, i, j));
        if (i <= j) bump(entry(i, j).kbc3, field.K(a, 0, i, j));

        // d/dx along the diagonal of g(s) = K_ij(s,s) and of eps_i(s) K_ij(s,s)
        auto along = [&](auto&& g) {
          if (a >= 1 && a + 1 <= m) return (g(a + 1) - g(a - 1)) / (2 * h);
          if (a == 0) return (-3 * g(0) + 4 * g(1) - g(2)) / (2 * h);
          return (3 * g(m) - 4 * g(m - 1) + g(m - 2)) / (2 * h);
        };
        const double dk = along([&](int s) { return field.K(s, s, i, j); });
        const double deps_k = along([&](int s) { return diag_value(s, i, j); });
        double kx = 0, kxi = 0;
        const bool has_x = a + 2 <= m;
        const bool has_xi = a >= 2;
        if (has_x) kx = (-3 * field.K(a, a, i, j) + 4 * field.K(a + 1, a, i, j) - field.K(a + 2, a, i, j)) / (2 * h);
        if (has_xi) kxi = (3 * field.K(a, a, i, j) - 4 * field.K(a, a - 1, i, j) + field.K(a, a - 2, i, j)) / (2 * h);
        if (!has_x) kx = dk - kxi;
        if (!has_xi) kxi = dk - kx;
        const double r = phi(i, j) * (field.K(a, a, j, j) - field.K(a, a, i, i)) + lam(i, j) +
                         (i == j ? c(i) : 0.0) + kxi * vp.eps(j, x) + vp.eps(i, x) * kx + deps_k;
        bump(entry(i, j).kbc1, r);
        // One-sided stencils reach two cells into the triangle.
        bool near = false;
        for (int s = 0; s <= 2 && !near; ++s) {
          if (a + s <= m) near = bands.near_any(a + s, a);
          if (!near && a - s >= 0) near = bands.near_any(a, a - s);
        }
        if (!near) bump(entry(i, j).kbc1_smooth, r);
      }
    }
  }

  // (c) first-order system at every node where both derivatives have a stencil.
  for (int a = 0; a <= m; ++a) {
    const double x = a * h;
    for (int b = 0; b <= a; ++b) {
      const double xi = b * h;
      const Matrix K = field.K_at(a, b);
      const Matrix L = field.L_at(a, b);
      const Matrix& f1 = rf.F1_at(a);
      const Matrix& f2 = rf.F2_at(b);
      const Matrix rk = L - f1 * K - K * f2;
      const Matrix rl = K * rf.F3_at(b) + rf.F4_at(a) * K - f1 * L + L * f2;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double kx = 0, kxi = 0, lx = 0, lxi = 0;
          if (!st.dx(field.k, a, b, i, j, kx) || !st.dxi(field.k, a, b, i, j, kxi)) continue;
          st.dx(field.l, a, b, i, j, lx);
          st.dxi(field.l, a, b, i, j, lxi);
          const double si = vp.sqrt_eps(i, x), sj = vp.sqrt_eps(j, xi);
          const double resk = si * kx + kxi * sj - rk(i, j);
          const double resl = si * lx - lxi * sj - rl(i, j);
          bump(entry(i, j).first_order_k, resk);
          bump(entry(i, j).first_order_l, resl);
          if (!bands.near_any(a, b)) {
            bump(entry(i, j).first_order_k_smooth, resk);
            bump(entry(i, j).first_order_l_smooth, resl);
          }
        }
      }
    }
  }
  return rep;
}

double GMatrix::sup_abs() const {
  double v = 0.0;
  for (const auto& gm : g) v = std::max(v, gm.cwiseAbs().maxCoeff());
  return v;
}

GMatrix extract_G(const KernelField& field, const ValidatedProblem& vp, double tol) {
  const int n = field.n;
  if (n != vp.n() || field.m != vp.grid().m) throw GridMismatch("kernel field does not match the problem grid");
  GMatrix G;
  G.n = n;
  G.m = field.m;
  for (int a = 0; a <= field.m; ++a) {
    Matrix g = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double k0 = field.K(a, 0, i, j);
        if (j < i) {
          g(i, j) = -k0 * vp.eps(j, 0.0);
        } else if (std::abs(k0) > tol) {
          std::ostringstream os;
          os << "K_" << (i + 1) << (j + 1) << "(x,0) = " << k0 << " at x = " << a * field.h()
             << " violates the upper-triangular trace condition";
          throw StructureViolation(os.str());
        }
      }
    }
    G.g.push_back(std::move(g));
  }
  return G;
}

}  // namespace backstep
