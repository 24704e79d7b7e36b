#include "backstep/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "backstep/characteristics.hpp"
#include "backstep/errors.hpp"
#include "backstep/sweep.hpp"

namespace backstep {

namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

void check_grid(const VolterraOperator& op, const StateField& f) {
  if (f.n() != op.n() || f.m() != op.m())
    throw GridMismatch("state is n=" + std::to_string(f.n()) + ", m=" + std::to_string(f.m()) +
                       " but kernel is n=" + std::to_string(op.n()) + ", m=" +
                       std::to_string(op.m()));
}

// Lagrange basis on consecutive nodes first..first+count-1 at s (grid units).
std::vector<double> lagrange(int first, int count, double s) {
  std::vector<double> l(static_cast<std::size_t>(count), 1.0);
  for (int p = 0; p < count; ++p)
    for (int q = 0; q < count; ++q)
      if (q != p) l[static_cast<std::size_t>(p)] *= (s - (first + q)) / static_cast<double>(p - q);
  return l;
}

// Window of up to four consecutive nodes within [lo, hi] around s.
std::pair<int, int> window(int lo, int hi, double s) {
  const int count = std::min(4, hi - lo + 1);
  const int first = std::clamp(static_cast<int>(std::floor(s)) - (count - 1) / 2, lo, hi - count + 1);
  return {first, count};
}

}  // namespace

VolterraOperator::VolterraOperator(const KernelField& field) : n_(field.n), m_(field.m) {
  const double h = field.h();
  w_.resize(Grid{m_, 1.0}.triangle_nodes());
  for (int a = 0; a <= m_; ++a)
    for (int b = 0; b <= a; ++b)
      w_[Grid::tri(a, b)] = (a == 0 ? 0.0 : ((b == 0 || b == a) ? 0.5 * h : h)) * field.K_at(a, b);
}

VolterraOperator::VolterraOperator(const KernelField& field, const ValidatedProblem& vp)
    : n_(field.n), m_(field.m) {
  if (vp.n() != n_ || vp.grid().m != m_) throw GridMismatch("kernel grid does not match the problem grid");
  const double h = field.h();
  std::vector<TravelTime> travel;
  for (int i = 0; i < n_; ++i) travel.emplace_back(vp, i);
  const StencilSelector select(vp, travel);
  const auto& curves = select.curves();
  w_.assign(Grid{m_, 1.0}.triangle_nodes(), Matrix::Zero(n_, n_));
  for (int a = 1; a <= m_; ++a) {
    const double x = a * h;
    std::vector<double> cuts{0.0, x};
    for (const CornerCurve& c : curves) {
      const double tau = travel[static_cast<std::size_t>(c.i)](x) - c.offset;
      if (tau <= 0.0) continue;
      const double xi = travel[static_cast<std::size_t>(c.j)].inverse(tau);
      if (xi > 1e-12 && xi < x - 1e-12) cuts.push_back(xi);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], hi = cuts[k + 1];
      if (hi - lo < 1e-14) continue;
      const int parts = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
      const double d = (hi - lo) / parts;
      for (int q = 0; q < parts; ++q) {
        for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
          const double xi = lo + (q + 0.5) * d + 0.5 * d * kGaussNodes[g];
          const double omega = 0.5 * d * kGaussWeights[g];
          const double s = xi / h;
          const auto [a0, b0] = select(x, xi);
          Matrix K(n_, n_);
          for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
              K(i, j) = interpolate_stencil(field.k, n_ * n_, i * n_ + j, m_, a0, b0, x, xi);
          const auto [uf, uc] = window(0, a, s);
          const auto lu = lagrange(uf, uc, s);
          for (int p = 0; p < uc; ++p) w_[Grid::tri(a, uf + p)] += omega * lu[static_cast<std::size_t>(p)] * K;
        }
      }
    }
  }
}

Vector VolterraOperator::apply_row(int a, const Matrix& f) const {
  Vector acc = Vector::Zero(n_);
  for (int b = 0; b <= a; ++b) acc.noalias() += weight(a, b) * f.col(b);
  return acc;
}

StateField StateField::zeros(int n, int m, double time) {
  return StateField{Matrix::Zero(n, m + 1), time};
}

StateField forward_transform(const VolterraOperator& op, const StateField& f) {
  check_grid(op, f);
  StateField g = f;
  for (int a = 1; a <= op.m(); ++a) g.values.col(a) -= op.apply_row(a, f.values);
  return g;
}

StateField forward_transform(const KernelField& field, const StateField& f) {
  return forward_transform(VolterraOperator(field), f);
}

StateField inverse_transform(const VolterraOperator& op, const StateField& g) {
  check_grid(op, g);
  StateField f = g;
  const int n = op.n();
  for (int a = 1; a <= op.m(); ++a) {
    Vector rhs = g.values.col(a);
    for (int b = 0; b < a; ++b) rhs.noalias() += op.weight(a, b) * f.values.col(b);
    f.values.col(a) = (Matrix::Identity(n, n) - op.weight(a, a)).partialPivLu().solve(rhs);
  }
  return f;
}

StateField inverse_transform(const KernelField& field, const StateField& g) {
  return inverse_transform(VolterraOperator(field), g);
}

SquaredNorms norms(const StateField& f) {
  const int m = f.m();
  const double h = 1.0 / m;
  const Matrix& u = f.values;
  auto trap = [&](auto&& sq) {
    double acc = 0.5 * (sq(0) + sq(m));
    for (int a = 1; a < m; ++a) acc += sq(a);
    return h * acc;
  };
  auto deriv = [&](int a) -> Vector {
    if (a == 0) return (-3.0 * u.col(0) + 4.0 * u.col(1) - u.col(2)) / (2 * h);
    if (a == m) return (3.0 * u.col(m) - 4.0 * u.col(m - 1) + u.col(m - 2)) / (2 * h);
    return (u.col(a + 1) - u.col(a - 1)) / (2 * h);
  };
  SquaredNorms r;
  r.l2 = trap([&](int a) { return u.col(a).squaredNorm(); });
  r.h1 = r.l2 + trap([&](int a) { return deriv(a).squaredNorm(); });
  return r;
}

TransformBounds transform_bounds(const KernelField& field) {
  const int m = field.m;
  const double h = field.h();
  TransformBounds t;
  for (int a = 0; a <= m; ++a) {
    for (int b = 0; b <= a; ++b) {
      t.sup_k = std::max(t.sup_k, field.K_at(a, b).operatorNorm());
      Matrix kx;
      if (a + 1 <= m && b <= a - 1)
        kx = (field.K_at(a + 1, b) - field.K_at(a - 1, b)) / (2 * h);
      else if (a + 1 <= m)
        kx = (field.K_at(a + 1, b) - field.K_at(a, b)) / h;
      else if (b <= a - 1)
        kx = (field.K_at(a, b) - field.K_at(a - 1, b)) / h;
      else
        continue;
      t.sup_kx = std::max(t.sup_kx, kx.operatorNorm());
    }
  }
  t.sup_p = t.sup_k * std::exp(t.sup_k);
  t.sup_px = t.sup_kx * (1.0 + t.sup_p) + t.sup_k * t.sup_p;
  t.k1 = 1.0 + t.sup_k * (1.0 + t.sup_kx);
  t.k2 = 1.0 + t.sup_p * (1.0 + t.sup_px);
  return t;
}

}  // namespace backstep
