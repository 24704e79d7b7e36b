#include "backstep/characteristics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace backstep {

namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

// Finds the first sigma in (0, sigma_max] with f(sigma) <= 0, scanning at spacing ds and
// refining by bisection. f(0) > 0 is assumed.
std::optional<double> first_crossing(const std::function<double(double)>& f, double sigma_max,
                                     double ds) {
  double lo = 0.0;
  const int steps = std::max(1, static_cast<int>(std::ceil(sigma_max / ds)));
  for (int k = 1; k <= steps; ++k) {
    const double hi = (k == steps) ? sigma_max : k * ds;
    if (f(hi) <= 0.0) {
      double a = lo, b = hi;
      for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, b); ++it) {
        const double mid = 0.5 * (a + b);
        if (f(mid) <= 0.0)
          b = mid;
        else
          a = mid;
      }
      return 0.5 * (a + b);
    }
    lo = hi;
  }
  return std::nullopt;
}

}  // namespace

TravelTime::TravelTime(const ValidatedProblem& vp, int state, int intervals)
    : intervals_(intervals), step_(1.0 / intervals) {
  t_.assign(static_cast<std::size_t>(intervals + 1), 0.0);
  slope_.assign(static_cast<std::size_t>(intervals + 1), 0.0);
  for (int k = 0; k <= intervals; ++k) slope_[static_cast<std::size_t>(k)] = 1.0 / vp.sqrt_eps(state, k * step_);
  double acc = 0.0;
  for (int k = 0; k < intervals; ++k) {
    const double mid = (k + 0.5) * step_;
    double part = 0.0;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q)
      part += kGaussWeights[q] / vp.sqrt_eps(state, mid + 0.5 * step_ * kGaussNodes[q]);
    acc += 0.5 * step_ * part;
    t_[static_cast<std::size_t>(k + 1)] = acc;
  }
}

double TravelTime::hermite(int k, double u) const {
  const auto K = static_cast<std::size_t>(k);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  return h00 * t_[K] + h10 * step_ * slope_[K] + h01 * t_[K + 1] + h11 * step_ * slope_[K + 1];
}

double TravelTime::hermite_slope(int k, double u) const {
  const auto K = static_cast<std::size_t>(k);
  const double u2 = u * u;
  const double d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1;
  const double d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
  return d00 * t_[K] + d10 * step_ * slope_[K] + d01 * t_[K + 1] + d11 * step_ * slope_[K + 1];
}

double TravelTime::operator()(double x) const {
  x = std::clamp(x, 0.0, 1.0);
  const int k = std::min(intervals_ - 1, static_cast<int>(x / step_));
  return hermite(k, (x - k * step_) / step_);
}

double TravelTime::inverse(double tau) const {
  if (tau <= 0.0) return 0.0;
  if (tau >= total()) return 1.0;
  const auto it = std::upper_bound(t_.begin(), t_.end(), tau);
  const int k = std::clamp(static_cast<int>(it - t_.begin()) - 1, 0, intervals_ - 1);
  const auto K = static_cast<std::size_t>(k);
  double lo = 0.0, hi = 1.0;
  double u = (tau - t_[K]) / (t_[K + 1] - t_[K]);
  for (int iter = 0; iter < 60; ++iter) {
    const double r = hermite(k, u) - tau;
    if (r > 0.0)
      hi = u;
    else
      lo = u;
    double next = u - r / hermite_slope(k, u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-16) {
      u = next;
      break;
    }
    u = next;
  }
  return std::min(1.0, (k + u) * step_);
}

std::vector<CornerCurve> corner_curves(const std::vector<TravelTime>& travel) {
  std::vector<CornerCurve> out;
  const int n = static_cast<int>(travel.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        const double off = i < j ? 0.0 : travel[static_cast<std::size_t>(i)].total() - travel[static_cast<std::size_t>(j)].total();
        out.push_back({i, j, off});
      }
  return out;
}

std::pair<int, int> default_stencil(int m, double x, double xi) {
  const double ua = x * m;
  const double ub = xi * m;
  const int a0 = std::clamp(static_cast<int>(std::floor(ua)) - 1, 0, m - 3);
  const double r = ua - a0;
  const int b0 = std::clamp(static_cast<int>(std::lround(ub - 0.5 * r)), 0, a0);
  return {a0, b0};
}

namespace {
constexpr double kPsiTol = 1e-10;
}  // namespace

StencilSelector::StencilSelector(const ValidatedProblem& vp, const std::vector<TravelTime>& travel)
    : travel_(travel), m_(vp.grid().m), nodes_(vp.grid().triangle_nodes()), curves_(corner_curves(travel)) {
  const double h = vp.grid().h();
  node_psi_.resize(curves_.size() * nodes_);
  for (std::size_t c = 0; c < curves_.size(); ++c)
    for (int a = 0; a <= m_; ++a)
      for (int b = 0; b <= a; ++b) node_psi_[c * nodes_ + Grid::tri(a, b)] = psi(c, a * h, b * h);
  reach_ = 8.0 * h / std::sqrt(coefficient_bounds(vp).eps_lo);
}

double StencilSelector::psi(std::size_t c, double x, double xi) const {
  const CornerCurve& cc = curves_[c];
  return travel_[static_cast<std::size_t>(cc.i)](x) - travel_[static_cast<std::size_t>(cc.j)](xi) - cc.offset;
}

bool StencilSelector::stencil_ok(int a0, int b0, const std::vector<double>& point_psi) const {
  for (std::size_t c = 0; c < curves_.size(); ++c) {
    const double sp = point_psi[c];
    if (std::abs(sp) > reach_) continue;
    bool any_pos = false, any_neg = false;
    for (int p = 0; p <= 3; ++p)
      for (int q = 0; q <= p; ++q) {
        const double v = node_psi_[c * nodes_ + Grid::tri(a0 + p, b0 + q)];
        any_pos = any_pos || v > kPsiTol;
        any_neg = any_neg || v < -kPsiTol;
      }
    if (sp > kPsiTol ? any_neg : (sp < -kPsiTol ? any_pos : (any_pos && any_neg))) return false;
  }
  return true;
}

std::pair<int, int> StencilSelector::operator()(double x, double xi) const {
  std::vector<double> point_psi(curves_.size());
  for (std::size_t c = 0; c < curves_.size(); ++c) point_psi[c] = psi(c, x, xi);
  const auto def = default_stencil(m_, x, xi);
  if (stencil_ok(def.first, def.second, point_psi)) return def;
  const double ua = x * m_, ub = xi * m_;
  const int fa = static_cast<int>(std::floor(ua)), fb = static_cast<int>(std::floor(ub));
  std::pair<int, int> best = def;
  double best_key = std::numeric_limits<double>::infinity();
  for (int a0 = std::max(0, fa - 3); a0 <= std::min(m_ - 3, fa + 1); ++a0) {
    for (int b0 = std::max(0, fb - 3); b0 <= std::min(a0, fb + 1); ++b0) {
      if (!stencil_ok(a0, b0, point_psi)) continue;
      const double u = ua - a0, v = ub - b0;
      const double outside = std::max({0.0, -v, v - u, u - 3.0});
      const double key = outside + 1e-3 * (std::abs(a0 - def.first) + std::abs(b0 - def.second));
      if (key < best_key) {
        best_key = key;
        best = {a0, b0};
      }
    }
  }
  return best;
}

double max_characteristic_slope(const ValidatedProblem& vp) {
  const auto b = coefficient_bounds(vp);
  return std::sqrt(b.eps_hi / b.eps_lo);
}

PathPlan plan_characteristics(const ValidatedProblem& vp, const BoundaryData& bd,
                              const std::vector<TravelTime>& travel, double sample_density) {
  const int n = vp.n();
  const int m = vp.grid().m;
  const double h = vp.grid().h();
  const std::size_t n2 = static_cast<std::size_t>(n * n);
  const std::size_t nodes = vp.grid().triangle_nodes();

  double vmax = 0.0;
  for (int i = 0; i < n; ++i) vmax = std::max(vmax, std::sqrt(extrema_on_unit_interval(vp.spec().sigma[static_cast<std::size_t>(i)]).second.value));
  const double scan_step = 0.5 * h / vmax;

  PathPlan plan;
  plan.n = n;
  plan.m = m;
  plan.k_imposed.assign(nodes * n2, 0.0);
  plan.l_imposed.assign(nodes * n2, 0.0);
  plan.k_is_imposed.assign(nodes * n2, 0);
  plan.l_is_imposed.assign(nodes * n2, 0);

  // Quadrature is split where a path crosses a corner curve, and interpolation stencils
  // stay on the side of the point being evaluated.
  const StencilSelector select_stencil(vp, travel);
  const auto& curves = select_stencil.curves();
  const std::size_t nc = curves.size();
  auto psi = [&](std::size_t c, const PathPoint& q) { return select_stencil.psi(c, q.x, q.xi); };

  auto segments_for = [&](double length) {
    const int s = static_cast<int>(std::ceil(length * vmax * sample_density / (2.0 * h)));
    return 2 * std::max(1, s);
  };

  auto clamp_point = [](PathPoint q) {
    q.x = std::clamp(q.x, 0.0, 1.0);
    q.xi = std::clamp(q.xi, 0.0, q.x);
    return q;
  };

  auto emit = [&](std::size_t node, int e, Field field, double bval, double sign, double sigma_end,
                  const std::function<PathPoint(double)>& at, PathPoint end) {
    end = clamp_point(end);
    std::vector<double> cuts{0.0};
    if (nc > 0) {
      const int coarse = segments_for(sigma_end);
      std::vector<PathPoint> samples;
      for (int k = 0; k <= coarse; ++k) samples.push_back(k == coarse ? end : clamp_point(at(k * sigma_end / coarse)));
      for (std::size_t c = 0; c < nc; ++c) {
        double prev = psi(c, samples[0]);
        for (int k = 1; k <= coarse; ++k) {
          const double cur = psi(c, samples[static_cast<std::size_t>(k)]);
          if (prev * cur < 0.0 && std::abs(prev) > kPsiTol && std::abs(cur) > kPsiTol) {
            double lo = (k - 1) * sigma_end / coarse, hi = k * sigma_end / coarse;
            const bool rising = cur > prev;
            for (int it = 0; it < 60; ++it) {
              const double mid = 0.5 * (lo + hi);
              const PathPoint q = clamp_point(at(mid));
              if ((psi(c, q) > 0.0) == rising)
                hi = mid;
              else
                lo = mid;
            }
            cuts.push_back(0.5 * (lo + hi));
          }
          prev = cur;
        }
      }
    }
    cuts.push_back(sigma_end);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pieces{cuts.front()};
    for (std::size_t k = 1; k < cuts.size(); ++k)
      if (cuts[k] - pieces.back() > 1e-12 * std::max(1.0, sigma_end)) pieces.push_back(cuts[k]);
    pieces.back() = sigma_end;

    Path p{};
    p.node = static_cast<std::uint32_t>(node);
    p.entry = static_cast<std::uint16_t>(e);
    p.field = field;
    p.boundary_value = bval;
    p.sign = sign;
    p.offset = static_cast<std::uint32_t>(plan.points.size());
    for (std::size_t piece = 0; piece + 1 < pieces.size(); ++piece) {
      const double s0 = pieces[piece], s1 = pieces[piece + 1];
      const int seg = segments_for(s1 - s0);
      const double ds = (s1 - s0) / seg;
      for (int k = 0; k <= seg; ++k) {
        const double w = ds / 3.0 * ((k == 0 || k == seg) ? 1.0 : ((k % 2 == 1) ? 4.0 : 2.0));
        if (k == 0 && piece > 0) {
          plan.points.back().weight += w;
          continue;
        }
        const bool last = piece + 2 == pieces.size() && k == seg;
        PathPoint q = last ? end : clamp_point(at(s0 + k * ds));
        q.weight = w;
        const auto [a0, b0] = select_stencil(q.x, q.xi);
        q.a0 = static_cast<std::uint16_t>(a0);
        q.b0 = static_cast<std::uint16_t>(b0);
        plan.points.push_back(q);
      }
    }
    if (pieces.size() < 2) {
      // zero-length path: the boundary value alone
      PathPoint q = end;
      q.weight = 0.0;
      const auto [a0, b0] = default_stencil(m, q.x, q.xi);
      q.a0 = static_cast<std::uint16_t>(a0);
      q.b0 = static_cast<std::uint16_t>(b0);
      plan.points.push_back(q);
    }
    p.count = static_cast<std::uint32_t>(plan.points.size() - p.offset);
    plan.paths.push_back(p);
  };

  for (int a = 0; a <= m; ++a) {
    const double x = a * h;
    for (int b = 0; b <= a; ++b) {
      const double xi = b * h;
      const std::size_t node = Grid::tri(a, b);
      for (int i = 0; i < n; ++i) {
        const TravelTime& Ti = travel[static_cast<std::size_t>(i)];
        const double tix = Ti(x);
        for (int j = 0; j < n; ++j) {
          const TravelTime& Tj = travel[static_cast<std::size_t>(j)];
          const double tjxi = Tj(xi);
          const int e = i * n + j;
          const std::size_t slot = node * n2 + static_cast<std::size_t>(e);

          // ---- K entry ----
          auto impose_k = [&](double v) {
            plan.k_imposed[slot] = v;
            plan.k_is_imposed[slot] = 1;
          };
          if (b == a) {
            impose_k(i == j ? bd.k_diag(a, i) : 0.0);
          } else if (i <= j && b == 0) {
            impose_k(0.0);
          } else if (i > j && a == m) {
            impose_k(bd.free_data(i, j, xi));
          } else if (i <= j) {
            auto at = [&](double s) { return PathPoint{Ti.inverse(tix - s), Tj.inverse(tjxi - s)}; };
            const double sigma_bottom = tjxi;
            std::optional<double> cross;
            if (i < j) {
              const double smax = std::min(tix, tjxi);
              cross = first_crossing([&](double s) { auto q = at(s); return q.x - q.xi; }, smax, scan_step);
            }
            if (cross) {
              const PathPoint q = at(*cross);
              const double d = 0.5 * (q.x + q.xi);
              emit(node, e, Field::K, 0.0, +1.0, *cross, at, {d, d});
            } else {
              emit(node, e, Field::K, 0.0, +1.0, sigma_bottom, at, {at(sigma_bottom).x, 0.0});
            }
          } else {
            // i > j: data lie downstream on the diagonal and on x = 1.
            auto at = [&](double s) { return PathPoint{Ti.inverse(tix + s), Tj.inverse(tjxi + s)}; };
            const double sigma_right = Ti.total() - tix;
            const double smax = std::min(sigma_right, Tj.total() - tjxi);
            const auto cross =
                first_crossing([&](double s) { auto q = at(s); return q.x - q.xi; }, smax, scan_step);
            if (cross) {
              const PathPoint q = at(*cross);
              const double d = 0.5 * (q.x + q.xi);
              emit(node, e, Field::K, 0.0, -1.0, *cross, at, {d, d});
            } else {
              const double xe = std::min(1.0, at(smax).xi);
              emit(node, e, Field::K, bd.free_data(i, j, xe), -1.0, smax, at, {1.0, xe});
            }
          }

          // ---- L entry ----
          if (b == a) {
            plan.l_imposed[slot] = bd.l_trace(x, i, j);
            plan.l_is_imposed[slot] = 1;
          } else {
            auto at = [&](double s) { return PathPoint{Ti.inverse(tix - s), Tj.inverse(tjxi + s)}; };
            double lo = 0.0, hi = std::min(tix, Tj.total() - tjxi);
            for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
              const double mid = 0.5 * (lo + hi);
              const PathPoint q = at(mid);
              if (q.x - q.xi <= 0.0)
                hi = mid;
              else
                lo = mid;
            }
            const double s_end = 0.5 * (lo + hi);
            const PathPoint q = at(s_end);
            const double d = 0.5 * (q.x + q.xi);
            emit(node, e, Field::L, bd.l_trace(d, i, j), +1.0, s_end, at, {d, d});
          }
        }
      }
    }
  }
  return plan;
}

}  // namespace backstep
