#include "backstep/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace backstep {

Polynomial Polynomial::derivative() const {
  std::vector<double> d;
  for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(static_cast<double>(k) * c_[k]);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
  for (std::size_t k = 0; k < o.c_.size(); ++k) r[k] -= o.c_[k];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::scaled(double s) const {
  std::vector<double> r = c_;
  for (auto& v : r) v *= s;
  return Polynomial(std::move(r));
}

std::vector<double> roots_in(const Polynomial& p, double lo, double hi) {
  std::vector<double> roots;
  if (p.degree() < 1) return roots;
  const int samples = std::max(2000, 200 * p.degree());
  const double step = (hi - lo) / samples;
  double xa = lo;
  double fa = p(xa);
  for (int k = 1; k <= samples; ++k) {
    const double xb = lo + k * step;
    const double fb = p(xb);
    if (fa == 0.0 && xa > lo) {
      roots.push_back(xa);
    } else if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      double a = xa, b = xb, ya = fa;
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double mid = 0.5 * (a + b);
        const double ym = p(mid);
        if ((ym < 0.0) == (ya < 0.0)) {
          a = mid;
          ya = ym;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    xa = xb;
    fa = fb;
  }
  return roots;
}

std::pair<Extremum, Extremum> extrema_on_unit_interval(const Polynomial& p) {
  std::vector<double> candidates{0.0, 1.0};
  for (double r : roots_in(p.derivative(), 0.0, 1.0)) candidates.push_back(r);
  Extremum lo{p(0.0), 0.0};
  Extremum hi = lo;
  for (double x : candidates) {
    const double v = p(x);
    if (v < lo.value) lo = {v, x};
    if (v > hi.value) hi = {v, x};
  }
  return {lo, hi};
}

}  // namespace backstep
