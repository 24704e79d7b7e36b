#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

namespace backstep {

/// Real polynomial with coefficients in ascending powers: c[0] + c[1] x + ...
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { trim(); }
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial constant(double v) { return Polynomial({v}); }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial scaled(double s) const;

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  const std::vector<double>& coefficients() const { return c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

struct Extremum {
  double value;
  double at;
};

/// Exact min and max of p on [0,1]: endpoints plus the isolated real roots of p'.
std::pair<Extremum, Extremum> extrema_on_unit_interval(const Polynomial& p);

/// Roots of p in the open interval (lo, hi), isolated by dense sign scanning and
/// refined by bisection. Even-multiplicity roots that do not change sign are skipped.
std::vector<double> roots_in(const Polynomial& p, double lo, double hi);

}  // namespace backstep
