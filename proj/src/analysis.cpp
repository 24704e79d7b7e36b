#include "backstep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backstep/errors.hpp"

namespace backstep {

Constants compute_constants(const CoefficientBounds& b) {
  if (!b.g) throw MissingBound("bound g is missing; extract G from a solved kernel first");
  const double p = b.p, e = b.eps_lo, ep = b.eps_prime_hi, g = *b.g;
  Constants k;
  k.K5 = 2 * p + 1;
  k.K6 = (2 * p + e / 4 + (3 / e) * (ep * ep + p * p)) - 2 * e;
  k.K8 = (g * g / 2) * (1 / (3 * e) + 1);
  if (ep > 0) k.alphas.a2 = e / (3 * ep);
  if (p > 0) k.alphas.a3 = e / (3 * p);
  if (g > 0) k.alphas.a4 = e / (3 * g);
  return k;
}

CoefficientBounds with_g(CoefficientBounds bounds, const GMatrix& g) {
  bounds.g = g.sup_abs();
  return bounds;
}

double compute_cstar(const Constants& k, double eps_lo) {
  return 0.5 * std::max(k.K5, k.K6 + eps_lo / 4);
}

double margin(const Vector& c, double cstar) { return c.minCoeff() - cstar; }

std::vector<double> jacobi_eigenvalues(Matrix a, double tol) {
  const int n = static_cast<int>(a.rows());
  auto off = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 100 && off() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

Matrix lql(const Vector& q) {
  const int n = static_cast<int>(q.size());
  Vector tail = Vector::Zero(n);  // tail(k) = sum_{l > k} q_l
  for (int k = n - 2; k >= 0; --k) tail(k) = tail(k + 1) + q(k + 1);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = tail(std::max(i, j));
  return m;
}

namespace {

Matrix r_matrix(const Vector& q, double K8, double eps_lo) {
  Matrix r = -K8 * lql(q);
  r.diagonal() += (eps_lo / 4) * q;
  return r;
}

}  // namespace

QConstruction build_Q(int n, double K8, double eps_lo) {
  if (n < 1 || K8 < 0 || !(eps_lo > 0))
    throw InvalidProblem("build_Q needs n >= 1, K8 >= 0 and eps_lo > 0");
  Vector q(n);
  q(0) = 1.0;
  for (int k = 2; k <= n; ++k) {
    if (K8 == 0.0) {
      q(k - 1) = 1.0;
      continue;
    }
    const double mu = jacobi_eigenvalues(r_matrix(q.head(k - 1), K8, eps_lo)).front();
    q(k - 1) = mu / (2 * K8 * (k - 1));
  }
  QConstruction out;
  out.q = q;
  out.R = r_matrix(q, K8, eps_lo);
  out.min_eig_r = jacobi_eigenvalues(out.R).front();
  if (!(out.min_eig_r > 0)) {
    std::ostringstream os;
    os.precision(17);
    os << "R(Q) is not positive definite: min eig " << out.min_eig_r << ", Q = diag(";
    for (int i = 0; i < n; ++i) os << (i ? ", " : "") << q(i);
    os << ")";
    throw NonPositiveR(os.str(), std::vector<double>(q.data(), q.data() + n));
  }
  return out;
}

double compute_K7(const Vector& q, const Vector& c, double eps_lo, double eps_hi) {
  const double qh = q.maxCoeff(), ql = q.minCoeff(), ch = c.maxCoeff();
  const double s = (1 + ch) + eps_hi;
  return qh * qh / (2 * eps_lo * ql) * s * s;
}

StabilityCertificate certify(const CoefficientBounds& bounds, const Vector& c) {
  const Constants k = compute_constants(bounds);
  StabilityCertificate cert;
  cert.bounds = bounds;
  cert.K5 = k.K5;
  cert.K6 = k.K6;
  cert.K8 = k.K8;
  cert.alphas = k.alphas;
  cert.cstar = compute_cstar(k, bounds.eps_lo);
  cert.delta = margin(c, cert.cstar);
  const QConstruction qc = build_Q(static_cast<int>(c.size()), k.K8, bounds.eps_lo);
  cert.q = qc.q;
  cert.min_eig_r = qc.min_eig_r;
  cert.K7 = compute_K7(qc.q, c, bounds.eps_lo, bounds.eps_hi);
  return cert;
}

LyapunovValues lyapunov_values(const StateField& w, const Vector& q) {
  const int m = w.m();
  if (m < 3) throw GridTooCoarse("lyapunov_values needs m >= 3");
  if (q.size() != w.n()) throw GridMismatch("Q size does not match the state dimension");
  const double h = 1.0 / m;
  const Matrix& u = w.values;
  auto d1 = [&](int a) -> Vector {
    if (a == 0) return (-3.0 * u.col(0) + 4.0 * u.col(1) - u.col(2)) / (2 * h);
    if (a == m) return (3.0 * u.col(m) - 4.0 * u.col(m - 1) + u.col(m - 2)) / (2 * h);
    return (u.col(a + 1) - u.col(a - 1)) / (2 * h);
  };
  auto d2 = [&](int a) -> Vector {
    if (a == 0) return (2.0 * u.col(0) - 5.0 * u.col(1) + 4.0 * u.col(2) - u.col(3)) / (h * h);
    if (a == m)
      return (2.0 * u.col(m) - 5.0 * u.col(m - 1) + 4.0 * u.col(m - 2) - u.col(m - 3)) / (h * h);
    return (u.col(a + 1) - 2.0 * u.col(a) + u.col(a - 1)) / (h * h);
  };
  auto quad = [&](auto&& f) {
    auto qf = [&](int a) {
      const Vector v = f(a);
      return v.dot(q.cwiseProduct(v));
    };
    double acc = 0.5 * (qf(0) + qf(m));
    for (int a = 1; a < m; ++a) acc += qf(a);
    return 0.5 * h * acc;
  };
  LyapunovValues v;
  v.V1 = quad([&](int a) -> Vector { return u.col(a); });
  v.V2 = quad(d1);
  v.V3 = quad(d2);
  return v;
}

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, double t0,
                        double t1) {
  std::vector<double> ts, ys;
  for (const auto& [t, v] : series) {
    if (t < t0 || t > t1) continue;
    if (!(v > 0)) throw NonPositiveSeries("value " + std::to_string(v) + " at t=" + std::to_string(t));
    ts.push_back(t);
    ys.push_back(std::log(v));
  }
  const int n = static_cast<int>(ts.size());
  if (n < 10)
    throw InsufficientSnapshots("decay fit needs at least 10 samples in the window, got " +
                                std::to_string(n));
  double mt = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mt += ts[static_cast<std::size_t>(i)];
    my += ys[static_cast<std::size_t>(i)];
  }
  mt /= n;
  my /= n;
  double stt = 0, sty = 0;
  for (int i = 0; i < n; ++i) {
    const double dt = ts[static_cast<std::size_t>(i)] - mt;
    stt += dt * dt;
    sty += dt * (ys[static_cast<std::size_t>(i)] - my);
  }
  if (stt == 0) throw InsufficientSnapshots("decay fit needs distinct sample times");
  const double slope = sty / stt;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[static_cast<std::size_t>(i)] - (my + slope * (ts[static_cast<std::size_t>(i)] - mt));
    ss += r * r;
  }
  DecayFit fit;
  fit.rate = -slope;
  fit.residual = std::sqrt(ss / n);
  fit.samples = n;
  return fit;
}

}  // namespace backstep
