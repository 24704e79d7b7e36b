#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "backstep/kernel.hpp"
#include "backstep/problem.hpp"
#include "backstep/transform.hpp"

namespace backstep {

/// Young-inequality weights. Empty when the matching bound is 0 and the term drops out.
struct Alphas {
  std::optional<double> a2;  // eps_lo / (3 eps')
  std::optional<double> a3;  // eps_lo / (3 p)
  std::optional<double> a4;  // eps_lo / (3 g)
};

struct Constants {
  double K5 = 0.0;
  double K6 = 0.0;
  double K8 = 0.0;
  Alphas alphas;
};

/// Throws MissingBound when bounds.g is empty.
Constants compute_constants(const CoefficientBounds& bounds);

/// Copy of bounds with g = sup |g_ij| of the extracted G.
CoefficientBounds with_g(CoefficientBounds bounds, const GMatrix& g);

/// c* = max{K5, K6 + eps_lo/4} / 2.
double compute_cstar(const Constants& k, double eps_lo);

/// delta = min_i c_i - c*; the margin check c_i >= c* + delta holds with equality.
double margin(const Vector& c, double cstar);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Sweeps until the off-diagonal Frobenius norm is <= tol.
std::vector<double> jacobi_eigenvalues(Matrix a, double tol = 1e-12);

/// (L^T Q L)_ij = sum_{l > max(i,j)} q_l, with L strictly lower triangular all ones.
Matrix lql(const Vector& q);

struct QConstruction {
  Vector q;  // diagonal of Q, q_1 = 1
  Matrix R;  // (eps_lo/4) Q - K8 L^T Q L
  double min_eig_r = 0.0;
};

/// Inductive construction q_k = mu_{k-1} / (2 K8 (k-1)), mu_{k-1} = min eig R(Q_{k-1});
/// q_k = 1 when K8 = 0. Throws InvalidProblem on bad input, NonPositiveR if min eig R <= 0.
QConstruction build_Q(int n, double K8, double eps_lo);

/// K7 = (q_hi^2 / (2 eps_lo q_lo)) ((1 + c_hi) + eps_hi)^2.
double compute_K7(const Vector& q, const Vector& c, double eps_lo, double eps_hi);

struct StabilityCertificate {
  CoefficientBounds bounds;
  double K5 = 0.0, K6 = 0.0, K7 = 0.0, K8 = 0.0;
  double cstar = 0.0;
  double delta = 0.0;  // min_i c_i - c*
  Vector q;
  double min_eig_r = 0.0;
  Alphas alphas;

  bool margin_ok() const { return delta > 0.0; }
};

/// Evaluation order: constants, c*, Q (needs K8), then K7 (needs Q and C).
/// bounds.g must be set. Throws MissingBound or NonPositiveR.
StabilityCertificate certify(const CoefficientBounds& bounds, const Vector& c);

/// V1 = 1/2 int w^T Q w, V2 = same for w_x, V3 for w_xx. Centered differences inside,
/// second-order one-sided at the ends, so V3 is approximate near the boundary.
struct LyapunovValues {
  double V1 = 0.0;
  double V2 = 0.0;
  double V3 = 0.0;
};

LyapunovValues lyapunov_values(const StateField& w, const Vector& q);

struct DecayFit {
  double rate = 0.0;      // negated slope of log(value) against t
  double residual = 0.0;  // rms of the log-fit residuals
  int samples = 0;
};

/// Least squares on samples with t0 <= t <= t1. Throws NonPositiveSeries on a value <= 0 and
/// InsufficientSnapshots for fewer than 10 samples.
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, double t0,
                        double t1);

}  // namespace backstep
