#pragma once

#include <optional>
#include <vector>

#include <Eigen/LU>

#include "backstep/kernel.hpp"
#include "backstep/problem.hpp"
#include "backstep/transform.hpp"

namespace backstep {

/// U(t) = int_0^1 K(1,xi) u(xi,t) dxi + b(t), b(t) = b0 exp(-alpha1 t).
struct Controller {
  std::vector<Matrix> gain;  // quadrature weights of K(1, .) at xi_b, b = 0..m
  Vector c;
  double alpha1 = 1.0;
  Vector b0;

  int m() const { return static_cast<int>(gain.size()) - 1; }
  Vector b(double t) const;
  Vector b_dot(double t) const;
  /// sum_b gain_b u_b: the x = 1 row of the Volterra operator, so w(1,t) = b(t) exactly.
  Vector feedback(const StateField& u) const;
};

/// Throws GridMismatch, InvalidProblem (c_i <= 0 or alpha1 <= 0) or
/// IncompatibleInitialCondition (u0(0) != 0).
Controller make_controller(const VolterraOperator& op, const StateField& u0, const Vector& c,
                           double alpha1);
/// Same with the trapezoid operator of the field.
Controller make_controller(const KernelField& field, const StateField& u0, const Vector& c,
                           double alpha1);

/// Crank-Nicolson step of u_t = (Sigma u_x)_x + Phi u_x + Lambda u with Dirichlet ends.
/// The block-tridiagonal matrix is factored once per (problem, dt).
class Stepper {
 public:
  /// Throws SingularStepMatrix.
  Stepper(const ValidatedProblem& vp, double dt);

  double dt() const { return dt_; }
  int n() const { return n_; }
  int m() const { return m_; }

  /// Advances u by dt with new boundary values u(0) = left, u(1) = right. The old boundary
  /// values are taken from u.
  StateField step(const StateField& u, const Vector& left, const Vector& right) const;

  /// Interior response (n x (m-1) per column, stacked node-major) of one step from u = 0
  /// to a unit right boundary value in each component.
  const Matrix& unit_response() const { return unit_response_; }

 private:
  Matrix apply_generator(const Matrix& u) const;  // interior columns of A u, n x (m-1)
  Matrix solve(Matrix rhs) const;                  // (I - dt/2 A) x = rhs on interior nodes

  int n_, m_;
  double dt_;
  double h_;
  std::vector<Matrix> lower_, diag_, upper_;      // blocks of A at interior node a = 1..m-1
  std::vector<Eigen::PartialPivLU<Matrix>> piv_;  // block Thomas pivots
  std::vector<Matrix> sweep_;                     // eliminated upper blocks
  Matrix unit_response_;                          // n(m-1) x n
};

/// Closed-loop stepping. The new interior state is affine in the new boundary value,
/// u = p + Z U, so U = feedback(u) + b(t) is solved exactly as an n x n system.
class ClosedLoop {
 public:
  /// Throws GridMismatch or SingularStepMatrix.
  ClosedLoop(const Stepper& stepper, const Controller& controller);
  StateField step(const StateField& u) const;

 private:
  const Stepper& stepper_;
  const Controller& controller_;
  Eigen::PartialPivLU<Matrix> lu_;
};

struct NormRow {
  double t = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
};

struct ControlRow {
  double t = 0.0;
  Vector u;
};

struct Trajectory {
  std::vector<StateField> snapshots;
  std::vector<NormRow> norm_series;
  std::vector<ControlRow> control_series;
  double snapshot_interval = 0.0;
};

struct SimulationOptions {
  double T = 1.0;
  int save_every = 1;
};

/// Open loop when controller is empty (U = 0). Throws IncompatibleInitialCondition,
/// GridMismatch, NonFiniteState.
Trajectory simulate(const ValidatedProblem& vp, const StateField& u0,
                    const std::optional<Controller>& controller, const SimulationOptions& opts);

struct TargetResidualRow {
  double t = 0.0;
  double max_abs = 0.0;
  double l2 = 0.0;        // sqrt of the trapezoid of |r|^2 over interior nodes
  double left = 0.0;      // |w(0,t)|
  double right = 0.0;     // |w(1,t) - b(t)|
};

struct TargetResidualReport {
  std::vector<TargetResidualRow> rows;
  /// Maxima over rows with t >= t0.
  double max_interior(double t0 = 0.0) const;
  double max_l2(double t0 = 0.0) const;
  double max_boundary() const;
};

/// Residual of w_t = (Sigma w_x)_x + Phi w_x - C w - G(x) w_x(0,t) on the transformed
/// snapshots, centered in time. Needs at least 3 snapshots (InsufficientSnapshots).
TargetResidualReport target_residual(const Trajectory& traj, const VolterraOperator& op,
                                     const ValidatedProblem& vp, const Vector& c,
                                     const GMatrix& g, const std::optional<Controller>& controller);

struct GrowthEstimate {
  double mu = 0.0;   // dominant eigenvalue of the semi-discrete generator
  double rho = 0.0;  // dominant eigenvalue of the Crank-Nicolson propagator
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on the propagator (I - tau/2 A)^{-1} (I + tau/2 A) with zero Dirichlet
/// data; mu = (2/tau)(rho - 1)/(rho + 1). A probe step tau near 1/mu separates the growing
/// mode fastest.
GrowthEstimate estimate_growth_rate(const ValidatedProblem& vp, double tau,
                                    int max_iterations = 10000, double tol = 1e-12);

}  // namespace backstep
