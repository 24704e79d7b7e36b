#include "backstep/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "backstep/errors.hpp"

namespace backstep {

namespace {

constexpr double kMinRcond = 1e-13;

std::string grid_text(double dt, int m) {
  return "dt=" + std::to_string(dt) + ", m=" + std::to_string(m);
}

}  // namespace

Vector Controller::b(double t) const { return b0 * std::exp(-alpha1 * t); }

Vector Controller::b_dot(double t) const { return -alpha1 * b(t); }

Vector Controller::feedback(const StateField& u) const {
  Vector acc = Vector::Zero(u.n());
  for (int b = 0; b <= m(); ++b) acc.noalias() += gain[static_cast<std::size_t>(b)] * u.values.col(b);
  return acc;
}

Controller make_controller(const KernelField& field, const StateField& u0, const Vector& c,
                           double alpha1) {
  return make_controller(VolterraOperator(field), u0, c, alpha1);
}

Controller make_controller(const VolterraOperator& op, const StateField& u0, const Vector& c,
                           double alpha1) {
  if (u0.n() != op.n() || u0.m() != op.m())
    throw GridMismatch("initial condition grid does not match the kernel grid");
  if (c.size() != op.n() || (c.array() <= 0.0).any())
    throw InvalidProblem("controller needs n positive damping entries c_i");
  if (!(alpha1 > 0.0)) throw InvalidProblem("alpha1 must be positive");
  if (u0.values.col(0).cwiseAbs().maxCoeff() > 1e-12)
    throw IncompatibleInitialCondition("u0(0) must vanish, got |u0(0)| = " +
                                       std::to_string(u0.values.col(0).cwiseAbs().maxCoeff()));
  Controller ctl;
  ctl.c = c;
  ctl.alpha1 = alpha1;
  for (int b = 0; b <= op.m(); ++b) ctl.gain.push_back(op.weight(op.m(), b));
  ctl.b0 = u0.values.col(op.m()) - ctl.feedback(u0);
  return ctl;
}

Stepper::Stepper(const ValidatedProblem& vp, double dt)
    : n_(vp.n()), m_(vp.grid().m), dt_(dt), h_(vp.grid().h()) {
  if (!(dt > 0.0)) throw SingularStepMatrix("time step must be positive (" + grid_text(dt, m_) + ")");
  const auto M = static_cast<std::size_t>(m_);
  lower_.resize(M);
  diag_.resize(M);
  upper_.resize(M);
  piv_.resize(M);
  sweep_.resize(M);
  const Matrix I = Matrix::Identity(n_, n_);
  for (int a = 1; a < m_; ++a) {
    const double x = a * h_;
    Vector ep(n_), em(n_);
    for (int i = 0; i < n_; ++i) {
      ep(i) = vp.eps(i, x + 0.5 * h_);
      em(i) = vp.eps(i, x - 0.5 * h_);
    }
    const Matrix phi = vp.phi(x);
    const auto A = static_cast<std::size_t>(a);
    lower_[A] = Matrix(em.asDiagonal()) / (h_ * h_) - phi / (2 * h_);
    upper_[A] = Matrix(ep.asDiagonal()) / (h_ * h_) + phi / (2 * h_);
    diag_[A] = Matrix((-(ep + em) / (h_ * h_)).asDiagonal()) + vp.lambda(x);
  }
  // Block Thomas factorization of I - dt/2 A.
  for (int a = 1; a < m_; ++a) {
    const auto A = static_cast<std::size_t>(a);
    Matrix d = I - 0.5 * dt_ * diag_[A];
    if (a > 1) d -= (-0.5 * dt_ * lower_[A]) * sweep_[A - 1];
    piv_[A].compute(d);
    if (!(piv_[A].rcond() > kMinRcond))
      throw SingularStepMatrix("Crank-Nicolson matrix is singular at node " + std::to_string(a) +
                               " (" + grid_text(dt_, m_) + ")");
    if (a < m_ - 1) sweep_[A] = piv_[A].solve(-0.5 * dt_ * upper_[A]);
  }
  unit_response_ = Matrix::Zero(n_ * (m_ - 1), n_);
  for (int k = 0; k < n_; ++k) {
    Matrix rhs = Matrix::Zero(n_, m_ - 1);
    rhs.col(m_ - 2) = 0.5 * dt_ * upper_[M - 1].col(k);
    const Matrix x = solve(rhs);
    unit_response_.col(k) = Eigen::Map<const Vector>(x.data(), x.size());
  }
}

Matrix Stepper::apply_generator(const Matrix& u) const {
  Matrix out(n_, m_ - 1);
  for (int a = 1; a < m_; ++a) {
    const auto A = static_cast<std::size_t>(a);
    out.col(a - 1) = lower_[A] * u.col(a - 1) + diag_[A] * u.col(a) + upper_[A] * u.col(a + 1);
  }
  return out;
}

Matrix Stepper::solve(Matrix rhs) const {
  for (int a = 1; a < m_; ++a) {
    const auto A = static_cast<std::size_t>(a);
    Vector r = rhs.col(a - 1);
    if (a > 1) r -= (-0.5 * dt_ * lower_[A]) * rhs.col(a - 2);
    rhs.col(a - 1) = piv_[A].solve(r);
  }
  for (int a = m_ - 2; a >= 1; --a)
    rhs.col(a - 1) -= sweep_[static_cast<std::size_t>(a)] * rhs.col(a);
  return rhs;
}

StateField Stepper::step(const StateField& u, const Vector& left, const Vector& right) const {
  Matrix rhs = u.values.middleCols(1, m_ - 1) + 0.5 * dt_ * apply_generator(u.values);
  rhs.col(0) += 0.5 * dt_ * lower_[1] * left;
  rhs.col(m_ - 2) += 0.5 * dt_ * upper_[static_cast<std::size_t>(m_ - 1)] * right;
  StateField next{Matrix(n_, m_ + 1), u.time + dt_};
  next.values.col(0) = left;
  next.values.middleCols(1, m_ - 1) = solve(std::move(rhs));
  next.values.col(m_) = right;
  return next;
}

ClosedLoop::ClosedLoop(const Stepper& stepper, const Controller& controller)
    : stepper_(stepper), controller_(controller) {
  const int n = stepper.n(), m = stepper.m();
  if (controller.m() != m || controller.gain.front().rows() != n)
    throw GridMismatch("controller grid does not match the simulation grid");
  Matrix M = controller.gain.back();
  const Matrix& Z = stepper.unit_response();
  for (int b = 1; b < m; ++b)
    M.noalias() += controller.gain[static_cast<std::size_t>(b)] * Z.middleRows((b - 1) * n, n);
  lu_.compute(Matrix::Identity(n, n) - M);
  if (!(lu_.rcond() > kMinRcond))
    throw SingularStepMatrix("closed-loop boundary system is singular (" +
                             grid_text(stepper.dt(), m) + ")");
}

StateField ClosedLoop::step(const StateField& u) const {
  const int n = stepper_.n(), m = stepper_.m();
  const Vector zero = Vector::Zero(n);
  StateField next = stepper_.step(u, zero, zero);
  const Vector U = lu_.solve(controller_.feedback(next) + controller_.b(next.time));
  const Vector z = stepper_.unit_response() * U;
  next.values.middleCols(1, m - 1) += Eigen::Map<const Matrix>(z.data(), n, m - 1);
  next.values.col(m) = U;
  return next;
}

Trajectory simulate(const ValidatedProblem& vp, const StateField& u0,
                    const std::optional<Controller>& controller, const SimulationOptions& opts) {
  const int n = vp.n(), m = vp.grid().m;
  const double dt = vp.grid().dt;
  if (u0.n() != n || u0.m() != m) throw GridMismatch("initial condition grid does not match the problem grid");
  if (u0.values.col(0).cwiseAbs().maxCoeff() > 1e-12)
    throw IncompatibleInitialCondition("u0(0) must vanish");
  if (opts.save_every < 1) throw InvalidProblem("save_every must be at least 1");
  const Stepper stepper(vp, dt);
  std::optional<ClosedLoop> loop;
  if (controller) loop.emplace(stepper, *controller);

  Trajectory traj;
  traj.snapshot_interval = opts.save_every * dt;
  auto record = [&](const StateField& u, int k) {
    const SquaredNorms nn = norms(u);
    traj.norm_series.push_back({u.time, nn.l2, nn.h1});
    traj.control_series.push_back({u.time, controller ? Vector(u.values.col(m)) : Vector::Zero(n)});
    if (k % opts.save_every == 0) traj.snapshots.push_back(u);
  };

  const long steps = std::lround(opts.T / dt);
  StateField u = u0;
  record(u, 0);
  const Vector zero = Vector::Zero(n);
  for (long k = 1; k <= steps; ++k) {
    StateField next = loop ? loop->step(u) : stepper.step(u, zero, zero);
    next.time = k * dt;
    if (!next.values.allFinite())
      throw NonFiniteState(next.time, "state became non-finite at t = " + std::to_string(next.time));
    u = std::move(next);
    record(u, static_cast<int>(k % opts.save_every));
  }
  return traj;
}

double TargetResidualReport::max_interior(double t0) const {
  double v = 0.0;
  for (const auto& r : rows)
    if (r.t >= t0) v = std::max(v, r.max_abs);
  return v;
}

double TargetResidualReport::max_l2(double t0) const {
  double v = 0.0;
  for (const auto& r : rows)
    if (r.t >= t0) v = std::max(v, r.l2);
  return v;
}

double TargetResidualReport::max_boundary() const {
  double v = 0.0;
  for (const auto& r : rows) v = std::max({v, r.left, r.right});
  return v;
}

TargetResidualReport target_residual(const Trajectory& traj, const VolterraOperator& op,
                                     const ValidatedProblem& vp, const Vector& c,
                                     const GMatrix& g, const std::optional<Controller>& controller) {
  if (traj.snapshots.size() < 3)
    throw InsufficientSnapshots("target residual needs at least 3 snapshots, got " +
                                std::to_string(traj.snapshots.size()));
  const int n = vp.n(), m = vp.grid().m;
  const double h = vp.grid().h();
  const double dT = traj.snapshot_interval;
  std::vector<StateField> w;
  w.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) w.push_back(forward_transform(op, s));

  std::vector<Vector> ep(static_cast<std::size_t>(m)), em(static_cast<std::size_t>(m));
  std::vector<Matrix> phi(static_cast<std::size_t>(m));
  for (int a = 1; a < m; ++a) {
    const auto A = static_cast<std::size_t>(a);
    ep[A].resize(n);
    em[A].resize(n);
    for (int i = 0; i < n; ++i) {
      ep[A](i) = vp.eps(i, (a + 0.5) * h);
      em[A](i) = vp.eps(i, (a - 0.5) * h);
    }
    phi[A] = vp.phi(a * h);
  }

  TargetResidualReport rep;
  for (std::size_t k = 1; k + 1 < w.size(); ++k) {
    const Matrix& W = w[k].values;
    const Vector wx0 = (-3.0 * W.col(0) + 4.0 * W.col(1) - W.col(2)) / (2 * h);
    TargetResidualRow row;
    row.t = w[k].time;
    double sq = 0.0;
    for (int a = 1; a < m; ++a) {
      const auto A = static_cast<std::size_t>(a);
      const Vector wt = (w[k + 1].values.col(a) - w[k - 1].values.col(a)) / (2 * dT);
      const Vector diff = (ep[A].cwiseProduct(W.col(a + 1) - W.col(a)) -
                           em[A].cwiseProduct(W.col(a) - W.col(a - 1))) / (h * h);
      const Vector adv = phi[A] * (W.col(a + 1) - W.col(a - 1)) / (2 * h);
      const Vector r = wt - diff - adv + c.cwiseProduct(W.col(a)) + g.g[A] * wx0;
      row.max_abs = std::max(row.max_abs, r.cwiseAbs().maxCoeff());
      sq += h * r.squaredNorm();
    }
    row.l2 = std::sqrt(sq);
    row.left = W.col(0).cwiseAbs().maxCoeff();
    const Vector b = controller ? controller->b(row.t) : Vector::Zero(n);
    row.right = (W.col(m) - b).cwiseAbs().maxCoeff();
    rep.rows.push_back(row);
  }
  return rep;
}

GrowthEstimate estimate_growth_rate(const ValidatedProblem& vp, double tau, int max_iterations,
                                    double tol) {
  const int n = vp.n(), m = vp.grid().m;
  const Stepper stepper(vp, tau);
  StateField v = StateField::zeros(n, m);
  for (int a = 1; a < m; ++a)
    for (int i = 0; i < n; ++i) v.values(i, a) = 1.0 + 0.1 * i + 0.5 * a / m;
  v.values /= v.values.norm();
  const Vector zero = Vector::Zero(n);
  GrowthEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    StateField next = stepper.step(v, zero, zero);
    const double rho = v.values.cwiseProduct(next.values).sum();
    next.values /= next.values.norm();
    next.time = 0.0;
    v = std::move(next);
    est.rho = rho;
    est.iterations = it;
    if (it > 1 && std::abs(rho - prev) <= tol * std::abs(rho)) {
      est.converged = true;
      break;
    }
    prev = rho;
  }
  est.mu = 2.0 / tau * (est.rho - 1.0) / (est.rho + 1.0);
  return est;
}

}  // namespace backstep
