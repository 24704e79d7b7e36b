#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace backstep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// problem
class OrderingViolation : public Error {
 public:
  OrderingViolation(int i, double x, const std::string& what)
      : Error(what), index(i), at(x) {}
  int index;  // 0-based i with eps_i(x) <= eps_{i+1}(x)
  double at;
};
class NonPositiveDiffusivity : public Error {
 public:
  using Error::Error;
};
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

// kernel
class NoConvergence : public Error {
 public:
  NoConvergence(int iters, double res, const std::string& what)
      : Error(what), iterations(iters), residual(res) {}
  int iterations;
  double residual;
};
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};
class StructureViolation : public Error {
 public:
  using Error::Error;
};

// transform / simulate
class GridMismatch : public Error {
 public:
  using Error::Error;
};
class IncompatibleInitialCondition : public Error {
 public:
  using Error::Error;
};
class SingularStepMatrix : public Error {
 public:
  using Error::Error;
};
class NonFiniteState : public Error {
 public:
  NonFiniteState(double t, const std::string& what) : Error(what), time(t) {}
  double time;
};
class InsufficientSnapshots : public Error {
 public:
  using Error::Error;
};

// analysis
class MissingBound : public Error {
 public:
  using Error::Error;
};
class NonPositiveR : public Error {
 public:
  NonPositiveR(const std::string& what, std::vector<double> q_diag) : Error(what), q(std::move(q_diag)) {}
  std::vector<double> q;
};
class NonPositiveSeries : public Error {
 public:
  using Error::Error;
};

// scenario parsing
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace backstep
