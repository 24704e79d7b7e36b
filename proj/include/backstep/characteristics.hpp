#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "backstep/boundary.hpp"
#include "backstep/problem.hpp"

namespace backstep {

/// T(x) = int_0^x dy / sqrt(eps(y)). Characteristics of the (i,j) entry are the level
/// sets T_i(x) - T_j(xi) = const (K family) and T_i(x) + T_j(xi) = const (L family),
/// traversed at unit speed in the parameter sigma.
class TravelTime {
 public:
  TravelTime(const ValidatedProblem& vp, int state, int intervals = 2048);

  double operator()(double x) const;
  /// Inverse map, tau clamped to [0, total()].
  double inverse(double tau) const;
  double total() const { return t_.back(); }

 private:
  double hermite(int k, double u) const;
  double hermite_slope(int k, double u) const;

  int intervals_;
  double step_;
  std::vector<double> t_;      // T at table nodes
  std::vector<double> slope_;  // 1/sqrt(eps) at table nodes
};

enum class Field : std::uint8_t { K = 0, L = 1 };

/// Quadrature point of a path. (a0, b0) is the corner of the 10-node interpolation stencil.
struct PathPoint {
  double x = 0.0;
  double xi = 0.0;
  double weight = 0.0;
  std::uint16_t a0 = 0;
  std::uint16_t b0 = 0;
};

/// One characteristic integral: value = boundary_value + sign * sum weight * rhs(point).
/// The weights are composite Simpson on the pieces between crossings of corner curves.
struct Path {
  std::uint32_t node;
  std::uint16_t entry;  // i * n + j
  Field field;
  double boundary_value;
  double sign;
  std::uint32_t offset;
  std::uint32_t count;
};

/// Corner characteristic T_i(x) - T_j(xi) = offset of the K_ij family, through (0,0) for
/// i < j and through (1,1) for i > j. K and L have gradient jumps across these unless the
/// data are compatible at the corner.
struct CornerCurve {
  int i;
  int j;
  double offset;
};

std::vector<CornerCurve> corner_curves(const std::vector<TravelTime>& travel);

/// Corner (a0, b0) of the sub-triangle lattice used for cubic interpolation at (x, xi).
std::pair<int, int> default_stencil(int m, double x, double xi);

/// Picks interpolation stencils whose nodes all lie on the same side of every corner curve
/// as the evaluation point, falling back to the default stencil where none exists.
class StencilSelector {
 public:
  StencilSelector(const ValidatedProblem& vp, const std::vector<TravelTime>& travel);

  std::pair<int, int> operator()(double x, double xi) const;
  const std::vector<CornerCurve>& curves() const { return curves_; }
  double psi(std::size_t c, double x, double xi) const;

 private:
  bool stencil_ok(int a0, int b0, const std::vector<double>& point_psi) const;

  const std::vector<TravelTime>& travel_;
  int m_;
  std::size_t nodes_;
  std::vector<CornerCurve> curves_;
  std::vector<double> node_psi_;
  double reach_;
};

/// Characteristic integration plan for a fixed (problem, boundary data, grid). Imposed nodes
/// (traces on the edges) are not listed; their values live in the initial field.
struct PathPlan {
  int n = 0;
  int m = 0;
  std::vector<Path> paths;
  std::vector<PathPoint> points;
  /// Slot values for imposed nodes, indexed like the field arrays (node * n^2 + entry).
  std::vector<double> k_imposed, l_imposed;
  std::vector<std::uint8_t> k_is_imposed, l_is_imposed;
};

/// Samples per unit physical length along a path; 1.0 means about one sample per cell.
PathPlan plan_characteristics(const ValidatedProblem& vp, const BoundaryData& bd,
                              const std::vector<TravelTime>& travel, double sample_density = 1.0);

/// Largest characteristic slope max sqrt(eps_j(xi)) / sqrt(eps_i(x)) over all entries.
double max_characteristic_slope(const ValidatedProblem& vp);

}  // namespace backstep
