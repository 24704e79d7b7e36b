#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "backstep/boundary.hpp"
#include "backstep/kernel.hpp"
#include "backstep/problem.hpp"
#include "backstep/transform.hpp"

namespace backstep {

inline constexpr int kSchemaVersion = 1;

enum class RunMode { open, closed, both };

/// u0_i(x) = poly_i(x) + amplitude_i sin(mode_i pi x).
struct InitialComponent {
  Polynomial poly;
  double amplitude = 0.0;
  int mode = 1;
};

struct ControlSettings {
  std::optional<Vector> c;            // explicit damping entries
  std::optional<double> c_margin;     // or c_i = c* + c_margin
  double alpha1 = 1.0;
  std::optional<double> delta;        // target margin for the certificate warning
};

struct RunSettings {
  double T = 1.0;
  int save_every = 100;
  RunMode mode = RunMode::both;
  std::vector<InitialComponent> initial;
};

struct Scenario {
  std::string name;
  ProblemSpec problem;
  Grid grid;
  FreeDataOverrides free_data;
  KernelOptions kernel;
  ControlSettings control;
  RunSettings run;
  std::string source;  // verbatim file text
  std::uint64_t hash = 0;

  StateField initial_state() const;
};

/// Parses a JSON scenario. Syntax errors name line and column, field errors the JSON path.
/// Throws ScenarioError.
Scenario parse_scenario(const std::string& text, const std::string& name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

std::string hash_hex(std::uint64_t h);

/// c from the scenario, resolving c_margin against c* (which does not involve g).
Vector resolve_c(const Scenario& s, const ValidatedProblem& vp);

}  // namespace backstep
