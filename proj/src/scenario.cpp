#include "backstep/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "backstep/analysis.hpp"
#include "backstep/errors.hpp"

namespace backstep {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError(path + ": " + msg);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "not finite");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

Polynomial polynomial(const json& v, const std::string& path) {
  if (v.is_number()) return Polynomial{number(v, path)};
  if (!v.is_array()) fail(path, "expected a coefficient array (ascending powers) or a number");
  std::vector<double> c;
  for (std::size_t k = 0; k < v.size(); ++k) c.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  return Polynomial(std::move(c));
}

void matrix_field(const json& v, const std::string& path, int n, std::vector<Polynomial>& out) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) fail(path, "expected " + std::to_string(n) + " rows");
  for (int i = 0; i < n; ++i) {
    const std::string row = path + "[" + std::to_string(i) + "]";
    const json& r = v[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<int>(r.size()) != n) fail(row, "expected " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i * n + j)] =
          polynomial(r[static_cast<std::size_t>(j)], row + "[" + std::to_string(j) + "]");
  }
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario(const std::string& text, const std::string& name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ScenarioError("syntax error at line " + std::to_string(line) + ", column " +
                        std::to_string(col) + ": " + e.what());
  }
  Scenario s;
  s.name = name;
  s.source = text;

  const int version = integer(require(root, "schema_version", "$"), "$.schema_version");
  if (version != kSchemaVersion)
    fail("$.schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                 std::to_string(kSchemaVersion) + ")");

  const json& pj = require(root, "problem", "$");
  const int n = integer(require(pj, "n", "$.problem"), "$.problem.n");
  if (n < 1) fail("$.problem.n", "must be >= 1");
  s.problem = ProblemSpec::zeros(n);
  const json& sj = require(pj, "sigma", "$.problem");
  if (!sj.is_array() || static_cast<int>(sj.size()) != n)
    fail("$.problem.sigma", "expected " + std::to_string(n) + " diagonal entries");
  for (int i = 0; i < n; ++i)
    s.problem.sigma[static_cast<std::size_t>(i)] =
        polynomial(sj[static_cast<std::size_t>(i)], "$.problem.sigma[" + std::to_string(i) + "]");
  if (pj.contains("phi")) matrix_field(pj["phi"], "$.problem.phi", n, s.problem.phi);
  if (pj.contains("lambda")) matrix_field(pj["lambda"], "$.problem.lambda", n, s.problem.lambda);
  if (pj.contains("free_data")) {
    const json& fd = pj["free_data"];
    if (!fd.is_array()) fail("$.problem.free_data", "expected an array");
    for (std::size_t k = 0; k < fd.size(); ++k) {
      const std::string path = "$.problem.free_data[" + std::to_string(k) + "]";
      const int i = integer(require(fd[k], "i", path), path + ".i");
      const int j = integer(require(fd[k], "j", path), path + ".j");
      if (i < 1 || i > n || j < 1 || j > n) fail(path, "indices are 1-based and must be within n");
      s.free_data[{i - 1, j - 1}] = polynomial(require(fd[k], "coeffs", path), path + ".coeffs");
    }
  }

  const json& gj = require(root, "grid", "$");
  s.grid.m = integer(require(gj, "m", "$.grid"), "$.grid.m");
  if (gj.contains("dt")) s.grid.dt = number(gj["dt"], "$.grid.dt");
  if (!(s.grid.dt > 0)) fail("$.grid.dt", "must be positive");

  if (root.contains("kernel")) {
    const json& kj = root["kernel"];
    if (kj.contains("tol")) s.kernel.tol = number(kj["tol"], "$.kernel.tol");
    if (kj.contains("max_iterations"))
      s.kernel.max_iterations = integer(kj["max_iterations"], "$.kernel.max_iterations");
  }

  const json& cj = require(root, "control", "$");
  if (cj.contains("c")) {
    const json& c = cj["c"];
    if (!c.is_array() || static_cast<int>(c.size()) != n)
      fail("$.control.c", "expected " + std::to_string(n) + " entries");
    Vector v(n);
    for (int i = 0; i < n; ++i) {
      const std::string path = "$.control.c[" + std::to_string(i) + "]";
      v(i) = number(c[static_cast<std::size_t>(i)], path);
      if (!(v(i) > 0)) fail(path, "must be positive");
    }
    s.control.c = v;
  }
  if (cj.contains("c_margin")) s.control.c_margin = number(cj["c_margin"], "$.control.c_margin");
  if (s.control.c.has_value() == s.control.c_margin.has_value())
    fail("$.control", "give exactly one of c and c_margin");
  if (cj.contains("alpha1")) s.control.alpha1 = number(cj["alpha1"], "$.control.alpha1");
  if (!(s.control.alpha1 > 0)) fail("$.control.alpha1", "must be positive");
  if (cj.contains("delta")) s.control.delta = number(cj["delta"], "$.control.delta");

  if (root.contains("run")) {
    const json& rj = root["run"];
    if (rj.contains("T")) s.run.T = number(rj["T"], "$.run.T");
    if (!(s.run.T > 0)) fail("$.run.T", "must be positive");
    if (rj.contains("save_every")) s.run.save_every = integer(rj["save_every"], "$.run.save_every");
    if (s.run.save_every < 1) fail("$.run.save_every", "must be >= 1");
    if (rj.contains("mode")) {
      const json& mj = rj["mode"];
      const std::string mode = mj.is_string() ? mj.get<std::string>() : "";
      if (mode == "open") s.run.mode = RunMode::open;
      else if (mode == "closed") s.run.mode = RunMode::closed;
      else if (mode == "both") s.run.mode = RunMode::both;
      else fail("$.run.mode", "expected \"open\", \"closed\" or \"both\"");
    }
    if (rj.contains("initial")) {
      const json& ij = rj["initial"];
      if (!ij.is_array() || static_cast<int>(ij.size()) != n)
        fail("$.run.initial", "expected " + std::to_string(n) + " components");
      for (int i = 0; i < n; ++i) {
        const std::string path = "$.run.initial[" + std::to_string(i) + "]";
        const json& e = ij[static_cast<std::size_t>(i)];
        if (!e.is_object()) fail(path, "expected an object");
        InitialComponent comp;
        if (e.contains("poly")) comp.poly = polynomial(e["poly"], path + ".poly");
        if (e.contains("sine_amplitude")) comp.amplitude = number(e["sine_amplitude"], path + ".sine_amplitude");
        if (e.contains("sine_mode")) comp.mode = integer(e["sine_mode"], path + ".sine_mode");
        s.run.initial.push_back(comp);
      }
    }
  }
  if (s.run.initial.empty())
    for (int i = 0; i < n; ++i) s.run.initial.push_back(InitialComponent{{}, 1.0, 1});

  json keyed = {{"problem", pj}, {"grid", gj}, {"control", cj}};
  if (root.contains("kernel")) keyed["kernel"] = root["kernel"];
  s.hash = fnv1a(keyed.dump());
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str(), path.stem().string());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

StateField Scenario::initial_state() const {
  const int n = problem.n, m = grid.m;
  StateField u = StateField::zeros(n, m);
  for (int i = 0; i < n; ++i) {
    const InitialComponent& c = run.initial[static_cast<std::size_t>(i)];
    for (int a = 0; a <= m; ++a) {
      const double x = grid.x(a);
      // sin(k pi) is exactly 0 at x = 1
      const double wave = a == m ? 0.0 : c.amplitude * std::sin(c.mode * std::numbers::pi * x);
      u.values(i, a) = c.poly(x) + wave;
    }
  }
  return u;
}

Vector resolve_c(const Scenario& s, const ValidatedProblem& vp) {
  if (s.control.c) return *s.control.c;
  CoefficientBounds b = coefficient_bounds(vp);
  b.g = 0.0;
  const double cstar = compute_cstar(compute_constants(b), b.eps_lo);
  return Vector::Constant(vp.n(), cstar + *s.control.c_margin);
}

}  // namespace backstep
