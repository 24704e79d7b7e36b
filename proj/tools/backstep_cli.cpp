// backstep: solve, certify and simulate boundary controllers for coupled parabolic systems.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "backstep/analysis.hpp"
#include "backstep/artifacts.hpp"
#include "backstep/errors.hpp"
#include "backstep/kernel.hpp"
#include "backstep/scenario.hpp"
#include "backstep/simulate.hpp"
#include "bessel_kernel.hpp"

namespace fs = std::filesystem;
using namespace backstep;

namespace {

enum Exit : int {
  kOk = 0,
  kValidation = 2,
  kNoConvergence = 3,
  kRFailure = 4,
  kNonFinite = 5,
  kHashMismatch = 6,
  kIo = 1,
};

struct Settings {
  std::optional<double> tol;
};

struct CommandError {
  int code;
  std::string message;
};

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw CommandError{kIo, "cannot write " + path.string()};
  out << text;
}

void prepare(const Scenario& s, const fs::path& out) {
  fs::create_directories(out);
  write_text(out / "scenario.json", s.source);
}

ValidatedProblem validated(const Scenario& s) {
  try {
    return validate_problem(s.problem, s.grid);
  } catch (const Error& e) {
    throw CommandError{kValidation, std::string("invalid problem: ") + e.what()};
  }
}

LoadedKernel load_kernel(const Scenario& s, const fs::path& out) {
  const fs::path path = out / "kernel.csv";
  if (!fs::exists(path)) throw CommandError{kHashMismatch, "no kernel in " + out.string() + "; run solve first"};
  LoadedKernel lk = read_kernel_csv(path);
  if (lk.hash != hash_hex(s.hash))
    throw CommandError{kHashMismatch, "kernel in " + out.string() + " was solved for scenario hash " +
                                          lk.hash + ", current is " + hash_hex(s.hash) +
                                          "; re-run solve"};
  if (lk.field.n != s.problem.n || lk.field.m != s.grid.m)
    throw CommandError{kHashMismatch, "kernel grid does not match the scenario; re-run solve"};
  return lk;
}

bool scalar_constant(const ProblemSpec& p) {
  return p.n == 1 && p.sigma[0].is_constant() && p.phi[0].is_zero() && p.lambda[0].is_constant();
}

int cmd_solve(const Scenario& s, const fs::path& out, const Settings& set, std::ostream& log) {
  prepare(s, out);
  const ValidatedProblem vp = validated(s);
  const Vector c = resolve_c(s, vp);
  KernelOptions opts = s.kernel;
  if (set.tol) opts.tol = *set.tol;
  const auto t0 = std::chrono::steady_clock::now();
  KernelField field;
  try {
    field = solve_kernel(vp, c, opts, s.free_data);
  } catch (const NoConvergence& e) {
    throw CommandError{kNoConvergence, std::string("kernel solve did not converge: ") + e.what()};
  } catch (const InvalidProblem& e) {
    throw CommandError{kValidation, std::string("invalid problem: ") + e.what()};
  } catch (const GridTooCoarse& e) {
    throw CommandError{kValidation, std::string("invalid grid: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_kernel_csv(out / "kernel.csv", field, hash_hex(s.hash));
  const ResidualReport rep = kernel_residual(field, vp, c);
  write_residuals_csv(out / "residuals.csv", rep);
  GMatrix g;
  try {
    g = extract_G(field, vp);
  } catch (const StructureViolation& e) {
    throw CommandError{kNoConvergence, std::string("kernel violates K(x,0) structure: ") + e.what()};
  }
  write_g_csv(out / "G.csv", g);

  std::ostringstream meta;
  meta << "tool=" << kToolVersion << "\nscenario=" << s.name << "\nhash=" << hash_hex(s.hash)
       << "\nscheme=" << field.scheme << "\ntol=" << fmt(field.tol)
       << "\niterations=" << field.iterations << "\nfinal_update=" << fmt(field.final_update)
       << "\nsolve_seconds=" << fmt(secs) << "\ngenerated=" << timestamp() << "\n";
  write_text(out / "meta.txt", meta.str());

  log << s.name << ": kernel converged in " << field.iterations << " iterations (update "
      << field.final_update << ", " << secs << " s); max PDE residual " << rep.max_pde()
      << ", away from corner characteristics " << rep.max_pde_smooth() << "\n";

  if (scalar_constant(s.problem)) {
    const double eps = s.problem.sigma[0](0.0);
    const double lc = (s.problem.lambda[0](0.0) + c(0)) / eps;
    double err = 0.0;
    for (int a = 0; a <= field.m; ++a)
      for (int b = 0; b <= a; ++b)
        err = std::max(err, std::abs(field.K(a, b, 0, 0) -
                                     oracle::scalar_kernel(a * field.h(), b * field.h(), lc)));
    std::ostringstream o;
    o << "closed-form scalar kernel k = -a xi I1(z)/z, a = (lambda + c)/eps = " << fmt(lc)
      << "\nmax_abs_error=" << fmt(err) << "\nwithin_5e-3=" << (err <= 5e-3 ? "yes" : "no") << "\n";
    write_text(out / "oracle.txt", o.str());
    log << s.name << ": closed-form oracle max error " << err << "\n";
  }
  return kOk;
}

StabilityCertificate make_certificate(const ValidatedProblem& vp,
                                      const KernelField& field, const Vector& c) {
  const GMatrix g = extract_G(field, vp);
  try {
    return certify(with_g(coefficient_bounds(vp), g), c);
  } catch (const NonPositiveR& e) {
    throw CommandError{kRFailure, std::string("certificate construction failed: ") + e.what()};
  }
}

int cmd_certify(const Scenario& s, const fs::path& out, const Settings&, std::ostream& log) {
  prepare(s, out);
  const ValidatedProblem vp = validated(s);
  const Vector c = resolve_c(s, vp);
  const LoadedKernel lk = load_kernel(s, out);
  const StabilityCertificate cert = make_certificate(vp, lk.field, c);
  write_certificate(out, cert, c);
  log << s.name << ": c* = " << cert.cstar << ", margin delta=" << cert.delta
      << ", min eig R = " << cert.min_eig_r << "\n";
  const double want = s.control.delta.value_or(0.0);
  if (cert.delta < want || cert.delta <= 0.0)
    log << s.name << ": warning: min c_i = " << c.minCoeff() << " is below c* + " << want
        << " = " << cert.cstar + want << "\n";
  return kOk;
}

std::vector<std::pair<double, double>> h1_series(const Trajectory& t) {
  std::vector<std::pair<double, double>> s;
  for (const auto& r : t.norm_series) s.emplace_back(r.t, r.h1);
  return s;
}

// Growth rate of H1 (slope of log H1) fitted over [T/4, T]; negative means decaying.
std::string describe_fit(const Trajectory& t, double T) {
  try {
    const DecayFit f = fit_decay_rate(h1_series(t), 0.25 * T, T);
    std::ostringstream o;
    o << fmt(-f.rate) << " (" << (f.rate > 0 ? "decaying" : "growing") << ", log-fit rms "
      << fmt(f.residual) << ", " << f.samples << " samples)";
    return o.str();
  } catch (const Error& e) {
    return std::string("unavailable: ") + e.what();
  }
}

int cmd_simulate(const Scenario& s, const fs::path& out, const Settings&, std::ostream& log) {
  prepare(s, out);
  const ValidatedProblem vp = validated(s);
  const Vector c = resolve_c(s, vp);
  const LoadedKernel lk = load_kernel(s, out);
  const StateField u0 = s.initial_state();
  const SimulationOptions opts{s.run.T, s.run.save_every};
  std::ostringstream sum;
  sum << "tool=" << kToolVersion << "\nscenario=" << s.name << "\nhash=" << hash_hex(s.hash)
      << "\nT=" << fmt(s.run.T) << "\ndt=" << fmt(s.grid.dt) << "\nm=" << s.grid.m << "\n";
  try {
    if (s.run.mode != RunMode::closed) {
      const Trajectory tr = simulate(vp, u0, std::nullopt, opts);
      fs::create_directories(out / "open");
      write_norms_csv(out / "open" / "norms.csv", tr.norm_series);
      write_control_csv(out / "open" / "control.csv", tr.control_series);
      write_snapshots(out / "open" / "snapshots", tr.snapshots);
      sum << "open_loop_h1_rate=" << describe_fit(tr, s.run.T) << "\n";
      log << s.name << ": open loop H1 " << tr.norm_series.front().h1 << " -> "
          << tr.norm_series.back().h1 << "\n";
    }
    if (s.run.mode != RunMode::open) {
      const VolterraOperator op(lk.field, vp);
      const Controller ctl = make_controller(op, u0, c, s.control.alpha1);
      const Trajectory tr = simulate(vp, u0, ctl, opts);
      fs::create_directories(out / "closed");
      write_norms_csv(out / "closed" / "norms.csv", tr.norm_series);
      write_control_csv(out / "closed" / "control.csv", tr.control_series);
      write_snapshots(out / "closed" / "snapshots", tr.snapshots);
      const StabilityCertificate cert = make_certificate(vp, lk.field, c);
      const double target = std::min(s.control.alpha1, 2 * cert.delta);
      sum << "closed_loop_h1_rate=" << describe_fit(tr, s.run.T) << "\n";
      sum << "theory_decay_min_alpha1_2delta=" << fmt(target) << "\n";
      if (tr.snapshots.size() >= 3) {
        const TargetResidualReport rep = target_residual(tr, op, vp, c, extract_G(lk.field, vp), ctl);
        write_target_residual_csv(out / "closed" / "target_residual.csv", rep);
        sum << "target_boundary_max=" << fmt(rep.max_boundary()) << "\n";
        sum << "target_residual_max_l2=" << fmt(rep.max_l2()) << "\n";
        sum << "target_residual_max_l2_after_t0.05=" << fmt(rep.max_l2(0.05)) << "\n";
      }
      log << s.name << ": closed loop H1 " << tr.norm_series.front().h1 << " -> "
          << tr.norm_series.back().h1 << " (min{alpha1, 2 delta} = " << target << ")\n";
    }
  } catch (const NonFiniteState& e) {
    throw CommandError{kNonFinite, std::string("non-finite state: ") + e.what()};
  } catch (const IncompatibleInitialCondition& e) {
    throw CommandError{kValidation, std::string("initial condition: ") + e.what()};
  } catch (const SingularStepMatrix& e) {
    throw CommandError{kValidation, std::string("time step: ") + e.what()};
  }
  write_text(out / "summary.txt", sum.str());
  return kOk;
}

using Command = int (*)(const Scenario&, const fs::path&, const Settings&, std::ostream&);

int run_guarded(const fs::path& scenario_path, const fs::path& out, const Settings& set,
                const std::vector<Command>& cmds, std::ostream& log, std::ostream& err) {
  try {
    const Scenario s = load_scenario(scenario_path);
    for (Command c : cmds) c(s, out, set, log);
    return kOk;
  } catch (const CommandError& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
}

std::vector<fs::path> expand(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.path().extension() == ".json") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backstepping boundary control for coupled parabolic systems"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::vector<std::string> scenarios;
  std::string out = "out";
  double tol = 0.0;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool many) {
    if (many)
      sub->add_option("--scenario", scenarios, "Scenario files or directories")->required();
    else
      sub->add_option("--scenario", scenarios, "Scenario file")->required()->expected(1);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--tol", tol, "Kernel fixed-point tolerance (overrides the scenario)");
  };
  CLI::App* solve = app.add_subcommand("solve", "Solve the kernel equations");
  CLI::App* cert = app.add_subcommand("certify", "Compute the stability certificate");
  CLI::App* sim = app.add_subcommand("simulate", "Simulate open and closed loop");
  CLI::App* all = app.add_subcommand("verify-all", "Solve, certify and simulate each scenario");
  add_common(solve, false);
  add_common(cert, false);
  add_common(sim, false);
  add_common(all, true);
  all->add_option("--jobs", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Settings set;
  if (tol > 0) set.tol = tol;

  if (!all->parsed()) {
    Command cmd = solve->parsed() ? cmd_solve : cert->parsed() ? cmd_certify : cmd_simulate;
    return run_guarded(scenarios.front(), out, set, {cmd}, std::cout, std::cerr);
  }

  const std::vector<fs::path> files = expand(scenarios);
  std::vector<int> codes(files.size(), 0);
  std::vector<std::string> logs(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < files.size();) {
      std::ostringstream log;
      codes[k] = run_guarded(files[k], fs::path(out) / files[k].stem(), set,
                             {cmd_solve, cmd_certify, cmd_simulate}, log, log);
      logs[k] = log.str();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<int>(jobs, static_cast<int>(files.size())); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int worst = 0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    std::cout << logs[k];
    std::cout << files[k].stem().string() << ": " << (codes[k] == 0 ? "ok" : "FAILED (exit " + std::to_string(codes[k]) + ")") << "\n";
    worst = std::max(worst, codes[k]);
  }
  return worst;
}
