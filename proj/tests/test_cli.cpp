#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "backstep/artifacts.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(BACKSTEP_TEST_WORKDIR) / "cli";

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path o = kWork / "stdout.txt", e = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + BACKSTEP_CLI + "\" " + args + " >\"" + o.string() +
                          "\" 2>\"" + e.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path write_scenario(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

std::string scalar(double lambda, double c, const std::string& extra = "") {
  return R"({"schema_version": 1, "problem": {"n": 1, "sigma": [1.0], "lambda": [[)" +
         std::to_string(lambda) + R"(]]}, "grid": {"m": 16, "dt": 1e-4}, "control": {"c": [)" +
         std::to_string(c) + "]" + extra + "}}";
}

fs::path out_dir(const std::string& name) {
  const fs::path d = kWork / name;
  fs::remove_all(d);
  return d;
}

std::string scenario_file(const std::string& name) { return (fs::path(BACKSTEP_SCENARIOS) / name).string(); }

}  // namespace

TEST_CASE("zero reaction gives a zero kernel") {
  const fs::path s = write_scenario("zero", scalar(-1.0, 1.0));
  const fs::path out = out_dir("zero");
  const Run r = cli("solve --scenario " + s.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  const auto lk = backstep::read_kernel_csv(out / "kernel.csv");
  for (double v : lk.field.k) CHECK(v == 0.0);
  for (double v : lk.field.l) CHECK(v == 0.0);
  for (const char* f : {"scenario.json", "residuals.csv", "G.csv", "meta.txt", "oracle.txt"})
    CHECK(fs::exists(out / f));
}

TEST_CASE("missing sigma names the field") {
  const fs::path s = write_scenario(
      "nosigma", R"({"schema_version": 1, "problem": {"n": 1}, "grid": {"m": 8}, "control": {"c": [1]}})");
  const Run r = cli("solve --scenario " + s.string() + " --out " + out_dir("nosigma").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("$.problem.sigma") != std::string::npos);
}

TEST_CASE("syntax error reports line and column") {
  const fs::path s = write_scenario("broken", "{\n  \"schema_version\": 1,\n  \"problem\": {\n}");
  const Run r = cli("solve --scenario " + s.string() + " --out " + out_dir("broken").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK(r.err.find("column") != std::string::npos);
}

TEST_CASE("non-positive diffusion is a validation error") {
  const fs::path s = write_scenario(
      "negsigma",
      R"({"schema_version": 1, "problem": {"n": 1, "sigma": [[1.0, -2.0]]}, "grid": {"m": 8}, "control": {"c": [1]}})");
  CHECK(cli("solve --scenario " + s.string() + " --out " + out_dir("negsigma").string()).code == 2);
}

TEST_CASE("kernel from another scenario is rejected") {
  const fs::path out = out_dir("mismatch");
  const fs::path a = write_scenario("mis_a", scalar(2.0, 1.0));
  const fs::path b = write_scenario("mis_b", scalar(2.0, 1.5));
  CHECK(cli("certify --scenario " + a.string() + " --out " + out.string()).code == 6);
  REQUIRE(cli("solve --scenario " + a.string() + " --out " + out.string()).code == 0);
  CHECK(cli("certify --scenario " + a.string() + " --out " + out.string()).code == 0);
  const Run r = cli("certify --scenario " + b.string() + " --out " + out.string());
  CHECK(r.code == 6);
  CHECK(r.err.find("re-run solve") != std::string::npos);
}

TEST_CASE("c below c* warns but succeeds") {
  const fs::path s = write_scenario("lowc", scalar(0.0, 0.1));
  const fs::path out = out_dir("lowc");
  REQUIRE(cli("solve --scenario " + s.string() + " --out " + out.string()).code == 0);
  const Run r = cli("certify --scenario " + s.string() + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("warning") != std::string::npos);
  CHECK(slurp(out / "certificate.txt").find("does not apply") != std::string::npos);
}

TEST_CASE("stable open loop decays") {
  const fs::path out = out_dir("stable");
  const Run r = cli("verify-all --scenario " + scenario_file("stable_heat.json") + " --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("stable_heat: ok") != std::string::npos);
  const std::string sum = slurp(out / "stable_heat" / "summary.txt");
  const auto pos = sum.find("open_loop_h1_rate=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(sum.substr(pos + 18)) < 0.0);
  CHECK(sum.find("decaying") != std::string::npos);
  CHECK(fs::exists(out / "stable_heat" / "open" / "snapshots" / "snapshot_00000.csv"));
}

TEST_CASE("scalar oracle") {
  const fs::path out = out_dir("oracle");
  REQUIRE(cli("solve --scenario " + scenario_file("scalar_oracle.json") + " --out " + out.string()).code == 0);
  const std::string o = slurp(out / "oracle.txt");
  const auto pos = o.find("max_abs_error=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(o.substr(pos + 14)) <= 5e-3);
}

TEST_CASE("reruns are byte identical and kernel.csv round-trips") {
  const fs::path a = out_dir("rerun_a"), b = out_dir("rerun_b");
  const std::string s = scenario_file("unstable_pair.json");
  REQUIRE(cli("solve --scenario " + s + " --out " + a.string()).code == 0);
  REQUIRE(cli("solve --scenario " + s + " --out " + b.string()).code == 0);
  for (const char* f : {"kernel.csv", "residuals.csv", "G.csv", "scenario.json"})
    CHECK(slurp(a / f) == slurp(b / f));

  const auto lk = backstep::read_kernel_csv(a / "kernel.csv");
  backstep::write_kernel_csv(kWork / "roundtrip.csv", lk.field, lk.hash);
  CHECK(slurp(kWork / "roundtrip.csv") == slurp(a / "kernel.csv"));

  REQUIRE(cli("certify --scenario " + s + " --out " + a.string()).code == 0);
  CHECK(slurp(a / "certificate.txt").find("margin delta=1\n") != std::string::npos);
}
