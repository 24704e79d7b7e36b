#include "backstep/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "backstep/errors.hpp"

namespace backstep {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : "unused"; }

}  // namespace

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_kernel_csv(const std::filesystem::path& path, const KernelField& f,
                      const std::string& hash) {
  auto out = open_out(path);
  out << "# n=" << f.n << "\n# m=" << f.m << "\n# scheme=" << f.scheme << "\n# tol=" << fmt(f.tol)
      << "\n# iterations=" << f.iterations << "\n# final_update=" << fmt(f.final_update)
      << "\n# hash=" << hash << "\n";
  out << "a,b,x,xi,i,j,K,L\n";
  for (int a = 0; a <= f.m; ++a)
    for (int b = 0; b <= a; ++b)
      for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
          out << a << ',' << b << ',' << fmt(a * f.h()) << ',' << fmt(b * f.h()) << ',' << i + 1
              << ',' << j + 1 << ',' << fmt(f.K(a, b, i, j)) << ',' << fmt(f.L(a, b, i, j)) << '\n';
}

LoadedKernel read_kernel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open");
  std::map<std::string, std::string> meta;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
  }
  for (const char* key : {"n", "m", "scheme", "tol", "hash"})
    if (!meta.count(key)) throw ScenarioError(path.string() + ": header lacks " + key);
  LoadedKernel lk;
  KernelField& f = lk.field;
  try {
    f.n = std::stoi(meta["n"]);
    f.m = std::stoi(meta["m"]);
    f.tol = std::stod(meta["tol"]);
    if (meta.count("iterations")) f.iterations = std::stoi(meta["iterations"]);
    if (meta.count("final_update")) f.final_update = std::stod(meta["final_update"]);
  } catch (const std::exception&) {
    throw ScenarioError(path.string() + ": bad header value");
  }
  f.scheme = meta["scheme"];
  lk.hash = meta["hash"];
  const std::size_t total = Grid{f.m, 1.0}.triangle_nodes() * static_cast<std::size_t>(f.n * f.n);
  f.k.assign(total, 0.0);
  f.l.assign(total, 0.0);
  std::getline(in, line);  // column names
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int a, b, i, j;
    double x, xi, K, L;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%d,%d,%lf,%lf", &a, &b, &x, &xi, &i, &j, &K, &L) != 8 ||
        a < 0 || a > f.m || b < 0 || b > a || i < 1 || i > f.n || j < 1 || j > f.n)
      throw ScenarioError(path.string() + ": malformed row " + std::to_string(rows + 1));
    f.k[f.slot(a, b, i - 1, j - 1)] = K;
    f.l[f.slot(a, b, i - 1, j - 1)] = L;
    ++rows;
  }
  if (rows != total)
    throw ScenarioError(path.string() + ": expected " + std::to_string(total) + " rows, got " +
                        std::to_string(rows));
  return lk;
}

void write_residuals_csv(const std::filesystem::path& path, const ResidualReport& rep) {
  auto out = open_out(path);
  out << "i,j,pde,pde_smooth,kbc1,kbc1_smooth,kbc2,kbc3,first_order_k,first_order_k_smooth,"
         "first_order_l,first_order_l_smooth\n";
  for (const auto& e : rep.entries)
    out << e.i + 1 << ',' << e.j + 1 << ',' << fmt(e.pde) << ',' << fmt(e.pde_smooth) << ','
        << fmt(e.kbc1) << ',' << fmt(e.kbc1_smooth) << ',' << fmt(e.kbc2) << ',' << fmt(e.kbc3)
        << ',' << fmt(e.first_order_k) << ',' << fmt(e.first_order_k_smooth) << ','
        << fmt(e.first_order_l) << ',' << fmt(e.first_order_l_smooth) << '\n';
}

void write_g_csv(const std::filesystem::path& path, const GMatrix& g) {
  auto out = open_out(path);
  out << "a,x,i,j,g\n";
  for (int a = 0; a <= g.m; ++a)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < i; ++j)
        out << a << ',' << fmt(static_cast<double>(a) / g.m) << ',' << i + 1 << ',' << j + 1 << ','
            << fmt(g.g[static_cast<std::size_t>(a)](i, j)) << '\n';
}

void write_certificate(const std::filesystem::path& dir, const StabilityCertificate& c,
                       const Vector& cvec) {
  std::vector<std::pair<std::string, std::string>> rows{
      {"p", fmt(c.bounds.p)},
      {"eps_lo", fmt(c.bounds.eps_lo)},
      {"eps_hi", fmt(c.bounds.eps_hi)},
      {"eps_prime_hi", fmt(c.bounds.eps_prime_hi)},
      {"g", opt(c.bounds.g)},
      {"alpha2", opt(c.alphas.a2)},
      {"alpha3", opt(c.alphas.a3)},
      {"alpha4", opt(c.alphas.a4)},
      {"K5", fmt(c.K5)},
      {"K6", fmt(c.K6)},
      {"K8", fmt(c.K8)},
      {"cstar", fmt(c.cstar)},
      {"delta", fmt(c.delta)},
  };
  for (int i = 0; i < c.q.size(); ++i) rows.push_back({"q" + std::to_string(i + 1), fmt(c.q(i))});
  rows.push_back({"min_eig_R", fmt(c.min_eig_r)});
  rows.push_back({"K7", fmt(c.K7)});
  for (int i = 0; i < cvec.size(); ++i) rows.push_back({"c" + std::to_string(i + 1), fmt(cvec(i))});

  auto csv = open_out(dir / "certificate.csv");
  csv << "name,value\n";
  for (const auto& [k, v] : rows) csv << k << ',' << v << '\n';

  auto txt = open_out(dir / "certificate.txt");
  txt << "stability certificate (" << kToolVersion << ")\n";
  txt << "evaluation order: bounds, K5 K6 K8, c*, Q, K7\n\n";
  for (const auto& [k, v] : rows) txt << "  " << k << " = " << v << '\n';
  txt << "\nmargin delta=" << fmt(c.delta) << (c.margin_ok() ? "" : "  (c below c*: certificate does not apply)")
      << '\n';
  txt << "R positive definite: " << (c.min_eig_r > 0 ? "yes" : "no") << '\n';
}

void write_norms_csv(const std::filesystem::path& path, const std::vector<NormRow>& rows) {
  auto out = open_out(path);
  out << "t,l2_squared,h1_squared\n";
  for (const auto& r : rows) out << fmt(r.t) << ',' << fmt(r.l2) << ',' << fmt(r.h1) << '\n';
}

void write_control_csv(const std::filesystem::path& path, const std::vector<ControlRow>& rows) {
  auto out = open_out(path);
  out << "t";
  const int n = rows.empty() ? 0 : static_cast<int>(rows.front().u.size());
  for (int i = 0; i < n; ++i) out << ",U" << i + 1;
  out << '\n';
  for (const auto& r : rows) {
    out << fmt(r.t);
    for (int i = 0; i < n; ++i) out << ',' << fmt(r.u(i));
    out << '\n';
  }
}

void write_snapshots(const std::filesystem::path& dir, const std::vector<StateField>& snaps) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%05zu.csv", k);
    auto out = open_out(dir / name);
    const StateField& s = snaps[k];
    out << "# t=" << fmt(s.time) << "\nx";
    for (int i = 0; i < s.n(); ++i) out << ",u" << i + 1;
    out << '\n';
    for (int a = 0; a <= s.m(); ++a) {
      out << fmt(static_cast<double>(a) / s.m());
      for (int i = 0; i < s.n(); ++i) out << ',' << fmt(s.values(i, a));
      out << '\n';
    }
  }
}

void write_target_residual_csv(const std::filesystem::path& path, const TargetResidualReport& rep) {
  auto out = open_out(path);
  out << "t,max_abs,l2,left,right\n";
  for (const auto& r : rep.rows)
    out << fmt(r.t) << ',' << fmt(r.max_abs) << ',' << fmt(r.l2) << ',' << fmt(r.left) << ','
        << fmt(r.right) << '\n';
}

}  // namespace backstep
