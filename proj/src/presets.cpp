#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wrcontrol/bounds.hpp"
#include "wrcontrol/dnwr.hpp"
#include "wrcontrol/expcli.hpp"
#include "wrcontrol/nnwr.hpp"
#include "wrcontrol/problem.hpp"
#include "wrcontrol/spectral.hpp"

namespace wrc {
namespace {

using Rows = std::vector<std::vector<CsvCell>>;

ControlProblem<double> paper_problem(double alpha, double sigma, double T,
                                     const std::vector<double>& bp,
                                     const std::vector<double>& kap) {
  auto p = make_problem(alpha, sigma, T, bp.front(), bp.back());
  p.kappa = make_partition(bp, kap);
  return p;
}

std::vector<double> equal_breakpoints(double a, double b, int n) {
  std::vector<double> bp;
  bp.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) bp.push_back(a + (b - a) * i / n);
  bp.front() = a;
  bp.back() = b;
  return bp;
}

std::vector<double> grid_of(double start, double step, double stop) {
  std::vector<double> g;
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

// Solution, control, and target profiles of the reference monodomain problem.
CsvTable fig00(unsigned) {
  const auto p = paper_problem(0.5, 1e-6, 1.0, {-1.0, 1.0}, {1.0});
  const auto mesh = build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 99);
  const auto res = monodomain_solve(p, 0.05, mesh);
  CsvTable t;
  t.header = {"x", "t", "y", "p", "u", "target"};
  for (Eigen::Index ti = 0; ti < res.y.rows(); ++ti)
    for (Eigen::Index xi = 0; xi < res.grid.size(); ++xi)
      t.rows.push_back({res.grid[xi], res.mesh.nodes[ti], res.y(ti, xi), res.p(ti, xi),
                        res.u(ti, xi), p.yq(res.grid[xi], res.mesh.nodes[ti])});
  return t;
}

// DNWR error after 8 iterations over a theta grid, one block per mesh kind.
CsvTable fig_theta_sweep(double alpha, unsigned threads) {
  CsvTable t;
  t.header = {"mesh", "theta", "error_after_K"};
  const auto grid = grid_of(0.05, 0.05, 0.95);
  const std::vector<double> bp{-1.0, -0.5, 1.0}, kap{1.0, 1.0};
  const auto part = make_partition(bp, kap);
  for (MeshKind kind :
       {MeshKind::uniform, MeshKind::one_sided_graded, MeshKind::both_sided_graded}) {
    const auto p = paper_problem(alpha, 1e-6, 1.0, {-1.0, -0.5, 1.0}, {1.0, 1.0});
    const auto mesh = build_mesh(kind, alpha, 1.0, 99);
    const auto table = sweep_theta_dnwr(p, part, grid, 0.05, mesh, 8, threads);
    for (const auto& r : table.rows)
      t.rows.push_back({std::string(mesh_kind_name(kind)), r.theta, r.error});
  }
  return t;
}

// Convergence factor against the time-interval count, per mesh kind.
CsvTable fig04(unsigned threads) {
  const std::vector<double> alphas{0.3, 0.8};
  const std::vector<MeshKind> kinds{MeshKind::uniform, MeshKind::one_sided_graded,
                                    MeshKind::both_sided_graded};
  const std::vector<int> nts{20, 40, 60, 80, 100, 120};
  const std::size_t total = alphas.size() * kinds.size() * nts.size();
  Rows rows(total);
  detail::parallel_for(total, threads, [&](std::size_t idx) {
    const std::size_t ia = idx / (kinds.size() * nts.size());
    const std::size_t ik = (idx / nts.size()) % kinds.size();
    const std::size_t in = idx % nts.size();
    const auto mesh = build_mesh(kinds[ik], alphas[ia], 1.0, nts[in] - 1);
    const auto sd = decompose(assemble_coupled(mesh, 1e-6));
    rows[idx] = {alphas[ia], std::string(mesh_kind_name(kinds[ik])),
                 static_cast<double>(nts[in]), convergence_factor_rho(sd, 0.5, 1.5, 1.0, 1.0)};
  });
  CsvTable t;
  t.header = {"alpha", "mesh", "nt", "rho"};
  t.rows = std::move(rows);
  return t;
}

// Convergence factor against the regularization parameter, per mesh kind.
CsvTable fig05(unsigned threads) {
  const std::vector<double> alphas{0.3, 0.8};
  const std::vector<MeshKind> kinds{MeshKind::uniform, MeshKind::one_sided_graded,
                                    MeshKind::both_sided_graded};
  const std::vector<double> sigmas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  const std::size_t total = alphas.size() * kinds.size() * sigmas.size();
  Rows rows(total);
  detail::parallel_for(total, threads, [&](std::size_t idx) {
    const std::size_t ia = idx / (kinds.size() * sigmas.size());
    const std::size_t ik = (idx / sigmas.size()) % kinds.size();
    const std::size_t is = idx % sigmas.size();
    const auto mesh = build_mesh(kinds[ik], alphas[ia], 1.0, 99);
    const auto sd = decompose(assemble_coupled(mesh, sigmas[is]));
    rows[idx] = {alphas[ia], std::string(mesh_kind_name(kinds[ik])), sigmas[is],
                 convergence_factor_rho(sd, 0.5, 1.5, 1.0, 1.0)};
  });
  CsvTable t;
  t.header = {"alpha", "mesh", "sigma", "rho"};
  t.rows = std::move(rows);
  return t;
}

// Convergence factor and observed divergence against the first subdomain length.
CsvTable fig06(unsigned threads) {
  const std::vector<double> alphas{0.3, 0.7, 1.0};
  const auto h1s = grid_of(0.1, 0.1, 1.9);
  CsvTable t;
  t.header = {"alpha", "h1", "rho", "diverged"};
  for (double alpha : alphas) {
    const auto mesh = build_mesh(MeshKind::both_sided_graded, alpha, 1.0, 99);
    const auto sd = decompose(assemble_coupled(mesh, 1e-2));
    Rows rows(h1s.size());
    detail::parallel_for(h1s.size(), threads, [&](std::size_t i) {
      const double h1 = h1s[i];
      const double rho = convergence_factor_rho(sd, h1, 2.0 - h1, 1.0, 1.0);
      const std::vector<double> bp{-1.0, -1.0 + h1, 1.0}, kap{1.0, 1.0};
      const auto p = paper_problem(alpha, 1e-2, 1.0, bp, kap);
      const auto part = make_partition(bp, kap);
      const auto res = run_dnwr(p, part, 0.5, 0.5, 0.05, mesh, 1e-10, 40);
      rows[i] = {alpha, h1, rho, res.report.diverged ? 1.0 : 0.0};
    });
    for (auto& r : rows) t.rows.push_back(std::move(r));
  }
  return t;
}

// Measured DNWR error with the theoretical envelope, per fractional order.
CsvTable fig07(unsigned threads) {
  const std::vector<double> alphas{0.3, 0.7, 1.0};
  std::vector<Rows> blocks(alphas.size());
  detail::parallel_for(alphas.size(), threads, [&](std::size_t ia) {
    const double alpha = alphas[ia];
    const std::vector<double> bp{-1.0, -0.5, 1.0}, kap{1.0, 1.0};
    const auto p = paper_problem(alpha, 1e-6, 1.0, bp, kap);
    const auto part = make_partition(bp, kap);
    const auto mesh = build_mesh(MeshKind::both_sided_graded, alpha, 1.0, 99);
    DnwrEngine<double> engine(p, part, 0.05, mesh);
    const auto res = engine.iterate(0.5, 0.5, 1e-10, 25);
    const auto sd = decompose(engine.op());
    const int K = static_cast<int>(res.report.errors.size()) - 1;
    const auto curve = dnwr_error_bound(sd, 0.5, 1.5, 1.0, 1.0, K, res.report.errors.front());
    const double rho = convergence_factor_rho(sd, 0.5, 1.5, 1.0, 1.0);
    for (int k = 0; k <= K; ++k)
      blocks[ia].push_back({alpha, static_cast<double>(k),
                            res.report.errors[static_cast<std::size_t>(k)],
                            curve.values[static_cast<std::size_t>(k)], rho, curve.lambda,
                            curve.cond_inf});
  });
  CsvTable t;
  t.header = {"alpha", "k", "measured", "bound", "rho", "lambda", "cond_inf"};
  for (auto& b : blocks)
    for (auto& r : b) t.rows.push_back(std::move(r));
  return t;
}

// NNWR error after five iterations over the (theta1, theta2) grid.
CsvTable fig3(unsigned threads) {
  const std::vector<double> alphas{0.3, 0.7, 1.0};
  const auto grid = grid_of(0.02, 0.02, 0.48);
  const std::vector<double> bp{-4.0, -3.0, 1.0, 4.0};
  const std::vector<double> kap{0.25, 1.0, 0.25};
  const auto part = make_partition(bp, kap);
  CsvTable t;
  t.header = {"alpha", "theta1", "theta2", "error_after_K"};
  for (double alpha : alphas) {
    const auto p = paper_problem(alpha, 1e-6, 1.0, bp, kap);
    const auto mesh = build_mesh(MeshKind::both_sided_graded, alpha, 1.0, 49);
    const auto table = sweep_theta_nnwr(p, part, grid, 0.1, mesh, 5, threads);
    for (const auto& r : table.rows) t.rows.push_back({alpha, r.theta, r.theta2, r.error});
  }
  return t;
}

// NNWR error histories across fractional orders, equal and contrasted splits.
CsvTable fig_nnwr_rates(double T, unsigned threads) {
  struct Case {
    std::string name;
    std::vector<double> bp;
    std::vector<double> kap;
  };
  const std::vector<Case> cases{
      {"equal", equal_breakpoints(-4.0, 4.0, 5), {1.0, 1.0, 1.0, 1.0, 1.0}},
      {"unequal", {-4.0, -3.0, -1.5, 1.0, 2.5, 4.0}, {0.25, 1.0, 0.25, 4.0, 1.0}}};
  const std::vector<double> alphas{0.3, 0.5, 0.7, 0.9, 1.0};
  const std::size_t total = cases.size() * alphas.size();
  std::vector<Rows> blocks(total);
  detail::parallel_for(total, threads, [&](std::size_t idx) {
    const auto& cs = cases[idx / alphas.size()];
    const double alpha = alphas[idx % alphas.size()];
    const auto p = paper_problem(alpha, 1e-6, T, cs.bp, cs.kap);
    const auto part = make_partition(cs.bp, cs.kap);
    const auto mesh = build_mesh(MeshKind::both_sided_graded, alpha, T, 49);
    const auto thetas = optimal_relaxation(cs.kap, Algorithm::nnwr);
    const auto res = run_nnwr(p, part, thetas, thetas, 0.1, mesh, 1e-10, 60);
    for (std::size_t k = 0; k < res.report.errors.size(); ++k)
      blocks[idx].push_back(
          {cs.name, alpha, static_cast<double>(k), res.report.errors[k]});
  });
  CsvTable t;
  t.header = {"case", "alpha", "iteration", "error"};
  for (auto& b : blocks)
    for (auto& r : b) t.rows.push_back(std::move(r));
  return t;
}

// Measured NNWR error with the theoretical envelope over subdomain counts.
CsvTable fig_nnwr_bounds(double T, const std::vector<int>& subdomain_counts,
                         bool contrasted_kappa, unsigned threads) {
  const std::vector<double> alphas{0.3, 0.7, 1.0};
  const std::size_t total = subdomain_counts.size() * alphas.size();
  std::vector<Rows> blocks(total);
  detail::parallel_for(total, threads, [&](std::size_t idx) {
    const int N = subdomain_counts[idx / alphas.size()];
    const double alpha = alphas[idx % alphas.size()];
    std::vector<double> kap(static_cast<std::size_t>(N), 1.0);
    if (contrasted_kappa)
      for (int i = 1; i <= N / 2; ++i)
        kap[static_cast<std::size_t>(i - 1)] = kap[static_cast<std::size_t>(N - i)] =
            std::pow(4.0, 2 - i);
    const auto bp = equal_breakpoints(-4.0, 4.0, N);
    const auto p = paper_problem(alpha, 1e-6, T, bp, kap);
    const auto part = make_partition(bp, kap);
    const auto mesh = build_mesh(MeshKind::both_sided_graded, alpha, T, 49);
    NnwrEngine<double> engine(p, part, 0.1, mesh);
    const auto thetas = optimal_relaxation(kap, Algorithm::nnwr);
    const auto res = engine.iterate(thetas, thetas, 1e-10, 30);
    const auto sd = decompose(engine.op());
    const int K = static_cast<int>(res.report.errors.size()) - 1;
    const auto curve = nnwr_error_bound(sd, part, K, res.report.errors.front());
    for (int k = 0; k <= K; ++k)
      blocks[idx].push_back({static_cast<double>(N), alpha, static_cast<double>(k),
                             res.report.errors[static_cast<std::size_t>(k)],
                             curve.values[static_cast<std::size_t>(k)], curve.lambda,
                             curve.cond_inf});
  });
  CsvTable t;
  t.header = {"subdomains", "alpha", "k", "measured", "bound", "lambda", "cond_inf"};
  for (auto& b : blocks)
    for (auto& r : b) t.rows.push_back(std::move(r));
  return t;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig00", "fig01", "fig02", "fig04", "fig05", "fig06", "fig07", "fig3", "fig4",
          "fig5",  "fig6",  "fig7",  "fig8"};
}

RunOutcome run_preset(const std::string& name, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  CsvTable t;
  if (name == "fig00")
    t = fig00(opts.threads);
  else if (name == "fig01")
    t = fig_theta_sweep(0.3, opts.threads);
  else if (name == "fig02")
    t = fig_theta_sweep(0.8, opts.threads);
  else if (name == "fig04")
    t = fig04(opts.threads);
  else if (name == "fig05")
    t = fig05(opts.threads);
  else if (name == "fig06")
    t = fig06(opts.threads);
  else if (name == "fig07")
    t = fig07(opts.threads);
  else if (name == "fig3")
    t = fig3(opts.threads);
  else if (name == "fig4")
    t = fig_nnwr_rates(1.0, opts.threads);
  else if (name == "fig5")
    t = fig_nnwr_rates(10.0, opts.threads);
  else if (name == "fig6")
    t = fig_nnwr_bounds(1.0, {4, 8, 16}, false, opts.threads);
  else if (name == "fig7")
    t = fig_nnwr_bounds(10.0, {4, 8, 16}, false, opts.threads);
  else if (name == "fig8")
    t = fig_nnwr_bounds(1.0, {4, 8, 10}, true, opts.threads);
  else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("preset", "unknown preset '" + name + "'; available: " + list);
  }

  const std::string dir = opts.out_override.empty() ? "out" : opts.out_override;
  const std::string path = (std::filesystem::path(dir) / (name + ".csv")).string();
  emit_csv(t, path);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json m;
  m["version"] = library_version;
  m["preset"] = name;
  m["wall_time_seconds"] = wall;
  m["outputs"] = {name + ".csv"};
  const std::string mpath =
      (std::filesystem::path(dir) / (name + "_manifest.json")).string();
  std::ofstream f(mpath, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest: " + mpath);
  f << m.dump(2) << "\n";

  RunOutcome o;
  o.files = {path, mpath};
  std::ostringstream ss;
  ss << "preset " << name << ": " << t.rows.size() << " rows -> " << path;
  o.summary = ss.str();
  return o;
}

}  // namespace wrc
