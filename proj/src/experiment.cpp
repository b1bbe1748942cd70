#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
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

using ojson = nlohmann::ordered_json;

struct TargetGrid {
  std::vector<double> xs, ts;
  std::vector<std::vector<double>> v;  // v[ti][xi]
};

double interp1_weight(const std::vector<double>& g, double q, std::size_t& i0) {
  if (q <= g.front()) {
    i0 = 0;
    return 0.0;
  }
  if (q >= g.back()) {
    i0 = g.size() - 2;
    return 1.0;
  }
  const auto it = std::upper_bound(g.begin(), g.end(), q);
  i0 = static_cast<std::size_t>(it - g.begin()) - 1;
  return (q - g[i0]) / (g[i0 + 1] - g[i0]);
}

std::function<double(double, double)> load_target_file(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"x", "t", "value"})
    throw ConfigError("problem.target.file", "config error: problem.target.file needs columns x,t,value");
  std::map<double, std::map<double, double>> byt;
  for (const auto& row : t.rows) {
    if (row.size() != 3 || !std::holds_alternative<double>(row[0]) ||
        !std::holds_alternative<double>(row[1]) || !std::holds_alternative<double>(row[2]))
      throw ConfigError("problem.target.file",
                        "config error: problem.target.file rows must be numeric x,t,value");
    byt[std::get<double>(row[1])][std::get<double>(row[0])] = std::get<double>(row[2]);
  }
  auto grid = std::make_shared<TargetGrid>();
  for (const auto& [tv, xs] : byt) grid->ts.push_back(tv);
  if (grid->ts.size() < 2)
    throw ConfigError("problem.target.file", "config error: need at least 2 time samples");
  for (const auto& [xv, val] : byt.begin()->second) grid->xs.push_back(xv);
  if (grid->xs.size() < 2)
    throw ConfigError("problem.target.file", "config error: need at least 2 space samples");
  for (const auto& [tv, xs] : byt) {
    if (xs.size() != grid->xs.size())
      throw ConfigError("problem.target.file",
                        "config error: samples must form a full x-t tensor grid");
    std::vector<double> rowv;
    for (const auto& [xv, val] : xs) rowv.push_back(val);
    grid->v.push_back(std::move(rowv));
  }
  return [grid](double x, double t) {
    std::size_t i, j;
    const double wx = interp1_weight(grid->xs, x, i);
    const double wt = interp1_weight(grid->ts, t, j);
    return (1 - wt) * ((1 - wx) * grid->v[j][i] + wx * grid->v[j][i + 1]) +
           wt * ((1 - wx) * grid->v[j + 1][i] + wx * grid->v[j + 1][i + 1]);
  };
}

ControlProblem<double> build_problem(const ExperimentConfig& c) {
  auto p = make_problem(c.alpha, c.sigma, c.horizon, c.breakpoints.front(), c.breakpoints.back());
  p.kappa = make_partition(c.breakpoints, c.kappas);
  if (!c.target_file.empty())
    p.target = load_target_file(c.target_file);
  else if (c.target == "zero")
    p.target = [](double, double) { return 0.0; };
  return p;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files, double wall_seconds) {
  ojson m;
  m["version"] = library_version;
  m["config"] = ojson::parse(serialize_config(cfg));
  m["wall_time_seconds"] = wall_seconds;
  ojson outs = ojson::array();
  for (const auto& f : files) outs.push_back(std::filesystem::path(f).filename().string());
  m["outputs"] = outs;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = join_path(dir, "manifest.json");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest: " + path);
  f << m.dump(2) << "\n";
}

void dump_operators(const CoupledOperator<double>& op, const L1Operator<double>& l1,
                    const std::string& dir, std::vector<std::string>& files) {
  auto dense_table = [](const DenseMatrix<double>& M) {
    CsvTable t;
    for (Eigen::Index j = 0; j < M.cols(); ++j) t.header.push_back("c" + std::to_string(j + 1));
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      std::vector<CsvCell> row;
      for (Eigen::Index j = 0; j < M.cols(); ++j) row.emplace_back(M(i, j));
      t.rows.push_back(std::move(row));
    }
    return t;
  };
  const std::string lp = join_path(dir, "l1.csv");
  emit_csv(dense_table(l1.entries), lp);
  files.push_back(lp);
  const std::string jp = join_path(dir, "exchange.csv");
  emit_csv(dense_table(exchange_matrix<double>(l1.order()).mat), jp);
  files.push_back(jp);
  const std::string cp = join_path(dir, "coupled.csv");
  emit_csv(dense_table(op.dense), cp);
  files.push_back(cp);
}

std::vector<double> linear_grid(double start, double step, double stop) {
  std::vector<double> g;
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

void resolve_dnwr_weights(const ExperimentConfig& c, double& theta, double& phi) {
  if (c.relaxation == "auto") {
    theta = phi = optimal_relaxation(c.kappas, Algorithm::dnwr)[0];
    return;
  }
  if (c.theta.size() != 1)
    throw ConfigError("relaxation.theta", "config error: relaxation.theta needs exactly 1 entry for dnwr");
  theta = c.theta[0];
  phi = c.phi.empty() ? theta : c.phi[0];
}

void resolve_nnwr_weights(const ExperimentConfig& c, std::vector<double>& thetas,
                          std::vector<double>& phis) {
  const std::size_t K = c.kappas.size() - 1;
  if (c.relaxation == "auto") {
    thetas = optimal_relaxation(c.kappas, Algorithm::nnwr);
    phis = thetas;
    return;
  }
  if (c.theta.size() != K)
    throw ConfigError("relaxation.theta",
                      "config error: relaxation.theta needs one entry per interface");
  thetas = c.theta;
  phis = c.phi.empty() ? thetas : c.phi;
}

RunOutcome run_monodomain(const ExperimentConfig& cfg, const RunOptions& opts,
                          const std::string& out) {
  const auto problem = build_problem(cfg);
  const auto mesh = build_mesh(mesh_kind_from(cfg.mesh), cfg.alpha, cfg.horizon,
                               cfg.intervals - 1);
  const auto res = monodomain_solve(problem, cfg.dx, mesh);
  CsvTable t;
  t.header = {"x", "t", "y", "p", "u"};
  const Eigen::Index nx = res.grid.size();
  for (Eigen::Index ti = 0; ti < res.y.rows(); ++ti)
    for (Eigen::Index xi = 0; xi < nx; ++xi)
      t.rows.push_back({res.grid[xi], res.mesh.nodes[ti], res.y(ti, xi), res.p(ti, xi),
                        res.u(ti, xi)});
  RunOutcome o;
  const std::string path = join_path(out, "monodomain.csv");
  emit_csv(t, path);
  o.files.push_back(path);
  if (opts.dump_operators)
    dump_operators(assemble_coupled(mesh, problem.sigma), assemble_l1(mesh), out, o.files);
  std::ostringstream ss;
  ss << "monodomain: " << nx << " space nodes, " << res.mesh.intervals()
     << " time intervals, cost=" << res.cost;
  o.summary = ss.str();
  return o;
}

RunOutcome run_dnwr_cfg(const ExperimentConfig& cfg, const RunOptions& opts,
                        const std::string& out) {
  if (cfg.kappas.size() != 2)
    throw ConfigError("decomposition.breakpoints",
                      "config error: dnwr needs exactly 2 subdomains");
  const auto problem = build_problem(cfg);
  const auto part = make_partition(cfg.breakpoints, cfg.kappas);
  const auto mesh = build_mesh(mesh_kind_from(cfg.mesh), cfg.alpha, cfg.horizon,
                               cfg.intervals - 1);
  double theta = 0, phi = 0;
  resolve_dnwr_weights(cfg, theta, phi);
  const double tol = cfg.iterations > 0 ? 0.0 : cfg.tol;
  const int max_iter = cfg.iterations > 0 ? cfg.iterations : cfg.max_iter;

  DnwrEngine<double> engine(problem, part, cfg.dx, mesh);
  const auto res = engine.iterate(theta, phi, tol, max_iter);
  const auto sd = decompose(engine.op());
  const int K = static_cast<int>(res.report.errors.size()) - 1;
  const auto curve = dnwr_error_bound(sd, part.length(0), part.length(1), part.kappas[0],
                                      part.kappas[1], K, res.report.errors.front());
  CsvTable t;
  t.header = {"iteration", "error", "increment", "bound"};
  for (int k = 0; k <= K; ++k)
    t.rows.push_back({static_cast<double>(k), res.report.errors[static_cast<std::size_t>(k)],
                      k == 0 ? 0.0 : res.increments[static_cast<std::size_t>(k - 1)],
                      curve.values[static_cast<std::size_t>(k)]});
  RunOutcome o;
  const std::string path = join_path(out, "dnwr.csv");
  emit_csv(t, path);
  o.files.push_back(path);
  if (opts.dump_operators) dump_operators(engine.op(), assemble_l1(mesh), out, o.files);
  std::ostringstream ss;
  ss << res.report.config_echo << "\n"
     << (res.report.converged ? "converged" : res.report.diverged ? "diverged" : "stopped")
     << " after " << res.report.iterations << " iterations, final error "
     << res.report.final_error() << ", observed rate " << res.report.rate
     << (res.report.rate_flagged ? " (flagged)" : "");
  o.summary = ss.str();
  return o;
}

RunOutcome run_nnwr_cfg(const ExperimentConfig& cfg, const RunOptions& opts,
                        const std::string& out) {
  if (cfg.kappas.size() < 2)
    throw ConfigError("decomposition.breakpoints",
                      "config error: nnwr needs at least 2 subdomains");
  const auto problem = build_problem(cfg);
  const auto part = make_partition(cfg.breakpoints, cfg.kappas);
  const auto mesh = build_mesh(mesh_kind_from(cfg.mesh), cfg.alpha, cfg.horizon,
                               cfg.intervals - 1);
  std::vector<double> thetas, phis;
  resolve_nnwr_weights(cfg, thetas, phis);
  const double tol = cfg.iterations > 0 ? 0.0 : cfg.tol;
  const int max_iter = cfg.iterations > 0 ? cfg.iterations : cfg.max_iter;

  NnwrEngine<double> engine(problem, part, cfg.dx, mesh);
  const auto res = engine.iterate(thetas, phis, tol, max_iter);
  const auto sd = decompose(engine.op());
  const int K = static_cast<int>(res.report.errors.size()) - 1;
  const auto curve = nnwr_error_bound(sd, part, K, res.report.errors.front());
  const std::size_t ifc = res.traces.size();
  CsvTable t;
  t.header = {"iteration"};
  for (std::size_t i = 1; i <= ifc; ++i) t.header.push_back("error_" + std::to_string(i));
  t.header.push_back("max_error");
  t.header.push_back("bound");
  for (int k = 0; k <= K; ++k) {
    std::vector<CsvCell> row{static_cast<double>(k)};
    for (std::size_t i = 0; i < ifc; ++i)
      row.emplace_back(res.interface_errors[i][static_cast<std::size_t>(k)]);
    row.emplace_back(res.report.errors[static_cast<std::size_t>(k)]);
    row.emplace_back(curve.values[static_cast<std::size_t>(k)]);
    t.rows.push_back(std::move(row));
  }
  RunOutcome o;
  const std::string path = join_path(out, "nnwr.csv");
  emit_csv(t, path);
  o.files.push_back(path);
  if (opts.dump_operators) dump_operators(engine.op(), assemble_l1(mesh), out, o.files);
  std::ostringstream ss;
  ss << res.report.config_echo << "\n"
     << (res.report.converged ? "converged" : res.report.diverged ? "diverged" : "stopped")
     << " after " << res.report.iterations << " iterations, final error "
     << res.report.final_error() << ", observed rate " << res.report.rate
     << (res.report.rate_flagged ? " (flagged)" : "");
  if (res.report.divergent_interface >= 0)
    ss << ", divergent interface " << (res.report.divergent_interface + 1);
  o.summary = ss.str();
  return o;
}

RunOutcome run_bounds_cfg(const ExperimentConfig& cfg, const RunOptions& opts,
                          const std::string& out) {
  const auto problem = build_problem(cfg);
  const auto part = make_partition(cfg.breakpoints, cfg.kappas);
  const auto mesh = build_mesh(mesh_kind_from(cfg.mesh), cfg.alpha, cfg.horizon,
                               cfg.intervals - 1);
  const double tol = cfg.iterations > 0 ? 0.0 : cfg.tol;
  const int max_iter = cfg.iterations > 0 ? cfg.iterations : cfg.max_iter;

  std::vector<double> measured;
  BoundCurve<double> curve;
  double rho = 0;
  const CoupledOperator<double>* opp = nullptr;
  std::unique_ptr<DnwrEngine<double>> de;
  std::unique_ptr<NnwrEngine<double>> ne;
  if (part.count() == 2) {
    double theta = 0, phi = 0;
    resolve_dnwr_weights(cfg, theta, phi);
    de = std::make_unique<DnwrEngine<double>>(problem, part, cfg.dx, mesh);
    measured = de->iterate(theta, phi, tol, max_iter).report.errors;
    const auto sd = decompose(de->op());
    curve = dnwr_error_bound(sd, part.length(0), part.length(1), part.kappas[0],
                             part.kappas[1], static_cast<int>(measured.size()) - 1,
                             measured.front());
    rho = convergence_factor_rho(sd, part.length(0), part.length(1), part.kappas[0],
                                 part.kappas[1]);
    opp = &de->op();
  } else {
    std::vector<double> thetas, phis;
    resolve_nnwr_weights(cfg, thetas, phis);
    ne = std::make_unique<NnwrEngine<double>>(problem, part, cfg.dx, mesh);
    measured = ne->iterate(thetas, phis, tol, max_iter).report.errors;
    const auto sd = decompose(ne->op());
    curve = nnwr_error_bound(sd, part, static_cast<int>(measured.size()) - 1, measured.front());
    opp = &ne->op();
  }
  CsvTable t;
  t.header = {"k", "measured", "bound", "rho", "lambda", "cond_inf"};
  for (std::size_t k = 0; k < measured.size(); ++k)
    t.rows.push_back({static_cast<double>(k), measured[k], curve.values[k], rho, curve.lambda,
                      curve.cond_inf});
  RunOutcome o;
  const std::string path = join_path(out, "bounds.csv");
  emit_csv(t, path);
  o.files.push_back(path);
  if (opts.dump_operators) dump_operators(*opp, assemble_l1(mesh), out, o.files);
  std::ostringstream ss;
  ss << "bounds: factor=" << curve.factor << " rho=" << rho << " lambda=" << curve.lambda
     << " cond_inf=" << curve.cond_inf;
  o.summary = ss.str();
  return o;
}

RunOutcome run_sweep_cfg(const ExperimentConfig& cfg, const RunOptions& opts,
                         const std::string& out) {
  if (cfg.kappas.size() > 3)
    throw ConfigError("decomposition.breakpoints",
                      "config error: sweep supports at most 2 interfaces (3 subdomains)");
  const auto problem = build_problem(cfg);
  const auto part = make_partition(cfg.breakpoints, cfg.kappas);
  const auto mesh = build_mesh(mesh_kind_from(cfg.mesh), cfg.alpha, cfg.horizon,
                               cfg.intervals - 1);
  const auto grid = linear_grid(cfg.grid_start, cfg.grid_step, cfg.grid_stop);
  ThetaSweepTable<double> table;
  if (part.count() == 2)
    table = sweep_theta_dnwr(problem, part, grid, cfg.dx, mesh, cfg.fixed_iterations,
                             opts.threads);
  else
    table = sweep_theta_nnwr(problem, part, grid, cfg.dx, mesh, cfg.fixed_iterations,
                             opts.threads);
  CsvTable t;
  t.header = {"theta", "theta2", "error_after_K", "diverged"};
  for (const auto& r : table.rows)
    t.rows.push_back({r.theta, r.theta2, r.error, r.diverged ? 1.0 : 0.0});
  RunOutcome o;
  const std::string path = join_path(out, "sweep.csv");
  emit_csv(t, path);
  o.files.push_back(path);
  std::ostringstream ss;
  ss << "sweep: " << table.rows.size() << " grid points, argmin theta=" << table.argmin;
  if (part.count() == 3) ss << ", theta2=" << table.argmin2;
  o.summary = ss.str();
  return o;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  parse_config(serialize_config(cfg));  // uniform validation for flag-built configs
  const auto t0 = std::chrono::steady_clock::now();
  const std::string out = opts.out_override.empty() ? cfg.output : opts.out_override;
  RunOutcome o;
  if (cfg.algorithm == "monodomain")
    o = run_monodomain(cfg, opts, out);
  else if (cfg.algorithm == "dnwr")
    o = run_dnwr_cfg(cfg, opts, out);
  else if (cfg.algorithm == "nnwr")
    o = run_nnwr_cfg(cfg, opts, out);
  else if (cfg.algorithm == "bounds")
    o = run_bounds_cfg(cfg, opts, out);
  else if (cfg.algorithm == "sweep")
    o = run_sweep_cfg(cfg, opts, out);
  else if (cfg.algorithm == "verify") {
    const auto report = verify_suite(opts.seed, opts.threads);
    CsvTable t;
    t.header = {"check", "pass", "margin"};
    for (const auto& c : report.checks)
      t.rows.push_back({c.name, c.pass ? 1.0 : 0.0, c.margin});
    const std::string path = join_path(out, "verify.csv");
    emit_csv(t, path);
    o.files.push_back(path);
    o.summary = format_verify_table(report);
    o.exit_code = report.all_pass() ? 0 : 1;
  } else {
    throw ConfigError("algorithm", "config error: unknown algorithm '" + cfg.algorithm + "'");
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out, cfg, o.files, wall);
  return o;
}

}  // namespace wrc
