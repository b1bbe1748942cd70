#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <limits>
#include <utility>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wrcontrol/bounds.hpp"
#include "wrcontrol/dnwr.hpp"
#include "wrcontrol/expcli.hpp"
#include "wrcontrol/nnwr.hpp"
#include "wrcontrol/problem.hpp"
#include "wrcontrol/spectral.hpp"
#include "wrcontrol/subdomain.hpp"

namespace wrc {

bool l1_monotonicity_holds(const L1Operator<double>& op) {
  const Eigen::Index n1 = op.order();
  for (Eigen::Index m = 1; m <= n1; ++m) {
    for (Eigen::Index j = 1; j <= m; ++j)
      if (!(op.d(m, j) > 0.0)) return false;
    for (Eigen::Index j = 1; j < m; ++j)
      if (!(op.d(m, j + 1) < op.d(m, j))) return false;
  }
  return true;
}

namespace {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

constexpr double kDeskAlpha = 0.7;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const std::vector<MeshKind> kAllKinds{MeshKind::uniform, MeshKind::one_sided_graded,
                                      MeshKind::both_sided_graded};

void check_mesh_endpoints(VerifyCheck& c) {
  double margin = std::numeric_limits<double>::infinity();
  for (MeshKind kind : kAllKinds)
    for (double alpha : {0.3, 0.5, 1.0})
      for (double T : {1.0, 2.5}) {
        const auto m = build_mesh(kind, alpha, T, Eigen::Index(19));
        double dev = std::max(std::abs(m.nodes[0]), std::abs(m.nodes[20] - T));
        for (Eigen::Index j = 0; j + 1 < m.nodes.size(); ++j)
          if (!(m.nodes[j + 1] > m.nodes[j])) dev = 1.0;
        if (kind == MeshKind::both_sided_graded)
          for (Eigen::Index j = 0; j < m.nodes.size(); ++j)
            dev = std::max(dev, std::abs(m.nodes[j] + m.nodes[20 - j] - T));
        if (alpha == 1.0)
          for (Eigen::Index j = 0; j < m.nodes.size(); ++j)
            dev = std::max(dev, std::abs(m.nodes[j] - T * double(j) / 20.0));
        margin = std::min(margin, 1e-13 * T - dev);
      }
  c.margin = margin;
  c.detail = "endpoint/monotonicity/symmetry deviation over 18 mesh configurations";
}

void check_mesh_reflect(VerifyCheck& c) {
  double dev = 0.0;
  for (MeshKind kind : kAllKinds) {
    const auto m = build_mesh(kind, 0.5, 1.0, Eigen::Index(19));
    const auto rr = reflect_mesh(reflect_mesh(m));
    dev = std::max(dev, (rr.nodes - m.nodes).cwiseAbs().maxCoeff());
  }
  c.margin = 1e-13 - dev;
  c.detail = "reflecting twice returns the mesh, deviation " + fmt(dev);
}

void check_l1_monotonicity(VerifyCheck& c) {
  double gap = std::numeric_limits<double>::infinity();
  for (MeshKind kind : kAllKinds)
    for (double alpha : {0.3, 0.7}) {
      const auto op = assemble_l1(build_mesh(kind, alpha, 1.0, Eigen::Index(19)));
      if (!l1_monotonicity_holds(op)) {
        c.margin = -1.0;
        c.detail = "coefficient table is not strictly decreasing";
        return;
      }
      for (Eigen::Index m = 1; m <= op.order(); ++m)
        for (Eigen::Index j = 1; j < m; ++j) gap = std::min(gap, op.d(m, j) - op.d(m, j + 1));
    }
  c.margin = gap;
  c.detail = "smallest decrement between successive history coefficients";
}

void check_l1_backward_euler(VerifyCheck& c) {
  const auto op = assemble_l1(build_mesh(MeshKind::uniform, 1.0, 1.0, Eigen::Index(15)));
  const Eigen::Index n1 = op.order();
  const double dt = 1.0 / double(n1);
  DenseMatrix<double> be = DenseMatrix<double>::Zero(n1, n1);
  for (Eigen::Index i = 0; i < n1; ++i) {
    be(i, i) = 1.0 / dt;
    if (i > 0) be(i, i - 1) = -1.0 / dt;
  }
  const double dev = (op.entries - be).cwiseAbs().maxCoeff();
  c.margin = 1e-12 - dev;
  c.detail = "alpha=1 operator vs the backward difference, deviation " + fmt(dev);
}

void check_l1_quadratic_form(VerifyCheck& c) {
  const Eigen::Index n1 = 16;
  const auto op = assemble_l1(build_mesh(MeshKind::uniform, 1.0, 1.0, n1 - 1));
  const double dt = 1.0 / double(n1);
  Eigen::SelfAdjointEigenSolver<DenseMatrix<double>> es(op.entries + op.entries.transpose(),
                                                        Eigen::EigenvaluesOnly);
  Vec expected(n1);
  const double pi = 3.14159265358979323846;
  for (Eigen::Index j = 1; j <= n1; ++j) {
    const double s = std::sin(double(j) * pi / (2.0 * double(n1 + 1)));
    expected[j - 1] = 4.0 / dt * s * s;
  }
  std::sort(expected.begin(), expected.end());
  double rel = 0.0;
  for (Eigen::Index j = 0; j < n1; ++j)
    rel = std::max(rel, std::abs(es.eigenvalues()[j] - expected[j]) / expected[j]);
  c.margin = 1e-10 - rel;
  c.detail = "symmetrized alpha=1 spectrum vs closed form, relative deviation " + fmt(rel);
}

void check_exchange_structure(VerifyCheck& c) {
  const auto J = exchange_matrix<double>(8);
  bool ok = J.mat.row(7).cwiseAbs().maxCoeff() == 0.0 && J.mat.col(7).cwiseAbs().maxCoeff() == 0.0;
  ok = ok && (J.mat - J.mat.transpose()).cwiseAbs().maxCoeff() == 0.0;
  Vec v(8);
  for (Eigen::Index i = 0; i < 8; ++i) v[i] = std::sin(double(i) + 1.0);
  const Vec w = J.mat * v;
  for (Eigen::Index m = 0; m + 1 < 8; ++m) ok = ok && w[m] == v[8 - 2 - m];
  ok = ok && w[7] == 0.0;
  c.margin = ok ? 1.0 : -1.0;
  c.detail = "zero last row/column, symmetry, and time reversal on a sample vector";
}

void check_spectral_positivity(VerifyCheck& c) {
  double margin = std::numeric_limits<double>::infinity();
  for (MeshKind kind : kAllKinds)
    for (double alpha : {0.5, 0.8})
      for (double sigma : {1e-2, 1e-6}) {
        const auto sd = decompose(assemble_coupled(build_mesh(kind, alpha, 1.0, Eigen::Index(19)),
                                                    sigma));
        margin = std::min(margin, sd.eigenvalues.real().minCoeff());
      }
  c.margin = margin;
  c.detail = "smallest real part over 12 coupled spectra";
}

void check_block_reduction(VerifyCheck& c) {
  double worst = 0.0;
  for (MeshKind kind : {MeshKind::both_sided_graded, MeshKind::uniform}) {
    const auto op = assemble_coupled(build_mesh(kind, 0.5, 1.0, Eigen::Index(19)), 1e-6);
    const auto sd = decompose(op);
    Eigen::EigenSolver<DenseMatrix<double>> es(op.dense, false);
    std::vector<std::complex<double>> a(sd.eigenvalues.begin(), sd.eigenvalues.end());
    std::vector<std::complex<double>> b(es.eigenvalues().begin(), es.eigenvalues().end());
    auto lex = [](std::complex<double> u, std::complex<double> v) {
      return u.real() != v.real() ? u.real() < v.real() : u.imag() < v.imag();
    };
    std::sort(a.begin(), a.end(), lex);
    std::sort(b.begin(), b.end(), lex);
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  c.margin = 1e-8 - worst;
  c.detail = "block-reduced spectrum vs the direct dense solve, deviation " + fmt(worst);
}

void check_decomposition_residual(VerifyCheck& c) {
  const auto op =
      assemble_coupled(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, Eigen::Index(19)), 1e-6);
  const auto sd = decompose(op);
  const DenseComplexMatrix<double> rec =
      sd.eigvec * sd.eigenvalues.asDiagonal() * sd.eigvec_inv;
  const double res = inf_norm(DenseComplexMatrix<double>(
                         rec - op.dense.cast<std::complex<double>>())) /
                     inf_norm(op.dense);
  c.margin = 1e-7 - res;
  c.detail = "relative reconstruction residual " + fmt(res);
}

void check_gershgorin(VerifyCheck& c) {
  double margin = std::numeric_limits<double>::infinity();
  const double beta = 1e3;
  for (double alpha : {0.3, 0.8}) {
    const auto op = assemble_l1(build_mesh(MeshKind::one_sided_graded, alpha, 1.0,
                                           Eigen::Index(10)));
    const auto rep = gershgorin_symmetrized(op.entries, beta);
    for (bool ok : rep.bound_ok)
      if (!ok) {
        c.margin = -1.0;
        c.detail = "a closed-form radius bound fails at alpha " + fmt(alpha);
        return;
      }
    const Eigen::Index n = op.order();
    DenseComplexMatrix<double> M =
        (rep.basis.transpose() * op.entries * rep.basis).cast<std::complex<double>>();
    for (Eigen::Index i = 0; i < n; ++i) M(i, i) = rep.centers[i];
    Eigen::ComplexEigenSolver<DenseComplexMatrix<double>> es(M, false);
    for (Eigen::Index k = 0; k < n; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i)
        best = std::max(best, rep.radii[i] - std::abs(es.eigenvalues()[k] - rep.centers[i]));
      margin = std::min(margin, best + 1e-12);
    }
  }
  c.margin = margin;
  c.detail = "every shifted eigenvalue lies inside a disk; slack " + fmt(margin);
}

void check_inverse_roundtrip(VerifyCheck& c, unsigned long long seed) {
  const auto sd = decompose(
      assemble_coupled(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, Eigen::Index(19)), 1e-6));
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  CVec v(sd.eigvec.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::complex<double>(uni(rng), uni(rng));
  const CVec w = sd.eigvec * (sd.eigvec_inv * v);
  const double rel = (w - v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
  c.margin = 1e-8 - rel;
  c.detail = "P (P^-1 v) vs v on a seeded random vector, deviation " + fmt(rel);
}

void check_sigma_u_plus_p(VerifyCheck& c) {
  const auto pb = make_problem(kDeskAlpha, 1e-2, 1.0, -1.0, 1.0);
  const auto res =
      monodomain_solve(pb, 0.1, build_mesh(MeshKind::both_sided_graded, kDeskAlpha, 1.0,
                                           Eigen::Index(19)));
  const double dev = (pb.sigma * res.u + res.p).cwiseAbs().maxCoeff();
  c.margin = 1e-12 - dev;
  c.detail = "optimality coupling sigma*u + p, deviation " + fmt(dev);
}

void check_target_value(VerifyCheck& c) {
  const double v = target_yq(0.5, 0.0);
  const double expected = 0.13499983583868994;
  c.margin = 5e-7 - std::abs(v - expected);
  c.detail = "tracking target at (0.5, 0): " + fmt(v);
}

void check_dnwr_finite_termination(VerifyCheck& c) {
  const auto pb = make_problem(kDeskAlpha, 1e-6, 1.0, -1.0, 1.0);
  const std::vector<double> bp{-1.0, 0.0, 1.0}, kap{1.0, 1.0};
  const auto res = run_dnwr(pb, make_partition(bp, kap), 0.5, 0.5, 0.1,
                            build_mesh(MeshKind::both_sided_graded, kDeskAlpha, 1.0,
                                       Eigen::Index(19)),
                            0.0, 3);
  const double e1 = res.report.errors[1], e2 = res.report.errors[2];
  c.margin = 1e-12 - e2;
  c.detail = "symmetric-split errors after 1 and 2 passes: " + fmt(e1) + ", " + fmt(e2);
}

void check_dnwr_bound_dominance(VerifyCheck& c) {
  const auto pb = make_problem(kDeskAlpha, 1e-6, 1.0, -1.0, 1.0);
  const std::vector<double> bp{-1.0, -0.5, 1.0}, kap{1.0, 1.0};
  DnwrEngine<double> engine(pb, make_partition(bp, kap), 0.05,
                            build_mesh(MeshKind::both_sided_graded, kDeskAlpha, 1.0,
                                       Eigen::Index(99)));
  const auto res = engine.iterate(0.5, 0.5, 0.0, 10);
  const auto sd = decompose(engine.op());
  const auto curve = dnwr_error_bound(sd, 0.5, 1.5, 1.0, 1.0,
                                      int(res.report.errors.size()) - 1,
                                      res.report.errors.front());
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < res.report.errors.size(); ++k) {
    if (res.report.errors[k] < 1e-10) continue;
    margin = std::min(margin, (curve.values[k] - res.report.errors[k]) / curve.values[k]);
  }
  c.margin = margin;
  c.detail = "relative slack of the theoretical envelope over 10 iterations";
}

void check_nnwr_bound_dominance(VerifyCheck& c) {
  const auto pb = make_problem(kDeskAlpha, 1e-6, 1.0, -4.0, 4.0);
  const std::vector<double> bp{-4.0, -2.0, 0.0, 2.0, 4.0}, kap{1.0, 1.0, 1.0, 1.0};
  const auto part = make_partition(bp, kap);
  NnwrEngine<double> engine(pb, part, 0.05,
                            build_mesh(MeshKind::both_sided_graded, kDeskAlpha, 1.0,
                                       Eigen::Index(99)));
  const auto thetas = optimal_relaxation(kap, Algorithm::nnwr);
  const auto res = engine.iterate(thetas, thetas, 0.0, 8);
  const auto curve = nnwr_error_bound(decompose(engine.op()), part,
                                      int(res.report.errors.size()) - 1,
                                      res.report.errors.front());
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < res.report.errors.size(); ++k) {
    if (res.report.errors[k] < 1e-10) continue;
    margin = std::min(margin, (curve.values[k] - res.report.errors[k]) / curve.values[k]);
  }
  c.margin = margin;
  c.detail = "relative slack of the envelope while the error exceeds 1e-10";
}

void check_rho_sigma_monotone(VerifyCheck& c) {
  double margin = std::numeric_limits<double>::infinity();
  for (double alpha : {0.3, 0.8}) {
    const auto mesh = build_mesh(MeshKind::both_sided_graded, alpha, 1.0, Eigen::Index(99));
    std::vector<double> rho;
    for (double sigma : {1e-2, 1e-4, 1e-6})
      rho.push_back(
          convergence_factor_rho(decompose(assemble_coupled(mesh, sigma)), 0.5, 1.5, 1.0, 1.0));
    margin = std::min({margin, rho[0] - rho[1], rho[1] - rho[2]});
  }
  c.margin = margin;
  c.detail = "contraction factor decreases with the regularization weight";
}

void check_rho_divergence(VerifyCheck& c) {
  const auto mesh = build_mesh(MeshKind::both_sided_graded, kDeskAlpha, 1.0, Eigen::Index(99));
  const auto sd = decompose(assemble_coupled(mesh, 1e-2));
  const double rho_bad = convergence_factor_rho(sd, 0.1, 1.9, 1.0, 1.0);
  const double rho_good = convergence_factor_rho(sd, 0.2, 1.8, 1.0, 1.0);
  const auto pb = make_problem(kDeskAlpha, 1e-2, 1.0, -1.0, 1.0);
  const std::vector<double> kap{1.0, 1.0};
  const std::vector<double> bp_bad{-1.0, -0.9, 1.0}, bp_good{-1.0, -0.8, 1.0};
  const auto run_bad = run_dnwr(pb, make_partition(bp_bad, kap), 0.5, 0.5, 0.05, mesh, 1e-10, 40);
  const auto run_good =
      run_dnwr(pb, make_partition(bp_good, kap), 0.5, 0.5, 0.05, mesh, 1e-10, 40);
  const bool flags_ok = run_bad.report.diverged && !run_good.report.diverged &&
                        run_good.report.converged;
  c.margin = flags_ok ? std::min(rho_bad - 1.0, 1.0 - rho_good) : -1.0;
  c.detail = "rho " + fmt(rho_bad) + " diverges, rho " + fmt(rho_good) + " converges";
}

void check_csv_roundtrip(VerifyCheck& c, unsigned long long seed) {
  const std::vector<double> awkward{0.1,
                                    1.0 / 3.0,
                                    1e308,
                                    5e-324,
                                    -0.0,
                                    2.2250738585072014e-308,
                                    6.02214076e23,
                                    -1.2345678901234567e-7,
                                    3.141592653589793,
                                    -2.718281828459045e-15};
  CsvTable t;
  t.header = {"value", "tag"};
  for (std::size_t i = 0; i < awkward.size(); ++i)
    t.rows.push_back({awkward[i], std::string("row") + std::to_string(i)});
  const auto path = std::filesystem::temp_directory_path() /
                    ("wrc_verify_roundtrip_" + std::to_string(seed) + ".csv");
  emit_csv(t, path.string());
  const auto back = read_csv(path.string());
  std::filesystem::remove(path);
  bool ok = back.header == t.header && back.rows.size() == t.rows.size();
  for (std::size_t i = 0; ok && i < awkward.size(); ++i) {
    const double v = std::get<double>(back.rows[i][0]);
    ok = std::memcmp(&v, &awkward[i], sizeof(double)) == 0 &&
         std::get<std::string>(back.rows[i][1]) == std::get<std::string>(t.rows[i][1]);
  }
  c.margin = ok ? 1.0 : -1.0;
  c.detail = "ten awkward doubles reproduced bit for bit";
}

void check_config_roundtrip(VerifyCheck& c) {
  auto cfg = default_config();
  cfg.algorithm = "dnwr";
  const std::string s1 = serialize_config(cfg);
  const std::string s2 = serialize_config(parse_config(s1));
  bool ok = s1 == s2;
  bool rejected = false;
  try {
    parse_config("{\"algorithm\": \"dnwr\", \"bogus\": 1}");
  } catch (const ConfigError& e) {
    rejected = std::string(e.key).find("bogus") != std::string::npos;
  }
  ok = ok && rejected;
  c.margin = ok ? 1.0 : -1.0;
  c.detail = "serialize/parse is byte-idempotent and unknown keys are rejected";
}

void check_thread_determinism(VerifyCheck& c) {
  const auto pb = make_problem(0.6, 1e-6, 1.0, -1.0, 1.0);
  const std::vector<double> bp{-1.0, -0.5, 1.0}, kap{1.0, 1.0};
  const auto part = make_partition(bp, kap);
  const auto mesh = build_mesh(MeshKind::both_sided_graded, 0.6, 1.0, Eigen::Index(19));
  const std::vector<double> grid{0.2, 0.35, 0.5, 0.65, 0.8};
  const auto t1 = sweep_theta_dnwr(pb, part, grid, 0.1, mesh, 4, 1);
  const auto t4 = sweep_theta_dnwr(pb, part, grid, 0.1, mesh, 4, 4);
  bool ok = t1.rows.size() == t4.rows.size();
  for (std::size_t i = 0; ok && i < t1.rows.size(); ++i)
    ok = format_cell(t1.rows[i].error) == format_cell(t4.rows[i].error) &&
         t1.rows[i].diverged == t4.rows[i].diverged;
  c.margin = ok ? 1.0 : -1.0;
  c.detail = "sweep results with 1 and 4 worker threads are byte-identical";
}

void check_mutation_l1(VerifyCheck& c) {
  auto op = assemble_l1(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, Eigen::Index(19)));
  const bool clean = l1_monotonicity_holds(op);
  op.coeff_table(5, 2) = -op.coeff_table(5, 2);
  const bool flagged = !l1_monotonicity_holds(op);
  c.margin = (clean && flagged) ? 1.0 : -1.0;
  c.detail = "a sign corruption in the coefficient table is detected";
}

}  // namespace

VerifyReport verify_suite(unsigned long long seed, unsigned threads) {
  using Body = std::function<void(VerifyCheck&)>;
  std::vector<std::pair<std::string, Body>> checks{
      {"mesh-endpoints-monotone", check_mesh_endpoints},
      {"mesh-reflect-involution", check_mesh_reflect},
      {"l1-coefficient-monotonicity", check_l1_monotonicity},
      {"l1-backward-euler-limit", check_l1_backward_euler},
      {"l1-quadratic-form-eigenvalues", check_l1_quadratic_form},
      {"exchange-structure", check_exchange_structure},
      {"spectral-positivity", check_spectral_positivity},
      {"block-reduction-match", check_block_reduction},
      {"decomposition-residual", check_decomposition_residual},
      {"gershgorin-coverage", check_gershgorin},
      {"inverse-application-roundtrip",
       [seed](VerifyCheck& c) { check_inverse_roundtrip(c, seed); }},
      {"sigma-u-plus-p", check_sigma_u_plus_p},
      {"target-paper-value", check_target_value},
      {"dnwr-finite-termination", check_dnwr_finite_termination},
      {"dnwr-bound-dominance", check_dnwr_bound_dominance},
      {"nnwr-bound-dominance", check_nnwr_bound_dominance},
      {"rho-sigma-monotonicity", check_rho_sigma_monotone},
      {"rho-divergence-consistency", check_rho_divergence},
      {"csv-roundtrip", [seed](VerifyCheck& c) { check_csv_roundtrip(c, seed); }},
      {"config-roundtrip", check_config_roundtrip},
      {"determinism-threads", check_thread_determinism},
      {"mutation-l1-sign", check_mutation_l1},
  };

  VerifyReport rep;
  rep.checks.resize(checks.size());
  detail::parallel_for(checks.size(), threads, [&](std::size_t i) {
    VerifyCheck c;
    c.name = checks[i].first;
    try {
      checks[i].second(c);
      c.pass = c.margin >= 0.0;
    } catch (const std::exception& e) {
      c.pass = false;
      c.margin = -1.0;
      c.detail = std::string("exception: ") + e.what();
    }
    rep.checks[i] = std::move(c);
  });
  return rep;
}

std::string format_verify_table(const VerifyReport& report) {
  std::size_t w = 5;
  for (const auto& c : report.checks) w = std::max(w, c.name.size());
  std::ostringstream os;
  os << std::left << std::setw(int(w) + 2) << "check" << std::setw(6) << "pass"
     << std::setw(13) << "margin" << "detail\n";
  for (const auto& c : report.checks) {
    std::ostringstream m;
    m.precision(3);
    m << std::scientific << c.margin;
    os << std::left << std::setw(int(w) + 2) << c.name << std::setw(6)
       << (c.pass ? "ok" : "FAIL") << std::setw(13) << m.str() << c.detail << "\n";
  }
  std::size_t fails = 0;
  for (const auto& c : report.checks)
    if (!c.pass) ++fails;
  os << (fails == 0 ? "all checks passed" : std::to_string(fails) + " check(s) FAILED") << "\n";
  return os.str();
}

}  // namespace wrc
