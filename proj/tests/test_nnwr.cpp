#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include <wrcontrol/nnwr.hpp>
#include <wrcontrol/timegrid.hpp>

using namespace wrc;

namespace {

ControlProblem<double> wide_problem(double sigma = 1e-6) {
  return make_problem(0.7, sigma, 1.0, -4.0, 4.0);
}

TimeMesh<double> desk_mesh() { return build_mesh(MeshKind::both_sided_graded, 0.7, 1.0, 19); }

}  // namespace

TEST_CASE("two equal subdomains collapse at the quarter weight") {
  const auto pb = wide_problem();
  const auto part = uniform_partition(-4.0, 4.0, 2);
  const auto res = run_nnwr(pb, part, {0.25}, {0.25}, 0.25, desk_mesh(), 1e-10, 10);
  const auto& rep = res.report;
  CHECK(rep.converged);
  CHECK_FALSE(rep.diverged);
  CHECK(rep.iterations <= 3);
  CHECK(rep.final_error() < 1e-9);
  CHECK(rep.divergent_interface == -1);
  CHECK(res.traces.size() == 1);
  CHECK(res.fields.size() == 2);
  CHECK_FALSE(rep.config_echo.empty());
}

TEST_CASE("uneven three-subdomain split converges with the balanced weights") {
  const auto pb = wide_problem();
  const auto part = make_partition(std::vector<double>{-4.0, -1.0, 1.0, 4.0},
                                   std::vector<double>{0.25, 1.0, 0.25});
  const auto w = optimal_relaxation(part.kappas, Algorithm::nnwr);
  REQUIRE(w.size() == 2);
  const auto res = run_nnwr(pb, part, w, w, 0.25, desk_mesh(), 1e-8, 30);
  const auto& rep = res.report;
  CHECK(rep.converged);
  CHECK_FALSE(rep.diverged);
  CHECK(rep.divergent_interface == -1);

  // bookkeeping: one error history per interface, max assembled per iteration
  REQUIRE(res.interface_errors.size() == 2);
  for (const auto& hist : res.interface_errors)
    CHECK(hist.size() == rep.errors.size());
  for (std::size_t k = 0; k < rep.errors.size(); ++k)
    CHECK(rep.errors[k] ==
          std::max(res.interface_errors[0][k], res.interface_errors[1][k]));
  CHECK(res.increments.size() == static_cast<std::size_t>(rep.iterations));
}

TEST_CASE("monodomain interface traces are a fixed point of the sweep") {
  const auto pb = wide_problem();
  const auto part = make_partition(std::vector<double>{-4.0, -1.0, 1.0, 4.0},
                                   std::vector<double>{0.25, 1.0, 0.25});
  NnwrEngine<double> engine(pb, part, 0.25, desk_mesh());
  std::vector<TraceSet<double>> exact;
  for (Eigen::Index node : engine.interface_nodes())
    exact.push_back(TraceSet<double>{engine.reference().coupled.col(node)});
  const auto res = engine.iterate({0.25, 0.25}, {0.25, 0.25}, 1e-10, 10, exact);
  CHECK(res.report.errors[0] == 0.0);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 1);
  CHECK(res.report.errors[1] < 1e-9);
}

TEST_CASE("engine and driver validate their inputs") {
  const auto pb = wide_problem();
  const auto part = uniform_partition(-4.0, 4.0, 2);
  NnwrEngine<double> engine(pb, part, 0.25, desk_mesh());
  CHECK_THROWS_AS(engine.iterate({0.25, 0.25}, {0.25, 0.25}, 1e-10, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate({0.0}, {0.25}, 1e-10, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate({0.25}, {1.0}, 1e-10, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate({0.25}, {0.25}, -1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate({0.25}, {0.25}, 1e-10, 0), std::invalid_argument);
  std::vector<TraceSet<double>> none;
  CHECK_THROWS_AS(engine.iterate({0.25}, {0.25}, 1e-10, 5, none), std::invalid_argument);
  std::vector<TraceSet<double>> bad{TraceSet<double>{Eigen::VectorXd::Ones(7)}};
  CHECK_THROWS_AS(engine.iterate({0.25}, {0.25}, 1e-10, 5, bad), std::invalid_argument);
  CHECK_THROWS_AS(NnwrEngine<double>(pb, uniform_partition(-4.0, 4.0, 1), 0.25, desk_mesh()),
                  std::invalid_argument);
}

TEST_CASE("relaxation sweep: single interface direct, two interfaces tensored") {
  const auto pb = wide_problem();
  const auto part2 = uniform_partition(-4.0, 4.0, 2);
  const std::vector<double> grid{0.15, 0.25, 0.4};
  const auto direct = sweep_theta_nnwr(pb, part2, grid, 0.25, desk_mesh(), 2);
  REQUIRE(direct.rows.size() == 3);
  CHECK(direct.argmin == 0.25);
  CHECK(direct.argmin2 == 0.0);
  for (const auto& row : direct.rows) CHECK(row.theta2 == 0.0);

  const auto part3 = make_partition(std::vector<double>{-4.0, -1.0, 1.0, 4.0},
                                    std::vector<double>{0.25, 1.0, 0.25});
  const auto tensor = sweep_theta_nnwr(pb, part3, grid, 0.25, desk_mesh(), 2);
  REQUIRE(tensor.rows.size() == 9);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 9; ++i)
    if (tensor.rows[i].error < tensor.rows[best].error) best = i;
  CHECK(tensor.argmin == tensor.rows[best].theta);
  CHECK(tensor.argmin2 == tensor.rows[best].theta2);

  CHECK_THROWS_AS(sweep_theta_nnwr(pb, uniform_partition(-4.0, 4.0, 4), grid, 0.25,
                                   desk_mesh(), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep_theta_nnwr(pb, part2, {0.5, 1.0}, 0.25, desk_mesh(), 2),
                  std::invalid_argument);
}
