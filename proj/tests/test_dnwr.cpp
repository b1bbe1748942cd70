#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include <wrcontrol/dnwr.hpp>
#include <wrcontrol/timegrid.hpp>

using namespace wrc;

namespace {

struct DeskCase {
  ControlProblem<double> pb;
  Partition<double> part;
  TimeMesh<double> mesh;
  double dx = 0.1;
  DeskCase(double theta_split = 0.5, double sigma = 1e-6)
      : pb(make_problem(0.7, sigma, 1.0, -1.0, 1.0)),
        part(theta_split == 0.5
                 ? uniform_partition(-1.0, 1.0, 2)
                 : make_partition(std::vector<double>{-1.0, -1.0 + 2.0 * theta_split, 1.0},
                                  std::vector<double>{1.0, 1.0})),
        mesh(build_mesh(MeshKind::both_sided_graded, 0.7, 1.0, 19)) {}
};

}  // namespace

TEST_CASE("symmetric half-weight run terminates in two iterations") {
  const DeskCase c;
  const auto res = run_dnwr(c.pb, c.part, 0.5, 0.5, c.dx, c.mesh, 1e-10, 20);
  const auto& rep = res.report;
  REQUIRE(rep.errors.size() >= 3);
  CHECK(rep.converged);
  CHECK_FALSE(rep.diverged);
  CHECK(rep.iterations == 2);
  CHECK(rep.errors[1] < 1e-11);
  CHECK(rep.errors[2] < 1e-13);
  CHECK(res.increments.size() == static_cast<std::size_t>(rep.iterations));
  CHECK(res.increments[0] > 0.1);  // the first update carries the O(1) correction
  CHECK_FALSE(rep.config_echo.empty());
  CHECK(res.trace.pi.size() == 40);
  CHECK(res.left.nodes() == 11);
  CHECK(res.right.nodes() == 11);
}

TEST_CASE("symmetric split contracts errors by exactly |1 - 2 theta|") {
  const DeskCase c;
  DnwrEngine<double> engine(c.pb, c.part, c.dx, c.mesh);
  const auto res = engine.iterate(0.3, 0.3, 0.0, 8);
  const auto& e = res.report.errors;
  REQUIRE(e.size() == 9);
  for (std::size_t k = 0; k + 1 < e.size(); ++k)
    CHECK(e[k + 1] / e[k] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(res.report.rate == doctest::Approx(0.4).epsilon(1e-6));
  CHECK_FALSE(res.report.rate_flagged);
  CHECK_FALSE(res.report.converged);
  CHECK_FALSE(res.report.diverged);
}

TEST_CASE("the monodomain interface trace is a fixed point") {
  // uneven split: the interface sits away from the odd-symmetry axis, so the
  // exact trace is O(1) and the relative stopping rule is meaningful
  const DeskCase c(0.25);
  DnwrEngine<double> engine(c.pb, c.part, c.dx, c.mesh);
  const TraceSet<double> exact{engine.reference().coupled.col(engine.interface_node())};
  const auto res = engine.iterate(0.5, 0.5, 1e-10, 10, exact);
  CHECK(res.report.errors[0] == 0.0);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 1);
  CHECK(res.report.errors[1] < 1e-9);
}

TEST_CASE("engine and driver validate their inputs") {
  const DeskCase c;
  DnwrEngine<double> engine(c.pb, c.part, c.dx, c.mesh);
  CHECK_THROWS_AS(engine.iterate(0.0, 0.5, 1e-10, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate(0.5, 1.0, 1e-10, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate(0.5, 0.5, -1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(engine.iterate(0.5, 0.5, 1e-10, 0), std::invalid_argument);
  const TraceSet<double> bad{Eigen::VectorXd::Ones(7)};
  CHECK_THROWS_AS(engine.iterate(0.5, 0.5, 1e-10, 5, bad), std::invalid_argument);
  CHECK_THROWS_AS(DnwrEngine<double>(c.pb, uniform_partition(-1.0, 1.0, 3), c.dx, c.mesh),
                  std::invalid_argument);
}

TEST_CASE("asymmetric split converges and reports a contraction rate") {
  const DeskCase c(0.25);  // lengths 0.5 and 1.5
  const auto res = run_dnwr(c.pb, c.part, 0.5, 0.5, c.dx, c.mesh, 1e-8, 40);
  CHECK(res.report.converged);
  CHECK_FALSE(res.report.diverged);
  CHECK(res.report.final_error() < 1e-6);
  CHECK(res.report.rate < 1.0);
}

TEST_CASE("theta sweep picks the balanced weight and is thread invariant") {
  const DeskCase c;
  const std::vector<double> grid{0.2, 0.35, 0.5, 0.65, 0.8};
  const auto t1 = sweep_theta_dnwr(c.pb, c.part, grid, c.dx, c.mesh, 3, 1);
  const auto t4 = sweep_theta_dnwr(c.pb, c.part, grid, c.dx, c.mesh, 3, 4);
  REQUIRE(t1.rows.size() == grid.size());
  CHECK(t1.argmin == 0.5);
  CHECK(t4.argmin == 0.5);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(t1.rows[i].theta == grid[i]);
    CHECK(t1.rows[i].theta2 == 0.0);
    CHECK(t1.rows[i].error == t4.rows[i].error);  // deterministic across thread counts
    CHECK_FALSE(t1.rows[i].diverged);
  }
  // half weight annihilates in two sweeps, every other grid point cannot
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] != 0.5) CHECK(t1.rows[i].error > t1.rows[2].error);

  CHECK_THROWS_AS(sweep_theta_dnwr(c.pb, c.part, {0.5, 1.0}, c.dx, c.mesh, 3),
                  std::invalid_argument);
}
