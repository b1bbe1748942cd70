#include <doctest.h>

#include <cmath>

#include <wrcontrol/problem.hpp>
#include <wrcontrol/timegrid.hpp>

using namespace wrc;

TEST_CASE("built-in target: frozen sample and boundary decay") {
  CHECK(target_yq(0.5, 0.0) == doctest::Approx(0.13499983583868994).epsilon(1e-13));
  // sin(pi x) kills the value at both ends of (-1, 1)
  CHECK(std::abs(target_yq(1.0, 0.7)) < 1e-14);
  CHECK(std::abs(target_yq(-1.0, 0.3)) < 1e-14);
  // linear growth in t
  CHECK(target_yq(0.5, 1.0) == doctest::Approx(2.0 * target_yq(0.5, 0.0)).epsilon(1e-14));
}

TEST_CASE("make_problem validates its parameters and fills defaults") {
  CHECK_THROWS_AS(make_problem(0.5, 0.0, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(0.5, -1e-6, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(0.0, 1e-6, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(1.1, 1e-6, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(0.5, 1e-6, 1.0, 1.0, 1.0), std::invalid_argument);

  const auto pb = make_problem(0.7, 1e-4, 2.0, -1.0, 3.0);
  CHECK(pb.alpha == 0.7);
  CHECK(pb.sigma == 1e-4);
  CHECK(pb.horizon == 2.0);
  CHECK(pb.kappa.count() == 1);
  CHECK(pb.kappa.left() == -1.0);
  CHECK(pb.kappa.right() == 3.0);
  CHECK(pb.kappa.kappas[0] == 1.0);

  // accessor defaults: target falls back to the built-in, forcing to zero
  CHECK(pb.yq(0.5, 0.0) == target_yq(0.5, 0.0));
  CHECK(pb.f(0.3, 0.4) == 0.0);
  auto pb2 = pb;
  pb2.target = [](double, double) { return 3.0; };
  pb2.forcing = [](double x, double) { return x; };
  CHECK(pb2.yq(0.5, 0.0) == 3.0);
  CHECK(pb2.f(0.25, 0.9) == 0.25);
}

TEST_CASE("evaluate_cost: quadrature of constant fields has a closed form") {
  auto pb = make_problem(0.5, 0.02, 1.0, 0.0, 2.0);
  pb.target = [](double, double) { return 1.0; };
  const auto mesh = build_mesh(MeshKind::uniform, 0.5, 1.0, 3);  // 4 intervals
  Eigen::VectorXd xgrid = Eigen::VectorXd::LinSpaced(5, 0.0, 2.0);

  // y = 3, u = 2 over [0,2]x[0,1]: J = 1/2 * (3-1)^2 * 2 + 0.02/2 * 4 * 2
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(5, 5, 3.0);
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(5, 5, 2.0);
  const double J = evaluate_cost(y, u, pb, xgrid, mesh);
  CHECK(J == doctest::Approx(4.0 + 0.08).epsilon(1e-14));

  // exact tracking and zero control cost nothing
  Eigen::MatrixXd y0 = Eigen::MatrixXd::Constant(5, 5, 1.0);
  Eigen::MatrixXd u0 = Eigen::MatrixXd::Zero(5, 5);
  CHECK(evaluate_cost(y0, u0, pb, xgrid, mesh) == 0.0);

  CHECK_THROWS_AS(evaluate_cost(Eigen::MatrixXd::Zero(4, 5), u, pb, xgrid, mesh),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate_cost(y, Eigen::MatrixXd::Zero(5, 4), pb, xgrid, mesh),
                  std::invalid_argument);
}

TEST_CASE("trapezoid weights sum to the interval length on a graded mesh") {
  const auto mesh = build_mesh(MeshKind::both_sided_graded, 0.4, 3.0, 9);
  const auto w = detail::trapezoid_weights(mesh.nodes);
  CHECK(w.sum() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(w.minCoeff() > 0.0);
  // end weights are half the end spacings
  CHECK(w[0] == doctest::Approx((mesh.nodes[1] - mesh.nodes[0]) / 2).epsilon(1e-14));
}
