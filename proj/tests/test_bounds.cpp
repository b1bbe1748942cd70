#include <doctest.h>

#include <cmath>
#include <vector>

#include <wrcontrol/bounds.hpp>
#include <wrcontrol/timegrid.hpp>
#include <wrcontrol/timeop.hpp>

using namespace wrc;

TEST_CASE("optimal relaxation weights follow the diffusivity contrast") {
  const std::vector<double> equal{1.0, 1.0};
  CHECK(optimal_relaxation(equal, Algorithm::dnwr)[0] == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<double> contrast{1.0, 4.0};
  // 1 / (1 + sqrt(1/4)) = 2/3
  CHECK(optimal_relaxation(contrast, Algorithm::dnwr)[0] ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  const std::vector<double> three{0.25, 1.0, 0.25};
  const auto nn = optimal_relaxation(three, Algorithm::nnwr);
  REQUIRE(nn.size() == 2);
  // r = 1/2 both times: 1 / (2 + 1/2 + 2) = 2/9
  CHECK(nn[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(nn[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(optimal_relaxation(equal, Algorithm::nnwr)[0] == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS_AS(optimal_relaxation(three, Algorithm::dnwr), std::invalid_argument);
  CHECK_THROWS_AS(optimal_relaxation(std::vector<double>{1.0}, Algorithm::nnwr),
                  std::invalid_argument);
  CHECK_THROWS_AS(optimal_relaxation(std::vector<double>{1.0, 0.0}, Algorithm::dnwr),
                  std::invalid_argument);

  Eigen::VectorXd ek(2);
  ek << 1.0, 4.0;
  CHECK(optimal_relaxation(ek, Algorithm::dnwr)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("nnwr jump coefficients: frozen small cases") {
  const auto four = nnwr_jump_coefficients(std::vector<double>{1.0, 1.0, 1.0, 1.0});
  REQUIRE(four.size() == 3);
  CHECK(four[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(four[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(four[2] == doctest::Approx(1.5).epsilon(1e-15));

  const auto two = nnwr_jump_coefficients(std::vector<double>{3.0, 3.0});
  REQUIRE(two.size() == 1);
  CHECK(two[0] == doctest::Approx(1.0).epsilon(1e-15));

  // each interface collects 1/2 + 2 from its own pair plus 1/2 from the neighbor
  const auto mixed = nnwr_jump_coefficients(std::vector<double>{0.25, 1.0, 0.25});
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(mixed[1] == doctest::Approx(1.5).epsilon(1e-15));

  CHECK_THROWS_AS(nnwr_jump_coefficients(std::vector<double>{1.0}), std::invalid_argument);
}

namespace {
SpectralData<double> desk_spectrum(double sigma = 1e-3) {
  return decompose(assemble_coupled(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 9), sigma));
}
}  // namespace

TEST_CASE("dnwr error bound is a geometric envelope anchored at the conditioning") {
  const auto sd = desk_spectrum();
  const auto curve = dnwr_error_bound(sd, 0.5, 1.5, 1.0, 1.0, 6, 2.0);
  REQUIRE(curve.values.size() == 7);
  CHECK(curve.values[0] == doctest::Approx(2.0 * sd.cond_inf).epsilon(1e-15));
  CHECK(curve.lambda == doctest::Approx(sd.lambda_min).epsilon(1e-15));
  CHECK(curve.factor > 0.0);
  for (std::size_t k = 1; k < curve.values.size(); ++k)
    CHECK(curve.values[k] == doctest::Approx(curve.values[k - 1] * curve.factor).epsilon(1e-15));

  // the factor matches the closed form at the slowest mode
  const std::complex<double> root(curve.lambda, 0.0);
  const double want =
      0.5 *
      stable_ratio(RatioKind::coth_coth_minus_one, {0.5, 1.5, 0.0}, root).value().real();
  CHECK(curve.factor == doctest::Approx(want).epsilon(1e-14));

  CHECK_THROWS_AS(dnwr_error_bound(sd, 0.0, 1.5, 1.0, 1.0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dnwr_error_bound(sd, 0.5, 1.5, -1.0, 1.0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dnwr_error_bound(sd, 0.5, 1.5, 1.0, 1.0, -1, 1.0), std::invalid_argument);
}

TEST_CASE("nnwr error bound uses the smallest scaled length and worst jump") {
  const auto sd = desk_spectrum();
  const auto part = uniform_partition(-4.0, 4.0, 4);
  const auto curve = nnwr_error_bound(sd, part, 5, 1.0);
  REQUIRE(curve.values.size() == 6);
  CHECK(curve.values[0] == doctest::Approx(sd.cond_inf).epsilon(1e-15));
  CHECK(curve.h == doctest::Approx(2.0).epsilon(1e-15));
  REQUIRE(curve.d.size() == 3);
  CHECK(curve.d[1] == doctest::Approx(2.0).epsilon(1e-15));
  // equal diffusivities: theta = 1/4, max theta_i d_i = 2/4
  CHECK(curve.dbar == doctest::Approx(0.5).epsilon(1e-15));

  const std::complex<double> root(curve.lambda, 0.0);
  const double want =
      0.5 * stable_ratio(RatioKind::cosech_cosech, {1.0, 1.0, 0.0}, root).value().real();
  CHECK(curve.factor == doctest::Approx(want).epsilon(1e-14));

  CHECK_THROWS_AS(nnwr_error_bound(sd, part, -2, 1.0), std::invalid_argument);
}

TEST_CASE("convergence factor vanishes at the symmetric split and flags contrast") {
  const auto sd = desk_spectrum(1e-2);
  CHECK(convergence_factor_rho(sd, 1.0, 1.0, 1.0, 1.0) == 0.0);
  const double lop = convergence_factor_rho(sd, 0.2, 1.8, 1.0, 1.0);
  const double extreme = convergence_factor_rho(sd, 0.1, 1.9, 1.0, 1.0);
  CHECK(lop > 0.0);
  CHECK(extreme > lop);  // shrinking the Dirichlet side inflates the symbol
  CHECK_THROWS_AS(convergence_factor_rho(sd, -1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(convergence_factor_rho(sd, 1.0, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("numerical rate estimate: geometric mean, flagged on finite termination") {
  IterationReport<double> rep;
  rep.errors = {1.0, 0.5, 0.25, 0.125};
  const auto est = estimate_numerical_rate(rep);
  CHECK(est.rate == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_FALSE(est.flagged);

  IterationReport<double> collapsed;
  collapsed.errors = {1.0, 1e-3, 1e-16};  // drop past the finite-termination guard
  const auto est2 = estimate_numerical_rate(collapsed);
  CHECK(est2.rate == 0.0);
  CHECK(est2.flagged);
}
