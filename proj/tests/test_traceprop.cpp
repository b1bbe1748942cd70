#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <wrcontrol/partition.hpp>
#include <wrcontrol/spectral.hpp>
#include <wrcontrol/timegrid.hpp>
#include <wrcontrol/traceprop.hpp>

using namespace wrc;
using C = std::complex<double>;

namespace {

struct Desk {
  CoupledOperator<double> op;
  SpectralData<double> sd;
  Desk()
      : op(assemble_coupled(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 9), 1e-3)),
        sd(decompose(op)) {}
};

Eigen::VectorXd ramp(Eigen::Index n) { return Eigen::VectorXd::LinSpaced(n, 1.0, 2.0); }

}  // namespace

TEST_CASE("weighted spectral application reproduces identity and the operator") {
  const Desk d;
  const Eigen::Index B = d.sd.eigenvalues.size();
  const Eigen::VectorXd v = ramp(B);
  const double scale = v.cwiseAbs().maxCoeff();

  std::vector<C> ones(static_cast<std::size_t>(B), C(1, 0));
  CHECK((detail::apply_weighted(d.sd, ones, v) - v).cwiseAbs().maxCoeff() < 1e-10 * scale);

  // weights = eigenvalues turns the map back into the operator itself
  std::vector<C> lam(static_cast<std::size_t>(B));
  for (Eigen::Index i = 0; i < B; ++i) lam[static_cast<std::size_t>(i)] = d.sd.eigenvalues[i];
  const Eigen::VectorXd Lv = d.op.dense * v;
  CHECK((detail::apply_weighted(d.sd, lam, v) - Lv).cwiseAbs().maxCoeff() <
        1e-9 * Lv.cwiseAbs().maxCoeff());
}

TEST_CASE("dnwr step validates weights, lengths, and trace size") {
  const Desk d;
  const TraceSet<double> Pi{ramp(d.sd.eigenvalues.size())};
  CHECK_THROWS_AS(dnwr_trace_step(d.sd, 1.0, 1.0, 1.0, 1.0, 0.0, 0.5, Pi),
                  std::invalid_argument);
  CHECK_THROWS_AS(dnwr_trace_step(d.sd, 1.0, 1.0, 1.0, 1.0, 0.5, 1.0, Pi),
                  std::invalid_argument);
  CHECK_THROWS_AS(dnwr_trace_step(d.sd, 0.0, 1.0, 1.0, 1.0, 0.5, 0.5, Pi),
                  std::invalid_argument);
  CHECK_THROWS_AS(dnwr_trace_step(d.sd, 1.0, -1.0, 1.0, 1.0, 0.5, 0.5, Pi),
                  std::invalid_argument);
  const TraceSet<double> shortPi{ramp(4)};
  CHECK_THROWS_AS(dnwr_trace_step(d.sd, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, shortPi),
                  std::invalid_argument);
}

TEST_CASE("dnwr step annihilates the symmetric split at theta = 1/2") {
  // equal lengths and diffusivities make every mode weight tanh*coth = 1,
  // so the half-weight update cancels the trace in one application
  const Desk d;
  const TraceSet<double> Pi{ramp(d.sd.eigenvalues.size())};
  const double scale = Pi.pi.cwiseAbs().maxCoeff();
  const auto out = dnwr_trace_step(d.sd, 0.7, 0.7, 2.5, 2.5, 0.5, 0.5, Pi);
  CHECK(out.pi.cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("dnwr step contracts the symmetric split by |1 - 2 theta|") {
  const Desk d;
  const TraceSet<double> Pi{ramp(d.sd.eigenvalues.size())};
  const double scale = Pi.pi.cwiseAbs().maxCoeff();
  const auto out = dnwr_trace_step(d.sd, 1.3, 1.3, 1.0, 1.0, 0.3, 0.3, Pi);
  CHECK((out.pi - 0.4 * Pi.pi).cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("dnwr step is linear in the trace") {
  const Desk d;
  const Eigen::Index B = d.sd.eigenvalues.size();
  const TraceSet<double> P1{ramp(B)};
  const TraceSet<double> P2{ramp(B).array().square().matrix()};
  const TraceSet<double> P12{P1.pi + P2.pi};
  const auto s1 = dnwr_trace_step(d.sd, 0.5, 1.5, 1.0, 4.0, 0.4, 0.6, P1);
  const auto s2 = dnwr_trace_step(d.sd, 0.5, 1.5, 1.0, 4.0, 0.4, 0.6, P2);
  const auto s12 = dnwr_trace_step(d.sd, 0.5, 1.5, 1.0, 4.0, 0.4, 0.6, P12);
  CHECK((s12.pi - s1.pi - s2.pi).cwiseAbs().maxCoeff() <
        1e-9 * s12.pi.cwiseAbs().maxCoeff());
}

TEST_CASE("nnwr interface matrix matches a hand-built product at moderate arguments") {
  const std::vector<double> bp{0.0, 1.0, 2.5, 3.0};
  const std::vector<double> ks{1.0, 4.0, 0.25};
  const auto part = make_partition(bp, ks);
  const C z(1.2, 0.8);

  const double h0 = part.scaled_length(0), h1 = part.scaled_length(1),
               h2 = part.scaled_length(2);
  const double s0 = 1.0, s1 = 2.0, s2 = 0.5;  // sqrt kappas
  auto coth = [](C w) { return 1.0 / std::tanh(w); };
  auto csch = [](C w) { return 1.0 / std::sinh(w); };
  Eigen::Matrix2cd Bg, Bn;
  Bg << s0 * coth(h0 * z) + s1 * coth(h1 * z), -s1 * csch(h1 * z),
      -s1 * csch(h1 * z), s1 * coth(h1 * z) + s2 * coth(h2 * z);
  Bn << std::tanh(h0 * z) / s0 + coth(h1 * z) / s1, csch(h1 * z) / s1,
      csch(h1 * z) / s1, coth(h1 * z) / s1 + std::tanh(h2 * z) / s2;
  const Eigen::Matrix2cd want = Bn * Bg;

  const auto got = detail::nnwr_interface_matrix(part, z);
  REQUIRE(got.rows() == 2);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK(std::abs(got(i, j) - want(i, j)) < 1e-12 * (1.0 + std::abs(want(i, j))));
}

TEST_CASE("nnwr step with two equal subdomains annihilates at theta = 1/4") {
  // G collapses to (2 coth)(2 tanh) = 4 per mode, so the quarter-weight
  // correction removes the trace entirely
  const Desk d;
  const auto part = uniform_partition(0.0, 2.0, 2);
  std::vector<TraceSet<double>> Pis{TraceSet<double>{ramp(d.sd.eigenvalues.size())}};
  const double scale = Pis[0].pi.cwiseAbs().maxCoeff();
  const auto out = nnwr_trace_step(d.sd, part, {0.25}, {0.25}, Pis);
  REQUIRE(out.size() == 1);
  CHECK(out[0].pi.cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("nnwr step validates partition and trace shapes") {
  const Desk d;
  const Eigen::Index B = d.sd.eigenvalues.size();
  const auto single = uniform_partition(0.0, 1.0, 1);
  const auto pair = uniform_partition(0.0, 2.0, 2);
  std::vector<TraceSet<double>> one{TraceSet<double>{ramp(B)}};
  CHECK_THROWS_AS(nnwr_trace_step(d.sd, single, {0.25}, {0.25}, one), std::invalid_argument);
  CHECK_THROWS_AS(nnwr_trace_step(d.sd, pair, {0.25, 0.25}, {0.25}, one),
                  std::invalid_argument);
  CHECK_THROWS_AS(nnwr_trace_step(d.sd, pair, {0.25}, {0.25}, {}), std::invalid_argument);
  std::vector<TraceSet<double>> bad{TraceSet<double>{ramp(4)}};
  CHECK_THROWS_AS(nnwr_trace_step(d.sd, pair, {0.25}, {0.25}, bad), std::invalid_argument);
}
