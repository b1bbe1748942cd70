#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <wrcontrol/spectral.hpp>
#include <wrcontrol/timegrid.hpp>
#include <wrcontrol/timeop.hpp>

using namespace wrc;
using C = std::complex<double>;

namespace {

std::vector<C> sorted_spectrum(const ComplexVector<>& ev) {
  std::vector<C> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](C a, C b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

Eigen::MatrixXd flip_matrix(Eigen::Index n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) J(i, n - 1 - i) = 1.0;
  return J;
}

}  // namespace

TEST_CASE("order-two coupled spectrum has a closed form") {
  // Unit steps, order 2: L = [[g, 0], [(sqrt2-2)g, g]] with g = 1/Gamma(3/2),
  // Jbar = [[1,0],[0,0]]. Permuting to indices (0,2),(1,3) makes the coupled
  // matrix block lower triangular with diagonal blocks [[g,1],[-1,g]] and g*I,
  // so the spectrum is {g+i, g-i, g, g}.
  const double g = 1.0 / std::tgamma(1.5);
  const auto op = assemble_coupled(build_mesh(MeshKind::uniform, 0.5, 2.0, 1), 1.0);
  const auto sd = decompose(op);
  const auto got = sorted_spectrum(sd.eigenvalues);
  const std::vector<C> want{{g, -1.0}, {g, 0.0}, {g, 0.0}, {g, 1.0}};
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
  CHECK(sd.lambda_min == doctest::Approx(std::sqrt(g)).epsilon(1e-13));
}

TEST_CASE("decompose reconstructs the operator and preserves the trace") {
  struct Cfg {
    MeshKind kind;
    double alpha, sigma;
    int n;
  };
  for (const Cfg& c : {Cfg{MeshKind::both_sided_graded, 0.5, 1e-3, 9},
                       Cfg{MeshKind::uniform, 1.0, 1e-6, 9},
                       Cfg{MeshKind::one_sided_graded, 0.3, 1e-2, 8}}) {
    CAPTURE(static_cast<int>(c.kind));
    const auto op = assemble_coupled(build_mesh(c.kind, c.alpha, 1.0, c.n), c.sigma);
    const auto sd = decompose(op);
    const DenseComplexMatrix<> rebuilt =
        sd.eigvec * sd.eigenvalues.asDiagonal() * sd.eigvec_inv;
    const double rel =
        inf_norm(DenseComplexMatrix<>(rebuilt - op.dense.cast<C>())) / inf_norm(op.dense);
    CHECK(rel < 1e-9);
    const C tr = op.dense.trace();
    CHECK(std::abs(sd.eigenvalues.sum() - tr) < 1e-12 * std::abs(tr));
    CHECK(sd.cond_inf >= 1.0);
    for (C r : spectrum_roots(sd)) CHECK(r.real() > 0.0);
  }
}

TEST_CASE("lambda_min takes the principal-root real part and rejects bad spectra") {
  SpectralData<> sd;
  sd.eigenvalues.resize(4);
  sd.eigenvalues << C(1, 1), C(1, -1), C(1, 0), C(1, 0);
  CHECK(lambda_min(sd) == doctest::Approx(1.0).epsilon(1e-15));
  sd.eigenvalues[2] = C(-1, 0);
  CHECK_THROWS_AS(lambda_min(sd), std::runtime_error);
  sd.eigenvalues[2] = C(0, 0);
  CHECK_THROWS_AS(lambda_min(sd), std::runtime_error);
}

TEST_CASE("block reduction reproduces the direct spectrum on symmetric meshes") {
  const auto op = assemble_coupled(build_mesh(MeshKind::both_sided_graded, 0.5, 1.0, 9), 1e-3);
  REQUIRE(op.symmetric_blocks);
  const auto blocks = similarity_reduce(op);
  Eigen::ComplexEigenSolver<DenseComplexMatrix<>> e1(blocks.first, false);
  Eigen::ComplexEigenSolver<DenseComplexMatrix<>> e2(blocks.second, false);
  ComplexVector<> merged(op.dense.rows());
  merged << e1.eigenvalues(), e2.eigenvalues();

  Eigen::EigenSolver<Eigen::MatrixXd> direct(op.dense, false);
  const auto a = sorted_spectrum(merged);
  const auto b = sorted_spectrum(direct.eigenvalues());
  const double scale = inf_norm(op.dense);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8 * scale);
}

TEST_CASE("block reduction refuses a one-sided mesh") {
  const auto op = assemble_coupled(build_mesh(MeshKind::one_sided_graded, 0.5, 1.0, 9), 1e-3);
  REQUIRE_FALSE(op.symmetric_blocks);
  CHECK_THROWS_AS(similarity_reduce(op), std::invalid_argument);
}

TEST_CASE("positive-real verification separates definite from indefinite cases") {
  const auto good = assemble_l1(build_mesh(MeshKind::uniform, 0.5, 1.0, 9));
  Eigen::MatrixXd B = 5.0 * exchange_matrix<double>(good.order()).mat;
  const auto rep = verify_positive_real(good.entries, B);
  CHECK(rep.definite);
  CHECK(rep.symmetric_margin > 0.0);
  CHECK(rep.real_margin > 0.0);
  CHECK(static_cast<bool>(rep));

  // Strong grading makes the symmetrized operator indefinite.
  const auto bad = assemble_l1(build_mesh(MeshKind::both_sided_graded, 0.3, 1.0, 19));
  Eigen::MatrixXd Bb = Eigen::MatrixXd::Zero(bad.order(), bad.order());
  const auto rep2 = verify_positive_real(bad.entries, Bb);
  CHECK_FALSE(rep2.definite);
  CHECK(rep2.symmetric_margin < 0.0);
  CHECK(rep2.real_margin == 0.0);

  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(good.order(), good.order());
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(verify_positive_real(good.entries, skew), std::invalid_argument);
  CHECK_THROWS_AS(verify_positive_real(good.entries, Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("exchange basis is orthogonal and diagonalizes the flip") {
  const Eigen::Index n = 7;
  const Eigen::MatrixXd X = detail::exchange_basis<double>(n);
  CHECK(inf_norm(Eigen::MatrixXd(X.transpose() * X - Eigen::MatrixXd::Identity(n, n))) <
        1e-14);
  const Eigen::MatrixXd D = X.transpose() * flip_matrix(n) * X;
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(D(i, i) == doctest::Approx(i <= n / 2 ? 1.0 : -1.0).epsilon(1e-14));
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) CHECK(std::abs(D(i, j)) < 1e-14);
  }
}

TEST_CASE("gershgorin report: odd order closed form and disc coverage") {
  const auto op = assemble_l1(build_mesh(MeshKind::one_sided_graded, 0.5, 1.0, 4));
  REQUIRE(op.order() == 5);
  const double beta = 1e3;
  const auto rep = gershgorin_symmetrized(op.entries, beta);

  REQUIRE(rep.closed_form_radii.size() == 5);
  const double r2 = std::sqrt(2.0);
  // middle row: telescoped partial sums of the scaled history coefficients
  CHECK(rep.closed_form_radii[2] ==
        doctest::Approx(op.scale * (op.d(3, 1) - op.d(3, 3)) / r2).epsilon(1e-12));
  CHECK(rep.closed_form_bounds[2] == doctest::Approx(op.scale * op.d(3, 1) / r2).epsilon(1e-12));
  // paired rows share one bound
  CHECK(rep.closed_form_bounds[0] ==
        doctest::Approx(1.5 * op.scale * (op.d(1, 1) + op.d(5, 1))).epsilon(1e-12));
  CHECK(rep.closed_form_bounds[0] == rep.closed_form_bounds[3]);
  for (bool ok : rep.bound_ok) CHECK(ok);

  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(rep.centers[i].imag() == (i < 3 ? beta : -beta));
    CHECK(rep.radii[i] >= 0.0);
  }

  // every eigenvalue of S + i*beta*J lies in the disc union
  DenseComplexMatrix<> M = op.entries.cast<C>();
  M += C(0, beta) * flip_matrix(5).cast<C>();
  Eigen::ComplexEigenSolver<DenseComplexMatrix<>> es(M, false);
  for (Eigen::Index k = 0; k < 5; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < 5; ++i)
      best = std::min(best, std::abs(es.eigenvalues()[k] - rep.centers[i]) - rep.radii[i]);
    CHECK(best <= 1e-9);
  }
}

TEST_CASE("gershgorin report: even order has no closed form, inputs validated") {
  const auto op = assemble_l1(build_mesh(MeshKind::one_sided_graded, 0.5, 1.0, 3));
  REQUIRE(op.order() == 4);
  const auto rep = gershgorin_symmetrized(op.entries, 10.0);
  CHECK(rep.closed_form_radii.size() == 0);
  CHECK(rep.closed_form_bounds.size() == 0);
  CHECK(rep.bound_ok.empty());
  CHECK(rep.centers.size() == 4);

  Eigen::MatrixXd upper = op.entries;
  upper(0, 3) = 0.5;
  CHECK_THROWS_AS(gershgorin_symmetrized(upper, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(gershgorin_symmetrized(op.entries, -1.0), std::invalid_argument);
}
