#pragma once

#include <complex>
#include <future>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wrcontrol/timeop.hpp"

namespace wrc {

template <class Scalar = double>
using DenseComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar = double>
using ComplexVector = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;

template <class Scalar = double>
struct SpectralData {
  ComplexVector<Scalar> eigenvalues;       // 2n+2 values
  DenseComplexMatrix<Scalar> eigvec;       // P, unit 2-norm columns
  DenseComplexMatrix<Scalar> eigvec_inv;   // P^{-1}
  Scalar lambda_min = Scalar(0);           // min_i Re(sqrt(lambda_i)), principal root
  Scalar cond_inf = Scalar(0);             // ||P||_inf * ||P^{-1}||_inf
  bool near_defective = false;             // cond_inf > 1e12: bounds degrade, results kept
};

// Two diagonal blocks of the similarity transform X = [[I, I], [i s I, -i s I]],
// s = sqrt(sigma): the coupled operator is similar to diag(L + iJ/s..., L - iJ/s...).
// Only valid when the forward and backward L1 matrices coincide.
template <class Scalar>
std::pair<DenseComplexMatrix<Scalar>, DenseComplexMatrix<Scalar>>
similarity_reduce(const CoupledOperator<Scalar>& op) {
  if (!op.symmetric_blocks)
    throw std::invalid_argument("reduction requires symmetric mesh");
  const Eigen::Index nb = op.block_order();
  const Scalar beta = Scalar(1) / std::sqrt(op.sigma);
  const std::complex<Scalar> ib(0, beta);
  DenseComplexMatrix<Scalar> plus = op.L_fwd.entries.template cast<std::complex<Scalar>>();
  DenseComplexMatrix<Scalar> minus = plus;
  plus += ib * op.Jbar.mat.template cast<std::complex<Scalar>>();
  minus -= ib * op.Jbar.mat.template cast<std::complex<Scalar>>();
  (void)nb;
  return {std::move(plus), std::move(minus)};
}

// LU inverse polished by a few Newton steps Pi <- Pi (2I - P Pi). Near-defective
// eigenvector matrices leave the plain LU inverse several digits short of the
// reconstruction tolerance; one or two corrections recover them.
template <class Scalar>
DenseComplexMatrix<Scalar> refined_inverse(const DenseComplexMatrix<Scalar>& P) {
  using M = DenseComplexMatrix<Scalar>;
  const Eigen::Index n = P.rows();
  const M ident = M::Identity(n, n);
  M Pi = P.partialPivLu().inverse();
  Scalar best = inf_norm(M(ident - P * Pi));
  for (int step = 0; step < 3 && best > Scalar(1e-15); ++step) {
    M cand = Pi * (Scalar(2) * ident - P * Pi);
    const Scalar res = inf_norm(M(ident - P * cand));
    if (!(res < best)) break;
    Pi = std::move(cand);
    best = res;
  }
  return Pi;
}

template <class Scalar>
Scalar lambda_min(const SpectralData<Scalar>& sd) {
  Scalar lm = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    const std::complex<Scalar> lam = sd.eigenvalues[i];
    if (!(lam.real() > Scalar(0))) throw std::runtime_error("positivity violated");
    lm = std::min(lm, std::sqrt(lam).real());
  }
  if (!(lm > Scalar(0))) throw std::runtime_error("positivity violated");
  return lm;
}

template <class Scalar>
SpectralData<Scalar> decompose(const CoupledOperator<Scalar>& op) {
  using MC = DenseComplexMatrix<Scalar>;
  const Eigen::Index nb = op.block_order();
  const Scalar rs = std::sqrt(op.sigma);
  SpectralData<Scalar> sd;
  sd.eigenvalues.resize(2 * nb);
  sd.eigvec.resize(2 * nb, 2 * nb);

  if (op.symmetric_blocks) {
    auto blocks = similarity_reduce(op);
    auto task = std::async(std::launch::async, [&blocks] {
      return Eigen::ComplexEigenSolver<MC>(blocks.first, true);
    });
    Eigen::ComplexEigenSolver<MC> es2(blocks.second, true);
    Eigen::ComplexEigenSolver<MC> es1 = task.get();
    if (es1.info() != Eigen::Success || es2.info() != Eigen::Success)
      throw std::runtime_error("decompose: block eigensolver did not converge");
    const std::complex<Scalar> is(0, rs);
    sd.eigvec.topLeftCorner(nb, nb) = es1.eigenvectors();
    sd.eigvec.topRightCorner(nb, nb) = es2.eigenvectors();
    sd.eigvec.bottomLeftCorner(nb, nb) = is * es1.eigenvectors();
    sd.eigvec.bottomRightCorner(nb, nb) = -is * es2.eigenvectors();
    sd.eigenvalues.head(nb) = es1.eigenvalues();
    sd.eigenvalues.tail(nb) = es2.eigenvalues();
  } else {
    // Balance before the real eigensolve: with D = diag(I, I/sqrt(sigma)) the
    // off-diagonal blocks both become J/sqrt(sigma), taming the 1/sigma spread.
    const Scalar beta = Scalar(1) / rs;
    DenseMatrix<Scalar> B(2 * nb, 2 * nb);
    B.topLeftCorner(nb, nb) = op.L_fwd.entries;
    B.topRightCorner(nb, nb) = beta * op.Jbar.mat;
    B.bottomLeftCorner(nb, nb) = -beta * op.Jbar.mat;
    B.bottomRightCorner(nb, nb) = op.L_bwd.entries;
    Eigen::EigenSolver<DenseMatrix<Scalar>> es(B, true);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("decompose: eigensolver did not converge");
    sd.eigenvalues = es.eigenvalues();
    sd.eigvec = es.eigenvectors();
    sd.eigvec.bottomRows(nb) *= rs;  // undo the balancing on the physical rows
  }

  for (Eigen::Index j = 0; j < sd.eigvec.cols(); ++j) sd.eigvec.col(j).normalize();
  sd.eigvec_inv = refined_inverse(sd.eigvec);
  sd.cond_inf = inf_norm(sd.eigvec) * inf_norm(sd.eigvec_inv);
  sd.near_defective = sd.cond_inf > Scalar(1e12);
  sd.lambda_min = lambda_min(sd);
  return sd;
}

// Principal square roots of the spectrum, the arguments fed to every
// hyperbolic weight downstream.
template <class Scalar>
std::vector<std::complex<Scalar>> spectrum_roots(const SpectralData<Scalar>& sd) {
  std::vector<std::complex<Scalar>> roots(static_cast<std::size_t>(sd.eigenvalues.size()));
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i)
    roots[static_cast<std::size_t>(i)] = std::sqrt(std::complex<Scalar>(sd.eigenvalues[i]));
  return roots;
}

template <class Scalar = double>
struct PositiveRealReport {
  bool definite = false;       // min eig(A + A^T) > 0
  Scalar symmetric_margin = 0; // min eig(A + A^T)
  Scalar real_margin = 0;      // min Re eig(A + iB), filled when definite
  explicit operator bool() const { return definite; }
};

// True iff A + A^T is positive definite; in that case the eigenvalues of
// A + iB all have positive real part, which is asserted numerically.
template <class Scalar>
PositiveRealReport<Scalar> verify_positive_real(const DenseMatrix<Scalar>& A,
                                                const DenseMatrix<Scalar>& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw std::invalid_argument("verify_positive_real: matrices must be square of equal order");
  const Scalar bscale = std::max(Scalar(1), inf_norm(B));
  if (inf_norm(DenseMatrix<Scalar>(B - B.transpose())) > Scalar(1e-12) * bscale)
    throw std::invalid_argument("verify_positive_real: B must be symmetric");

  PositiveRealReport<Scalar> rep;
  DenseMatrix<Scalar> S = A + A.transpose();
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> ses(S, Eigen::EigenvaluesOnly);
  rep.symmetric_margin = ses.eigenvalues().minCoeff();
  rep.definite = rep.symmetric_margin > Scalar(0);
  if (!rep.definite) return rep;

  DenseComplexMatrix<Scalar> M = A.template cast<std::complex<Scalar>>();
  M += std::complex<Scalar>(0, 1) * B.template cast<std::complex<Scalar>>();
  Eigen::ComplexEigenSolver<DenseComplexMatrix<Scalar>> ces(M, false);
  rep.real_margin = ces.eigenvalues().real().minCoeff();
  if (!(rep.real_margin > Scalar(0)))
    throw std::runtime_error(
        "verify_positive_real: definite symmetric part but a shifted eigenvalue has"
        " nonpositive real part");
  return rep;
}

template <class Scalar = double>
struct GershgorinReport {
  ComplexVector<Scalar> centers;        // diag of X^T S X, +/- i*beta per exchange sign
  Eigen::Vector<Scalar, Eigen::Dynamic> radii;  // full off-diagonal row sums (coverage-grade)
  // Closed-form radius estimates and their bounds, odd order only (empty otherwise).
  // The middle row's estimate counts each symmetric pair once, matching the
  // closed-form convention; the coverage-grade radius above is twice that.
  Eigen::Vector<Scalar, Eigen::Dynamic> closed_form_radii;
  Eigen::Vector<Scalar, Eigen::Dynamic> closed_form_bounds;
  std::vector<bool> bound_ok;
  DenseMatrix<Scalar> basis;            // X
};

namespace detail {

// Exchange-eigenvector basis: columns (e_i + e_{n-1-i})/sqrt2, [e_mid for odd n],
// then (e_i - e_{n-1-i})/sqrt2; X^T J X = diag(+1...,-1...).
template <class Scalar>
DenseMatrix<Scalar> exchange_basis(Eigen::Index n) {
  DenseMatrix<Scalar> X = DenseMatrix<Scalar>::Zero(n, n);
  const Eigen::Index m = n / 2;
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  const bool odd = (n % 2) != 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    X(i, i) = r;
    X(n - 1 - i, i) = r;
    const Eigen::Index j = (odd ? m + 1 : m) + i;
    X(i, j) = r;
    X(n - 1 - i, j) = -r;
  }
  if (odd) X(m, m) = Scalar(1);
  return X;
}

}  // namespace detail

template <class Scalar>
GershgorinReport<Scalar> gershgorin_symmetrized(const DenseMatrix<Scalar>& S, Scalar beta) {
  if (S.rows() != S.cols()) throw std::invalid_argument("gershgorin_symmetrized: S must be square");
  if (!(beta >= Scalar(0))) throw std::invalid_argument("gershgorin_symmetrized: beta must be >= 0");
  const Eigen::Index n = S.rows();
  const Scalar sscale = std::max(Scalar(1), inf_norm(S));
  if (S.template triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff() >
      Scalar(1e-14) * sscale)
    throw std::invalid_argument("gershgorin_symmetrized: S must be lower triangular");

  GershgorinReport<Scalar> rep;
  rep.basis = detail::exchange_basis<Scalar>(n);
  DenseMatrix<Scalar> M = rep.basis.transpose() * S * rep.basis;

  const Eigen::Index m = n / 2;
  const bool odd = (n % 2) != 0;
  rep.centers.resize(n);
  rep.radii.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar sign = (i < (odd ? m + 1 : m)) ? Scalar(1) : Scalar(-1);
    rep.centers[i] = std::complex<Scalar>(M(i, i), sign * beta);
    rep.radii[i] = M.row(i).cwiseAbs().sum() - std::abs(M(i, i));
  }

  if (!odd) return rep;

  // Closed-form analysis of the odd case: recover, per row, the partial sums of
  // the lower-triangular coefficients (for a backward-difference history matrix
  // these are the d_{i,j} values; the bounds below are scale-invariant).
  auto d = [&S](Eigen::Index row, Eigen::Index j) {  // 1-based row and j
    Scalar v = S(row - 1, row - 1);
    for (Eigen::Index l = 1; l < j; ++l) v += S(row - 1, row - 1 - l);
    return v;
  };
  const Scalar r2 = std::sqrt(Scalar(2));
  rep.closed_form_radii.resize(n);
  rep.closed_form_bounds.resize(n);
  rep.bound_ok.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i1 = 1; i1 <= m; ++i1) {         // paired rows, 1-based
    const Eigen::Index p = n + 1 - i1;
    const Scalar bound = Scalar(1.5) * (d(i1, 1) + d(p, 1));
    const Scalar radius_sum = rep.radii[i1 - 1];      // sum-basis row
    const Scalar radius_diff = rep.radii[m + 1 + i1 - 1];  // difference-basis row
    rep.closed_form_radii[i1 - 1] = radius_sum;
    rep.closed_form_radii[m + 1 + i1 - 1] = radius_diff;
    rep.closed_form_bounds[i1 - 1] = bound;
    rep.closed_form_bounds[m + 1 + i1 - 1] = bound;
    const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), bound);
    rep.bound_ok[static_cast<std::size_t>(i1 - 1)] = radius_sum <= bound + tol;
    rep.bound_ok[static_cast<std::size_t>(m + 1 + i1 - 1)] = radius_diff <= bound + tol;
  }
  {  // middle row: closed form counts each mirrored pair once
    const Eigen::Index mid = m + 1;  // 1-based
    const Scalar radius = (d(mid, 1) - d(mid, mid)) / r2;
    const Scalar bound = d(mid, 1) / r2;
    rep.closed_form_radii[m] = radius;
    rep.closed_form_bounds[m] = bound;
    rep.bound_ok[static_cast<std::size_t>(m)] =
        radius <= bound + Scalar(1e-12) * std::max(Scalar(1), bound);
  }
  return rep;
}

}  // namespace wrc
