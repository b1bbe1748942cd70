#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "wrcontrol/timegrid.hpp"

namespace wrc {

// x^e with 0^e := 0 for every e, including e = 0. This is the alpha -> 1
// limit convention of the L1 coefficients: the numerator collapses so that
// the operator becomes the exact backward-difference matrix.
template <class Scalar>
Scalar powz(Scalar x, Scalar e) {
  if (x <= Scalar(0)) return Scalar(0);
  return std::pow(x, e);
}

template <class Scalar = double>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Lower-triangular discrete Caputo derivative matrix of order n+1 acting on
// the interior+final node values (zero initial value folded in).
// coeff_table(m-1, j-1) holds d_{m,j} (1 <= j <= m <= n+1), without the
// 1/Gamma(2-alpha) prefactor; `entries` has the prefactor applied.
template <class Scalar = double>
struct L1Operator {
  TimeMesh<Scalar> mesh;
  DenseMatrix<Scalar> entries;
  DenseMatrix<Scalar> coeff_table;
  Scalar scale = Scalar(1);

  Eigen::Index order() const { return entries.rows(); }
  Scalar d(Eigen::Index m, Eigen::Index j) const { return coeff_table(m - 1, j - 1); }
};

template <class Scalar>
L1Operator<Scalar> assemble_l1(const TimeMesh<Scalar>& mesh) {
  const Eigen::Index n1 = mesh.n + 1;
  const auto& t = mesh.nodes;
  for (Eigen::Index j = 0; j < n1; ++j)
    if (!(t[j + 1] > t[j])) throw std::invalid_argument("assemble_l1: mesh spacings must be positive");

  const Scalar alpha = mesh.alpha;
  const Scalar e = Scalar(1) - alpha;
  L1Operator<Scalar> op;
  op.mesh = mesh;
  op.coeff_table = DenseMatrix<Scalar>::Zero(n1, n1);
  op.entries = DenseMatrix<Scalar>::Zero(n1, n1);
  op.scale = Scalar(1) / std::tgamma(Scalar(2) - alpha);

  for (Eigen::Index m = 1; m <= n1; ++m)
    for (Eigen::Index j = 1; j <= m; ++j) {
      const Scalar num = powz(t[m] - t[m - j], e) - powz(t[m] - t[m - j + 1], e);
      op.coeff_table(m - 1, j - 1) = num / (t[m - j + 1] - t[m - j]);
    }

  for (Eigen::Index m = 1; m <= n1; ++m) {
    op.entries(m - 1, m - 1) = op.coeff_table(m - 1, 0);
    for (Eigen::Index j = 1; j <= m - 1; ++j)
      op.entries(m - 1, m - j - 1) = op.coeff_table(m - 1, j) - op.coeff_table(m - 1, j - 1);
  }
  op.entries *= op.scale;
  return op;
}

// Order n+1 matrix with ones on the anti-diagonal positions (i, n+1-i) for
// i = 1..n and a zero last row and column: the coupling between the forward
// state ordering and the reversed adjoint ordering (y couples to p(T) = 0,
// the reversed adjoint couples to y(0) = 0).
template <class Scalar = double>
struct ExchangeMatrix {
  Eigen::Index order = 0;
  DenseMatrix<Scalar> mat;
};

template <class Scalar = double>
ExchangeMatrix<Scalar> exchange_matrix(Eigen::Index order) {
  if (order < 2) throw std::invalid_argument("exchange_matrix: order must be >= 2");
  ExchangeMatrix<Scalar> J;
  J.order = order;
  J.mat = DenseMatrix<Scalar>::Zero(order, order);
  for (Eigen::Index i = 1; i <= order - 1; ++i) J.mat(i - 1, order - 1 - i) = Scalar(1);
  return J;
}

// Block operator of order 2(n+1) tying the state rows (forward time order)
// to the adjoint rows (reversed time order):
//   [ L_fwd          Jbar/sigma ]
//   [ -Jbar          L_bwd      ]
template <class Scalar = double>
struct CoupledOperator {
  L1Operator<Scalar> L_fwd;
  L1Operator<Scalar> L_bwd;
  ExchangeMatrix<Scalar> Jbar;
  Scalar sigma = Scalar(1);
  DenseMatrix<Scalar> dense;
  bool symmetric_blocks = false;  // L_bwd entry-wise identical to L_fwd

  Eigen::Index block_order() const { return L_fwd.order(); }
  Eigen::Index order() const { return dense.rows(); }
};

template <class Scalar>
CoupledOperator<Scalar> assemble_coupled(const L1Operator<Scalar>& L_fwd,
                                         const L1Operator<Scalar>& L_bwd,
                                         const ExchangeMatrix<Scalar>& Jbar, Scalar sigma) {
  const Eigen::Index n1 = L_fwd.order();
  if (L_bwd.order() != n1 || Jbar.order != n1)
    throw std::invalid_argument("assemble_coupled: block order mismatch");
  if (!(sigma > Scalar(0))) throw std::invalid_argument("assemble_coupled: sigma must be positive");

  CoupledOperator<Scalar> op;
  op.L_fwd = L_fwd;
  op.L_bwd = L_bwd;
  op.Jbar = Jbar;
  op.sigma = sigma;
  op.dense = DenseMatrix<Scalar>::Zero(2 * n1, 2 * n1);
  op.dense.topLeftCorner(n1, n1) = L_fwd.entries;
  op.dense.topRightCorner(n1, n1) = Jbar.mat / sigma;
  op.dense.bottomLeftCorner(n1, n1) = -Jbar.mat;
  op.dense.bottomRightCorner(n1, n1) = L_bwd.entries;
  op.symmetric_blocks = (L_fwd.entries.array() == L_bwd.entries.array()).all();
  return op;
}

// Operator for a mesh. On reflection-symmetric meshes (uniform, both-sided)
// the reversed-time matrix equals the forward one exactly, so the forward
// matrix is reused verbatim; assembling it from the floating-point reflected
// nodes instead would perturb the leading coefficients of strongly graded
// meshes (the first spacing can be ~1e-10 T, so a ~1e-16 T reflection error
// moves d_{1,1} by far more than eigenvalue-matching tolerances).
template <class Scalar>
CoupledOperator<Scalar> assemble_coupled(const TimeMesh<Scalar>& mesh, Scalar sigma) {
  const L1Operator<Scalar> L = assemble_l1(mesh);
  const bool symmetric = mesh.kind != MeshKind::one_sided_graded;
  const L1Operator<Scalar> Lb = symmetric ? L : assemble_l1(reflect_mesh(mesh));
  return assemble_coupled(L, Lb, exchange_matrix<Scalar>(mesh.n + 1), sigma);
}

template <class Derived>
typename Derived::RealScalar inf_norm(const Eigen::MatrixBase<Derived>& M) {
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace wrc
