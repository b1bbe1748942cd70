#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wrcontrol/partition.hpp"
#include "wrcontrol/problem.hpp"
#include "wrcontrol/timeop.hpp"

namespace wrc {

// Interface trace: stacked state part Omega (forward time order, t_1..t_{n+1})
// and adjoint part Upsilon (reversed order, t_n..t_0).
template <class Scalar = double>
struct TraceSet {
  Eigen::Vector<Scalar, Eigen::Dynamic> pi;

  Eigen::Index block() const { return pi.size() / 2; }
  auto omega() { return pi.head(block()); }
  auto omega() const { return pi.head(block()); }
  auto upsilon() { return pi.tail(block()); }
  auto upsilon() const { return pi.tail(block()); }
};

template <class Scalar>
TraceSet<Scalar> zero_trace(Eigen::Index block) {
  return {Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(2 * block)};
}

enum class EndCondition { dirichlet, neumann };
enum class Side { left, right };

// Block-tridiagonal solve where every diagonal block is A + shift_m I and the
// off-diagonal blocks are scalar multiples of I. The per-block inverses are
// formed once; solves against new right-hand sides are matrix-vector work only.
template <class Scalar = double>
class BlockThomas {
 public:
  BlockThomas() = default;
  BlockThomas(const DenseMatrix<Scalar>& A, const Eigen::Vector<Scalar, Eigen::Dynamic>& shift,
              const Eigen::Vector<Scalar, Eigen::Dynamic>& low,
              const Eigen::Vector<Scalar, Eigen::Dynamic>& up)
      : low_(low), up_(up) {
    const Eigen::Index M = shift.size();
    if (low.size() != M || up.size() != M)
      throw std::invalid_argument("BlockThomas: coefficient arrays must share one length");
    const Eigen::Index B = A.rows();
    const DenseMatrix<Scalar> ident = DenseMatrix<Scalar>::Identity(B, B);
    tinv_.reserve(static_cast<std::size_t>(M));
    for (Eigen::Index m = 0; m < M; ++m) {
      DenseMatrix<Scalar> T = A + shift[m] * ident;
      if (m > 0) T.noalias() -= (low_[m] * up_[m - 1]) * tinv_.back();
      tinv_.push_back(T.partialPivLu().inverse());
    }
  }

  Eigen::Index blocks() const { return static_cast<Eigen::Index>(tinv_.size()); }

  // R and the result hold one block per column.
  DenseMatrix<Scalar> solve(const DenseMatrix<Scalar>& R) const {
    const Eigen::Index M = blocks();
    if (R.cols() != M) throw std::invalid_argument("BlockThomas: RHS block count mismatch");
    DenseMatrix<Scalar> Z = R;
    for (Eigen::Index m = 1; m < M; ++m)
      Z.col(m).noalias() -= low_[m] * (tinv_[static_cast<std::size_t>(m - 1)] * Z.col(m - 1));
    DenseMatrix<Scalar> X(R.rows(), M);
    X.col(M - 1).noalias() = tinv_[static_cast<std::size_t>(M - 1)] * Z.col(M - 1);
    for (Eigen::Index m = M - 2; m >= 0; --m)
      X.col(m).noalias() =
          tinv_[static_cast<std::size_t>(m)] * (Z.col(m) - up_[m] * X.col(m + 1)).eval();
    return X;
  }

 private:
  std::vector<DenseMatrix<Scalar>> tinv_;
  Eigen::Vector<Scalar, Eigen::Dynamic> low_, up_;
};

template <class Scalar = double>
struct SubdomainSolution {
  Eigen::Vector<Scalar, Eigen::Dynamic> grid;  // space nodes, uniform spacing dx
  DenseMatrix<Scalar> coupled;                 // 2(n+1) rows: state forward, adjoint reversed
  Scalar kappa = Scalar(1);
  Scalar dx = Scalar(0);

  Eigen::Index block() const { return coupled.rows() / 2; }
  Eigen::Index nodes() const { return coupled.cols(); }
  auto state() const { return coupled.topRows(block()); }
  auto adjoint() const { return coupled.bottomRows(block()); }
  TraceSet<Scalar> trace(Eigen::Index node) const { return {coupled.col(node)}; }
};

template <class Scalar = double>
struct FluxPair {
  Eigen::Vector<Scalar, Eigen::Dynamic> state;    // kappa dY/dx, forward time order
  Eigen::Vector<Scalar, Eigen::Dynamic> adjoint;  // kappa dP/dx, reversed time order
  Eigen::Vector<Scalar, Eigen::Dynamic> stacked() const {
    Eigen::Vector<Scalar, Eigen::Dynamic> v(state.size() + adjoint.size());
    v << state, adjoint;
    return v;
  }
};

// kappa d/dx in the global +x direction by second-order one-sided 3-point
// stencils; drivers apply outward-normal signs.
template <class Scalar>
FluxPair<Scalar> extract_flux(const SubdomainSolution<Scalar>& sol, Side side) {
  if (sol.nodes() < 3) throw std::invalid_argument("extract_flux: need at least 3 space nodes");
  const Eigen::Index last = sol.nodes() - 1;
  Eigen::Vector<Scalar, Eigen::Dynamic> g;
  if (side == Side::left)
    g = sol.kappa *
        (Scalar(-3) * sol.coupled.col(0) + Scalar(4) * sol.coupled.col(1) - sol.coupled.col(2)) /
        (Scalar(2) * sol.dx);
  else
    g = sol.kappa *
        (Scalar(3) * sol.coupled.col(last) - Scalar(4) * sol.coupled.col(last - 1) +
         sol.coupled.col(last - 2)) /
        (Scalar(2) * sol.dx);
  const Eigen::Index b = sol.block();
  return {g.head(b), g.tail(b)};
}

// One subdomain of the coupled state-adjoint system, discretized by central
// differences in space with the time operator acting blockwise per node.
// Neumann ends are imposed by second-order ghost-point elimination. The block
// factorization depends only on (operator, geometry, end kinds) and is reused
// across solves.
template <class Scalar = double>
class Subdomain {
 public:
  Subdomain(const CoupledOperator<Scalar>& op, Scalar kappa, Scalar x0, Scalar x1, Scalar dx,
            EndCondition bcl, EndCondition bcr)
      : op_(&op), kappa_(kappa), dx_(dx), bcl_(bcl), bcr_(bcr) {
    if (!(kappa > Scalar(0))) throw std::invalid_argument("Subdomain: kappa must be positive");
    if (!(dx > Scalar(0)) || !(x1 > x0))
      throw std::invalid_argument("Subdomain: need positive dx and x1 > x0");
    const Scalar len = x1 - x0;
    ncells_ = static_cast<Eigen::Index>(std::llround(len / dx));
    if (ncells_ < 2 || std::abs(static_cast<Scalar>(ncells_) * dx - len) > Scalar(1e-12) * len)
      throw std::invalid_argument(
          "Subdomain: interval length must be an integer multiple of dx (>= 2 cells)");
    grid_ = Eigen::Vector<Scalar, Eigen::Dynamic>::LinSpaced(ncells_ + 1, x0, x1);
    i0_ = (bcl == EndCondition::neumann) ? 0 : 1;
    i1_ = (bcr == EndCondition::neumann) ? ncells_ : ncells_ - 1;

    const Eigen::Index M = i1_ - i0_ + 1;
    const Scalar c = kappa / (dx * dx);
    Eigen::Vector<Scalar, Eigen::Dynamic> shift =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(M, Scalar(2) * c);
    Eigen::Vector<Scalar, Eigen::Dynamic> low =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(M, -c);
    Eigen::Vector<Scalar, Eigen::Dynamic> up =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(M, -c);
    low[0] = Scalar(0);
    up[M - 1] = Scalar(0);
    if (bcl == EndCondition::neumann) up[0] = Scalar(-2) * c;  // ghost fold: mirror neighbor
    if (bcr == EndCondition::neumann) low[M - 1] = Scalar(-2) * c;
    solver_ = BlockThomas<Scalar>(op.dense, shift, low, up);
    forcing_ = DenseMatrix<Scalar>::Zero(op.order(), ncells_ + 1);
  }

  // Tracking/source columns for the true problem; omit for error-equation runs.
  void set_forcing(const ControlProblem<Scalar>& problem) {
    const auto& t = op_->L_fwd.mesh.nodes;
    const Eigen::Index nb = op_->block_order();
    for (Eigen::Index k = 0; k <= ncells_; ++k) {
      const Scalar x = grid_[k];
      for (Eigen::Index m = 0; m < nb; ++m) forcing_(m, k) = problem.f(x, t[m + 1]);
      for (Eigen::Index m = 0; m < nb; ++m)
        forcing_(nb + m, k) = -problem.yq(x, t[nb - 1 - m]);  // adjoint rows run backward
    }
  }
  void clear_forcing() { forcing_.setZero(); }

  Eigen::Index block() const { return op_->block_order(); }
  Eigen::Index cells() const { return ncells_; }
  const Eigen::Vector<Scalar, Eigen::Dynamic>& grid() const { return grid_; }
  Scalar kappa() const { return kappa_; }
  Scalar dx() const { return dx_; }
  const CoupledOperator<Scalar>& op() const { return *op_; }

  // left_data/right_data: the imposed trace for a Dirichlet end, or kappa d/dx
  // (global +x direction) for a Neumann end. Length 2(n+1) each.
  SubdomainSolution<Scalar> solve(const Eigen::Vector<Scalar, Eigen::Dynamic>& left_data,
                                  const Eigen::Vector<Scalar, Eigen::Dynamic>& right_data) const {
    const Eigen::Index B = op_->order();
    if (left_data.size() != B || right_data.size() != B)
      throw std::invalid_argument("Subdomain::solve: boundary data must have length 2(n+1)");
    const Eigen::Index M = i1_ - i0_ + 1;
    const Scalar c = kappa_ / (dx_ * dx_);
    DenseMatrix<Scalar> R = forcing_.middleCols(i0_, M);
    if (bcl_ == EndCondition::dirichlet)
      R.col(0) += c * left_data;
    else
      R.col(0) += (Scalar(-2) / dx_) * left_data;
    if (bcr_ == EndCondition::dirichlet)
      R.col(M - 1) += c * right_data;
    else
      R.col(M - 1) += (Scalar(2) / dx_) * right_data;

    SubdomainSolution<Scalar> sol;
    sol.grid = grid_;
    sol.kappa = kappa_;
    sol.dx = dx_;
    sol.coupled.resize(B, ncells_ + 1);
    sol.coupled.middleCols(i0_, M) = solver_.solve(R);
    if (bcl_ == EndCondition::dirichlet) sol.coupled.col(0) = left_data;
    if (bcr_ == EndCondition::dirichlet) sol.coupled.col(ncells_) = right_data;
    return sol;
  }

  // Interface flux consistent with the interior discretization: the ghost-point
  // value implied by the end-node equation gives
  //   kappa u_x = +-(dx/2)(L u_end - F_end) + kappa * (one-sided difference)/dx.
  // Matches the scheme to second order and makes converged flux jumps vanish at
  // the discrete level, which 3-point extraction does not.
  Eigen::Vector<Scalar, Eigen::Dynamic> ghost_flux(const SubdomainSolution<Scalar>& sol,
                                                   Side side) const {
    if (side == Side::right) {
      const auto u0 = sol.coupled.col(ncells_);
      const auto uin = sol.coupled.col(ncells_ - 1);
      return (dx_ / Scalar(2)) * (op_->dense * u0 - forcing_.col(ncells_)) +
             (kappa_ / dx_) * (u0 - uin);
    }
    const auto u0 = sol.coupled.col(0);
    const auto uin = sol.coupled.col(1);
    return (Scalar(-0.5) * dx_) * (op_->dense * u0 - forcing_.col(0)) +
           (kappa_ / dx_) * (uin - u0);
  }

 private:
  const CoupledOperator<Scalar>* op_;
  Scalar kappa_, dx_;
  EndCondition bcl_, bcr_;
  Eigen::Index ncells_ = 0, i0_ = 0, i1_ = 0;
  Eigen::Vector<Scalar, Eigen::Dynamic> grid_;
  BlockThomas<Scalar> solver_;
  DenseMatrix<Scalar> forcing_;
};

// Homogeneous coupled solve with Dirichlet traces at both ends (zero data
// reproduces the error equations).
template <class Scalar>
SubdomainSolution<Scalar> solve_coupled_dirichlet(const CoupledOperator<Scalar>& op, Scalar kappa,
                                                  Scalar x0, Scalar x1, Scalar dx,
                                                  const TraceSet<Scalar>& left_trace,
                                                  const TraceSet<Scalar>& right_trace) {
  Subdomain<Scalar> sd(op, kappa, x0, x1, dx, EndCondition::dirichlet, EndCondition::dirichlet);
  return sd.solve(left_trace.pi, right_trace.pi);
}

// Homogeneous coupled solve with Neumann data (kappa d/dx, global +x) at one or
// both ends; ends without flux data take the Dirichlet trace instead.
template <class Scalar>
SubdomainSolution<Scalar> solve_coupled_neumann(
    const CoupledOperator<Scalar>& op, Scalar kappa, Scalar x0, Scalar x1, Scalar dx,
    const std::optional<Eigen::Vector<Scalar, Eigen::Dynamic>>& flux_left,
    const std::optional<Eigen::Vector<Scalar, Eigen::Dynamic>>& flux_right,
    const TraceSet<Scalar>& dirichlet_other_end) {
  if (!flux_left && !flux_right)
    throw std::invalid_argument("solve_coupled_neumann: need at least one Neumann end");
  const EndCondition bcl = flux_left ? EndCondition::neumann : EndCondition::dirichlet;
  const EndCondition bcr = flux_right ? EndCondition::neumann : EndCondition::dirichlet;
  Subdomain<Scalar> sd(op, kappa, x0, x1, dx, bcl, bcr);
  return sd.solve(flux_left ? *flux_left : dirichlet_other_end.pi,
                  flux_right ? *flux_right : dirichlet_other_end.pi);
}

template <class Scalar = double>
struct MonodomainResult {
  Eigen::Vector<Scalar, Eigen::Dynamic> grid;
  TimeMesh<Scalar> mesh;
  DenseMatrix<Scalar> coupled;  // raw solver layout, per space node
  DenseMatrix<Scalar> y, p, u;  // (n+2) x nodes, forward time order incl. t_0 and T rows
  Scalar cost = Scalar(0);

  TraceSet<Scalar> trace(Eigen::Index node) const { return {coupled.col(node)}; }
};

// Undecomposed reference solve on the whole domain: homogeneous Dirichlet
// boundaries, piecewise-constant kappa by conservative differencing at cell
// midpoints, tracking forcing from the problem's target.
template <class Scalar>
MonodomainResult<Scalar> monodomain_solve(const ControlProblem<Scalar>& problem, Scalar dx,
                                          const TimeMesh<Scalar>& mesh) {
  const CoupledOperator<Scalar> op = assemble_coupled(mesh, problem.sigma);
  const Scalar len = problem.x_right - problem.x_left;
  const Eigen::Index ncells = static_cast<Eigen::Index>(std::llround(len / dx));
  if (ncells < 2 || std::abs(static_cast<Scalar>(ncells) * dx - len) > Scalar(1e-12) * len)
    throw std::invalid_argument("monodomain_solve: domain length must be a multiple of dx");

  MonodomainResult<Scalar> res;
  res.grid = Eigen::Vector<Scalar, Eigen::Dynamic>::LinSpaced(ncells + 1, problem.x_left,
                                                              problem.x_right);
  res.mesh = mesh;

  const auto& part = problem.kappa;
  auto kappa_at = [&part](Scalar x) {
    for (Eigen::Index i = 0; i < part.count(); ++i)
      if (x <= part.breakpoints[i + 1] || i == part.count() - 1) return part.kappas[i];
    return part.kappas[part.count() - 1];
  };
  Eigen::Vector<Scalar, Eigen::Dynamic> kcell(ncells);
  for (Eigen::Index mcell = 0; mcell < ncells; ++mcell)
    kcell[mcell] = kappa_at((res.grid[mcell] + res.grid[mcell + 1]) / Scalar(2));

  const Eigen::Index M = ncells - 1;  // interior unknowns
  Eigen::Vector<Scalar, Eigen::Dynamic> shift(M), low(M), up(M);
  const Scalar dx2 = dx * dx;
  for (Eigen::Index m = 0; m < M; ++m) {
    shift[m] = (kcell[m] + kcell[m + 1]) / dx2;
    low[m] = -kcell[m] / dx2;
    up[m] = -kcell[m + 1] / dx2;
  }
  low[0] = Scalar(0);
  up[M - 1] = Scalar(0);
  BlockThomas<Scalar> solver(op.dense, shift, low, up);

  const Eigen::Index nb = op.block_order();
  const Eigen::Index B = op.order();
  DenseMatrix<Scalar> R(B, M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const Scalar x = res.grid[m + 1];
    for (Eigen::Index j = 0; j < nb; ++j) R(j, m) = problem.f(x, mesh.nodes[j + 1]);
    for (Eigen::Index j = 0; j < nb; ++j) R(nb + j, m) = -problem.yq(x, mesh.nodes[nb - 1 - j]);
  }
  res.coupled = DenseMatrix<Scalar>::Zero(B, ncells + 1);
  res.coupled.middleCols(1, M) = solver.solve(R);

  res.y = DenseMatrix<Scalar>::Zero(nb + 1, ncells + 1);
  res.p = DenseMatrix<Scalar>::Zero(nb + 1, ncells + 1);
  for (Eigen::Index j = 0; j < nb; ++j) {
    res.y.row(j + 1) = res.coupled.row(j);            // state row j holds t_{j+1}
    res.p.row(j) = res.coupled.row(nb + (nb - 1 - j));  // adjoint row m holds t_{n-m}
  }
  res.u = -res.p / problem.sigma;
  res.cost = evaluate_cost(res.y, res.u, problem, res.grid, mesh);
  return res;
}

}  // namespace wrc
