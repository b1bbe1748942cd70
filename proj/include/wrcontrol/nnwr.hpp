#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wrcontrol/dnwr.hpp"
#include "wrcontrol/iterreport.hpp"
#include "wrcontrol/partition.hpp"
#include "wrcontrol/problem.hpp"
#include "wrcontrol/subdomain.hpp"

namespace wrc {

template <class Scalar = double>
struct NnwrResult {
  IterationReport<Scalar> report;
  std::vector<SubdomainSolution<Scalar>> fields;  // final Dirichlet-sweep fields per subdomain
  std::vector<TraceSet<Scalar>> traces;           // final trace per interface
  std::vector<std::vector<Scalar>> interface_errors;  // per interface, per iteration
  std::vector<Scalar> increments;
};

// Fully discrete multi-subdomain NNWR: Dirichlet sweep with the true forcing,
// flux jumps at the interfaces, homogeneous Neumann corrections, relaxed trace
// update. Factorizations and the monodomain reference are built once;
// iterate() is const and thread-safe for parameter sweeps.
template <class Scalar = double>
class NnwrEngine {
 public:
  NnwrEngine(const ControlProblem<Scalar>& problem, const Partition<Scalar>& part, Scalar dx,
             const TimeMesh<Scalar>& mesh)
      : part_(part), dx_(dx), mesh_(mesh), op_(assemble_coupled(mesh, problem.sigma)) {
    const Eigen::Index N = part.count();
    if (N < 2) throw std::invalid_argument("run_nnwr: need at least 2 subdomains");
    problem_ = problem;
    problem_.kappa = part;
    problem_.x_left = part.left();
    problem_.x_right = part.right();
    reference_ = monodomain_solve(problem_, dx, mesh);
    const Scalar x0 = part.left();
    for (Eigen::Index i = 0; i + 1 < N; ++i)
      ifaces_.push_back(
          static_cast<Eigen::Index>(std::llround((part.breakpoints[i + 1] - x0) / dx)));
    for (Eigen::Index i = 0; i < N; ++i) {
      const Scalar a = part.breakpoints[i], b = part.breakpoints[i + 1];
      dsubs_.push_back(std::make_unique<Subdomain<Scalar>>(
          op_, part.kappas[i], a, b, dx, EndCondition::dirichlet, EndCondition::dirichlet));
      dsubs_.back()->set_forcing(problem_);
      nsubs_.push_back(std::make_unique<Subdomain<Scalar>>(
          op_, part.kappas[i], a, b, dx,
          i == 0 ? EndCondition::dirichlet : EndCondition::neumann,
          i == N - 1 ? EndCondition::dirichlet : EndCondition::neumann));
    }
  }

  NnwrEngine(const NnwrEngine&) = delete;
  NnwrEngine& operator=(const NnwrEngine&) = delete;

  const MonodomainResult<Scalar>& reference() const { return reference_; }
  const CoupledOperator<Scalar>& op() const { return op_; }
  const std::vector<Eigen::Index>& interface_nodes() const { return ifaces_; }

  NnwrResult<Scalar> iterate(const std::vector<Scalar>& thetas, const std::vector<Scalar>& phis,
                             Scalar tol, int max_iter,
                             const std::optional<std::vector<TraceSet<Scalar>>>& init_traces =
                                 std::nullopt) const {
    const std::size_t N = dsubs_.size();
    const std::size_t K = N - 1;
    if (thetas.size() != K || phis.size() != K)
      throw std::invalid_argument("run_nnwr: need one relaxation weight per interface");
    for (std::size_t i = 0; i < K; ++i)
      if (!(thetas[i] > Scalar(0)) || thetas[i] >= Scalar(1) || !(phis[i] > Scalar(0)) ||
          phis[i] >= Scalar(1))
        throw std::invalid_argument("run_nnwr: relaxation weights must lie in (0, 1)");
    if (tol < Scalar(0)) throw std::invalid_argument("run_nnwr: tolerance must be nonnegative");
    if (max_iter < 1) throw std::invalid_argument("run_nnwr: need at least one iteration");

    using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
    const Eigen::Index B = op_.order();
    const Eigen::Index nb = op_.block_order();
    const Vec zero = Vec::Zero(B);

    std::vector<Vec> refs(K);
    std::vector<Scalar> scales(K);
    for (std::size_t i = 0; i < K; ++i) {
      refs[i] = reference_.coupled.col(ifaces_[i]);
      const Scalar rn = detail::sup_norm(refs[i]);
      scales[i] = rn >= Scalar(1e-14) ? rn : Scalar(1);
    }

    std::vector<Vec> Pis(K);
    if (init_traces) {
      if (init_traces->size() != K)
        throw std::invalid_argument("run_nnwr: need one initial trace per interface");
      for (std::size_t i = 0; i < K; ++i) {
        if ((*init_traces)[i].pi.size() != B)
          throw std::invalid_argument("run_nnwr: initial trace length mismatch");
        Pis[i] = (*init_traces)[i].pi;
      }
    } else {
      for (std::size_t i = 0; i < K; ++i)
        Pis[i] = detail::initial_trace(B, detail::sup_norm(refs[i]));
    }
    Scalar pi0n = Scalar(0);
    for (const auto& p : Pis) pi0n = std::max(pi0n, detail::sup_norm(p));

    NnwrResult<Scalar> res;
    res.interface_errors.resize(K);
    auto& rep = res.report;
    auto record_errors = [&]() {
      Scalar emax = Scalar(0);
      for (std::size_t i = 0; i < K; ++i) {
        const Scalar e = detail::sup_norm(Vec(Pis[i] - refs[i])) / scales[i];
        res.interface_errors[i].push_back(e);
        emax = std::max(emax, e);
      }
      rep.errors.push_back(emax);
    };
    record_errors();

    std::vector<SubdomainSolution<Scalar>> X(N), Xi(N);
    std::vector<Vec> G(K);
    for (int k = 1; k <= max_iter; ++k) {
      for (std::size_t i = 0; i < N; ++i)
        X[i] = dsubs_[i]->solve(i == 0 ? zero : Pis[i - 1], i == N - 1 ? zero : Pis[i]);
      for (std::size_t i = 0; i < K; ++i)
        G[i] = dsubs_[i]->ghost_flux(X[i], Side::right) -
               dsubs_[i + 1]->ghost_flux(X[i + 1], Side::left);
      for (std::size_t i = 0; i < N; ++i)
        Xi[i] = nsubs_[i]->solve(i == 0 ? zero : Vec(-G[i - 1]), i == N - 1 ? zero : G[i]);

      Scalar inc = Scalar(0);
      for (std::size_t i = 0; i < K; ++i) {
        const Vec jump = Xi[i].coupled.col(Xi[i].nodes() - 1) + Xi[i + 1].coupled.col(0);
        Vec delta(B);
        delta.head(nb) = thetas[i] * jump.head(nb);
        delta.tail(nb) = phis[i] * jump.tail(nb);
        inc = std::max(inc, detail::sup_norm(delta));
        Pis[i] -= delta;
      }
      res.increments.push_back(inc);
      record_errors();
      rep.iterations = k;

      Scalar pin = Scalar(0);
      for (const auto& p : Pis) pin = std::max(pin, detail::sup_norm(p));
      if (inc <= tol * std::max(pin, pi0n)) {
        rep.converged = true;
        break;
      }
      const auto ku = static_cast<std::size_t>(k);
      if (k >= 5 && rep.errors[ku] > Scalar(10) * rep.errors[ku - 5] &&
          rep.errors[ku] > rep.errors[0]) {
        rep.diverged = true;
        for (std::size_t i = 0; i < K; ++i)
          if (res.interface_errors[i].back() == rep.errors.back())
            rep.divergent_interface = static_cast<int>(i);
        break;
      }
    }
    if (!rep.converged && rep.errors.back() > rep.errors.front()) {
      rep.diverged = true;
      if (rep.divergent_interface < 0)
        for (std::size_t i = 0; i < K; ++i)
          if (res.interface_errors[i].back() == rep.errors.back())
            rep.divergent_interface = static_cast<int>(i);
    }
    rep.rate = rate_from_errors(rep.errors, &rep.rate_flagged);
    {
      std::ostringstream os;
      os << "nnwr alpha=" << problem_.alpha << " sigma=" << problem_.sigma
         << " mesh=" << mesh_kind_name(mesh_.kind) << " nt=" << mesh_.intervals()
         << " dx=" << dx_ << " subdomains=" << N << " theta=(";
      for (std::size_t i = 0; i < K; ++i) os << (i ? "," : "") << thetas[i];
      os << ") phi=(";
      for (std::size_t i = 0; i < K; ++i) os << (i ? "," : "") << phis[i];
      os << ") tol=" << tol;
      rep.config_echo = os.str();
    }
    res.fields = std::move(X);
    res.traces.reserve(K);
    for (auto& p : Pis) res.traces.push_back(TraceSet<Scalar>{std::move(p)});
    return res;
  }

 private:
  Partition<Scalar> part_;
  Scalar dx_;
  TimeMesh<Scalar> mesh_;
  CoupledOperator<Scalar> op_;
  ControlProblem<Scalar> problem_;
  MonodomainResult<Scalar> reference_;
  std::vector<Eigen::Index> ifaces_;
  std::vector<std::unique_ptr<Subdomain<Scalar>>> dsubs_, nsubs_;
};

template <class Scalar>
NnwrResult<Scalar> run_nnwr(const ControlProblem<Scalar>& problem, const Partition<Scalar>& part,
                            const std::vector<Scalar>& thetas, const std::vector<Scalar>& phis,
                            Scalar dx, const TimeMesh<Scalar>& mesh, Scalar tol, int max_iter,
                            const std::optional<std::vector<TraceSet<Scalar>>>& init_traces =
                                std::nullopt) {
  NnwrEngine<Scalar> engine(problem, part, dx, mesh);
  return engine.iterate(thetas, phis, tol, max_iter, init_traces);
}

// Error after a fixed number of NNWR iterations over a relaxation grid. With
// one interface the grid is swept directly; with two it is tensored over both
// interfaces. More interfaces are rejected: the tensor sweep is meant for
// small interface counts.
template <class Scalar>
ThetaSweepTable<Scalar> sweep_theta_nnwr(const ControlProblem<Scalar>& problem,
                                         const Partition<Scalar>& part,
                                         const std::vector<Scalar>& theta_grid, Scalar dx,
                                         const TimeMesh<Scalar>& mesh, int fixed_iterations,
                                         unsigned threads = 0) {
  const Eigen::Index K = part.count() - 1;
  if (K > 2)
    throw std::invalid_argument("sweep_theta_nnwr: tensor sweep supports at most 2 interfaces");
  for (Scalar th : theta_grid)
    if (!(th > Scalar(0)) || th >= Scalar(1))
      throw std::invalid_argument("sweep_theta_nnwr: grid values must lie in (0, 1)");
  NnwrEngine<Scalar> engine(problem, part, dx, mesh);
  ThetaSweepTable<Scalar> table;
  if (K == 1) {
    table.rows.resize(theta_grid.size());
    detail::parallel_for(theta_grid.size(), threads, [&](std::size_t i) {
      const std::vector<Scalar> w{theta_grid[i]};
      const auto r = engine.iterate(w, w, Scalar(0), fixed_iterations);
      table.rows[i] = {theta_grid[i], Scalar(0), r.report.final_error(), r.report.diverged};
    });
  } else {
    const std::size_t g = theta_grid.size();
    table.rows.resize(g * g);
    detail::parallel_for(g * g, threads, [&](std::size_t idx) {
      const std::size_t i = idx / g, j = idx % g;
      const std::vector<Scalar> w{theta_grid[i], theta_grid[j]};
      const auto r = engine.iterate(w, w, Scalar(0), fixed_iterations);
      table.rows[idx] = {theta_grid[i], theta_grid[j], r.report.final_error(),
                         r.report.diverged};
    });
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].error < table.rows[best].error) best = i;
  if (!table.rows.empty()) {
    table.argmin = table.rows[best].theta;
    table.argmin2 = table.rows[best].theta2;
  }
  return table;
}

}  // namespace wrc
