#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "wrcontrol/iterreport.hpp"
#include "wrcontrol/partition.hpp"
#include "wrcontrol/problem.hpp"
#include "wrcontrol/subdomain.hpp"

namespace wrc {

template <class Scalar = double>
struct DnwrResult {
  IterationReport<Scalar> report;
  SubdomainSolution<Scalar> left, right;  // final subdomain fields
  TraceSet<Scalar> trace;                 // final interface trace
  std::vector<Scalar> increments;         // trace-update increments per iteration
};

namespace detail {

template <class Scalar>
Scalar sup_norm(const Eigen::Vector<Scalar, Eigen::Dynamic>& v) {
  return v.size() == 0 ? Scalar(0) : v.cwiseAbs().maxCoeff();
}

// Deterministic nondegenerate start: constant 1 scaled to the reference trace
// magnitude (plain 1 when the reference is essentially zero).
template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> initial_trace(Eigen::Index size, Scalar ref_magnitude) {
  const Scalar scale = ref_magnitude >= Scalar(1e-14) ? ref_magnitude : Scalar(1);
  return Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(size, scale);
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  auto lane = [&body, count, threads](unsigned l) {
    for (std::size_t i = l; i < count; i += threads) body(i);
  };
  std::vector<std::future<void>> lanes;
  for (unsigned l = 1; l < threads; ++l)
    lanes.push_back(std::async(std::launch::async, lane, l));
  lane(0);
  for (auto& f : lanes) f.get();
}

}  // namespace detail

// Fully discrete two-subdomain DNWR: Dirichlet solve left, flux transfer,
// Neumann solve right, relaxed trace update. The factorizations and the
// monodomain reference are built once; iterate() is const and thread-safe, so
// parameter sweeps share one engine.
template <class Scalar = double>
class DnwrEngine {
 public:
  DnwrEngine(const ControlProblem<Scalar>& problem, const Partition<Scalar>& part, Scalar dx,
             const TimeMesh<Scalar>& mesh)
      : part_(part), dx_(dx), mesh_(mesh), op_(assemble_coupled(mesh, problem.sigma)) {
    if (part.count() != 2) throw std::invalid_argument("run_dnwr: need exactly 2 subdomains");
    problem_ = problem;
    problem_.kappa = part;
    problem_.x_left = part.left();
    problem_.x_right = part.right();
    reference_ = monodomain_solve(problem_, dx, mesh);
    const Scalar x0 = part.breakpoints[0], xi = part.breakpoints[1], x1 = part.breakpoints[2];
    iface_ = static_cast<Eigen::Index>(std::llround((xi - x0) / dx));
    dsub_ = std::make_unique<Subdomain<Scalar>>(op_, part.kappas[0], x0, xi, dx,
                                                EndCondition::dirichlet, EndCondition::dirichlet);
    nsub_ = std::make_unique<Subdomain<Scalar>>(op_, part.kappas[1], xi, x1, dx,
                                                EndCondition::neumann, EndCondition::dirichlet);
    dsub_->set_forcing(problem_);
    nsub_->set_forcing(problem_);
  }

  DnwrEngine(const DnwrEngine&) = delete;
  DnwrEngine& operator=(const DnwrEngine&) = delete;

  const MonodomainResult<Scalar>& reference() const { return reference_; }
  const CoupledOperator<Scalar>& op() const { return op_; }
  Eigen::Index interface_node() const { return iface_; }

  DnwrResult<Scalar> iterate(Scalar theta, Scalar phi, Scalar tol, int max_iter,
                             const std::optional<TraceSet<Scalar>>& init_trace =
                                 std::nullopt) const {
    if (!(theta > Scalar(0)) || theta >= Scalar(1) || !(phi > Scalar(0)) || phi >= Scalar(1))
      throw std::invalid_argument("run_dnwr: relaxation weights must lie in (0, 1)");
    if (tol < Scalar(0)) throw std::invalid_argument("run_dnwr: tolerance must be nonnegative");
    if (max_iter < 1) throw std::invalid_argument("run_dnwr: need at least one iteration");

    DnwrResult<Scalar> res;
    const Eigen::Index B = op_.order();
    const Eigen::Index nb = op_.block_order();
    const Eigen::Vector<Scalar, Eigen::Dynamic> ref = reference_.coupled.col(iface_);
    const Scalar refn = detail::sup_norm(ref);
    const Scalar scale = refn >= Scalar(1e-14) ? refn : Scalar(1);
    const Eigen::Vector<Scalar, Eigen::Dynamic> zero =
        Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(B);

    Eigen::Vector<Scalar, Eigen::Dynamic> Pi =
        init_trace ? init_trace->pi : detail::initial_trace(B, refn);
    if (Pi.size() != B) throw std::invalid_argument("run_dnwr: initial trace length mismatch");
    const Scalar pi0n = detail::sup_norm(Pi);

    auto& rep = res.report;
    rep.errors.push_back(detail::sup_norm(Eigen::Vector<Scalar, Eigen::Dynamic>(Pi - ref)) /
                         scale);

    SubdomainSolution<Scalar> X1, X2;
    for (int k = 1; k <= max_iter; ++k) {
      X1 = dsub_->solve(zero, Pi);
      const Eigen::Vector<Scalar, Eigen::Dynamic> flux = dsub_->ghost_flux(X1, Side::right);
      X2 = nsub_->solve(flux, zero);
      const Eigen::Vector<Scalar, Eigen::Dynamic> cand = X2.coupled.col(0);
      Eigen::Vector<Scalar, Eigen::Dynamic> next(B);
      next.head(nb) = theta * cand.head(nb) + (Scalar(1) - theta) * Pi.head(nb);
      next.tail(nb) = phi * cand.tail(nb) + (Scalar(1) - phi) * Pi.tail(nb);

      const Scalar inc = detail::sup_norm(Eigen::Vector<Scalar, Eigen::Dynamic>(next - Pi));
      Pi = std::move(next);
      res.increments.push_back(inc);
      rep.errors.push_back(detail::sup_norm(Eigen::Vector<Scalar, Eigen::Dynamic>(Pi - ref)) /
                           scale);
      rep.iterations = k;
      if (inc <= tol * std::max(detail::sup_norm(Pi), pi0n)) {
        rep.converged = true;
        break;
      }
      if (k >= 5 && rep.errors[static_cast<std::size_t>(k)] >
                        Scalar(10) * rep.errors[static_cast<std::size_t>(k - 5)]) {
        rep.diverged = true;
        break;
      }
    }
    if (!rep.converged && rep.errors.back() > rep.errors.front()) rep.diverged = true;
    rep.rate = rate_from_errors(rep.errors, &rep.rate_flagged);
    {
      std::ostringstream os;
      os << "dnwr alpha=" << problem_.alpha << " sigma=" << problem_.sigma
         << " mesh=" << mesh_kind_name(mesh_.kind) << " nt=" << mesh_.intervals()
         << " dx=" << dx_ << " h=(" << part_.length(0) << "," << part_.length(1) << ") kappa=("
         << part_.kappas[0] << "," << part_.kappas[1] << ") theta=" << theta << " phi=" << phi
         << " tol=" << tol;
      rep.config_echo = os.str();
    }
    res.left = std::move(X1);
    res.right = std::move(X2);
    res.trace = TraceSet<Scalar>{std::move(Pi)};
    return res;
  }

 private:
  Partition<Scalar> part_;
  Scalar dx_;
  TimeMesh<Scalar> mesh_;
  CoupledOperator<Scalar> op_;
  ControlProblem<Scalar> problem_;
  MonodomainResult<Scalar> reference_;
  Eigen::Index iface_ = 0;
  std::unique_ptr<Subdomain<Scalar>> dsub_, nsub_;
};

template <class Scalar>
DnwrResult<Scalar> run_dnwr(const ControlProblem<Scalar>& problem, const Partition<Scalar>& part,
                            Scalar theta, Scalar phi, Scalar dx, const TimeMesh<Scalar>& mesh,
                            Scalar tol, int max_iter,
                            const std::optional<TraceSet<Scalar>>& init_trace = std::nullopt) {
  DnwrEngine<Scalar> engine(problem, part, dx, mesh);
  return engine.iterate(theta, phi, tol, max_iter, init_trace);
}

template <class Scalar = double>
struct ThetaSweepRow {
  Scalar theta = Scalar(0);
  Scalar theta2 = Scalar(0);  // second interface weight (NNWR tensor sweeps)
  Scalar error = Scalar(0);
  bool diverged = false;
};

template <class Scalar = double>
struct ThetaSweepTable {
  std::vector<ThetaSweepRow<Scalar>> rows;
  Scalar argmin = Scalar(0);
  Scalar argmin2 = Scalar(0);
};

// Error after a fixed number of DNWR iterations for each theta (= phi) on the
// grid, all from the shared deterministic initial trace. Grid points run
// concurrently against one factorization.
template <class Scalar>
ThetaSweepTable<Scalar> sweep_theta_dnwr(const ControlProblem<Scalar>& problem,
                                         const Partition<Scalar>& part,
                                         const std::vector<Scalar>& theta_grid, Scalar dx,
                                         const TimeMesh<Scalar>& mesh, int fixed_iterations,
                                         unsigned threads = 0) {
  for (Scalar th : theta_grid)
    if (!(th > Scalar(0)) || th >= Scalar(1))
      throw std::invalid_argument("sweep_theta_dnwr: grid values must lie in (0, 1)");
  DnwrEngine<Scalar> engine(problem, part, dx, mesh);
  ThetaSweepTable<Scalar> table;
  table.rows.resize(theta_grid.size());
  detail::parallel_for(theta_grid.size(), threads, [&](std::size_t i) {
    const auto r = engine.iterate(theta_grid[i], theta_grid[i], Scalar(0), fixed_iterations);
    table.rows[i] = {theta_grid[i], Scalar(0), r.report.final_error(), r.report.diverged};
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].error < table.rows[best].error) best = i;
  if (!table.rows.empty()) table.argmin = table.rows[best].theta;
  return table;
}

}  // namespace wrc
