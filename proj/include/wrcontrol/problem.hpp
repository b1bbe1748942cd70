#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "wrcontrol/partition.hpp"
#include "wrcontrol/timegrid.hpp"

namespace wrc {

// Built-in target state: (1+t) sin(pi x) (e^{-8(x-1)^2} + e^{-8(x+1)^2} - e^{-8} - e^{-72}).
template <class Scalar>
Scalar target_yq(Scalar x, Scalar t) {
  const Scalar pi = Scalar(3.141592653589793238462643383279502884L);
  return (Scalar(1) + t) * std::sin(pi * x) *
         (std::exp(Scalar(-8) * (x - 1) * (x - 1)) + std::exp(Scalar(-8) * (x + 1) * (x + 1)) -
          std::exp(Scalar(-8)) - std::exp(Scalar(-72)));
}

// Distributed control of a subdiffusion equation on an interval: minimize
// J = 1/2 ||y - y_Q||^2 + sigma/2 ||u||^2 subject to the state equation with
// homogeneous Dirichlet boundary and zero initial data.
template <class Scalar = double>
struct ControlProblem {
  using SpaceTimeFn = std::function<Scalar(Scalar, Scalar)>;  // (x, t)

  Scalar alpha = Scalar(0.5);
  Scalar sigma = Scalar(1e-6);
  Scalar horizon = Scalar(1);
  Scalar x_left = Scalar(-1);
  Scalar x_right = Scalar(1);
  Partition<Scalar> kappa;  // piecewise-constant diffusion, defaults to 1 on the whole domain
  SpaceTimeFn target;       // y_Q, defaults to target_yq
  SpaceTimeFn forcing;      // f, defaults to 0
  SpaceTimeFn boundary;     // g, retained hook, defaults to 0
  SpaceTimeFn initial;      // y_0 as a function of x (t ignored), retained hook, defaults to 0

  Scalar yq(Scalar x, Scalar t) const { return target ? target(x, t) : target_yq(x, t); }
  Scalar f(Scalar x, Scalar t) const { return forcing ? forcing(x, t) : Scalar(0); }
};

template <class Scalar>
ControlProblem<Scalar> make_problem(Scalar alpha, Scalar sigma, Scalar horizon, Scalar x_left,
                                    Scalar x_right) {
  if (!(sigma > Scalar(0))) throw std::invalid_argument("make_problem: sigma must be positive");
  if (!(alpha > Scalar(0)) || alpha > Scalar(1))
    throw std::invalid_argument("make_problem: alpha must lie in (0, 1]");
  if (!(x_left < x_right)) throw std::invalid_argument("make_problem: need x_left < x_right");
  ControlProblem<Scalar> pb;
  pb.alpha = alpha;
  pb.sigma = sigma;
  pb.horizon = horizon;
  pb.x_left = x_left;
  pb.x_right = x_right;
  pb.kappa = uniform_partition(x_left, x_right, 1);
  return pb;
}

namespace detail {

template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> trapezoid_weights(
    const Eigen::Vector<Scalar, Eigen::Dynamic>& nodes) {
  const Eigen::Index n = nodes.size();
  Eigen::Vector<Scalar, Eigen::Dynamic> w = Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Scalar half = (nodes[i + 1] - nodes[i]) / Scalar(2);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

}  // namespace detail

// J = 1/2 ||y - y_Q||^2 + sigma/2 ||u||^2, tensor trapezoidal quadrature on the
// (possibly graded) time mesh times the uniform space grid. Field rows are time
// nodes t_0..t_{n+1} in forward order, columns are space nodes.
template <class Scalar>
Scalar evaluate_cost(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& u,
                     const ControlProblem<Scalar>& problem,
                     const Eigen::Vector<Scalar, Eigen::Dynamic>& xgrid,
                     const TimeMesh<Scalar>& mesh) {
  if (y.rows() != mesh.nodes.size() || y.cols() != xgrid.size() || u.rows() != y.rows() ||
      u.cols() != y.cols())
    throw std::invalid_argument("evaluate_cost: fields must be sampled on the given grid");
  const auto wt = detail::trapezoid_weights(mesh.nodes);
  const auto wx = detail::trapezoid_weights(xgrid);
  Scalar track = Scalar(0), control = Scalar(0);
  for (Eigen::Index m = 0; m < y.rows(); ++m) {
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      const Scalar w = wt[m] * wx[k];
      const Scalar dy = y(m, k) - problem.yq(xgrid[k], mesh.nodes[m]);
      track += w * dy * dy;
      control += w * u(m, k) * u(m, k);
    }
  }
  return track / Scalar(2) + problem.sigma * control / Scalar(2);
}

}  // namespace wrc
