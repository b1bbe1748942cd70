#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace wrc {

// Non-overlapping decomposition of a 1D interval with one diffusion
// coefficient per subdomain.
template <class Scalar = double>
struct Partition {
  Eigen::Vector<Scalar, Eigen::Dynamic> breakpoints;  // x_0 < x_1 < ... < x_N
  Eigen::Vector<Scalar, Eigen::Dynamic> kappas;       // kappa_1..kappa_N > 0

  Eigen::Index count() const { return kappas.size(); }
  Scalar length(Eigen::Index i) const { return breakpoints[i + 1] - breakpoints[i]; }
  // Diffusion-scaled length a_i / sqrt(kappa_i); the minimum drives the bounds.
  Scalar scaled_length(Eigen::Index i) const { return length(i) / std::sqrt(kappas[i]); }
  Scalar min_scaled_length() const {
    Scalar h = scaled_length(0);
    for (Eigen::Index i = 1; i < count(); ++i) h = std::min(h, scaled_length(i));
    return h;
  }
  Scalar left() const { return breakpoints[0]; }
  Scalar right() const { return breakpoints[breakpoints.size() - 1]; }
};

template <class Scalar>
Partition<Scalar> make_partition(Eigen::Vector<Scalar, Eigen::Dynamic> breakpoints,
                                 Eigen::Vector<Scalar, Eigen::Dynamic> kappas) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("make_partition: need at least 2 breakpoints");
  if (kappas.size() != breakpoints.size() - 1)
    throw std::invalid_argument("make_partition: need one kappa per subdomain");
  for (Eigen::Index i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw std::invalid_argument("make_partition: breakpoints must be strictly increasing");
  for (Eigen::Index i = 0; i < kappas.size(); ++i)
    if (!(kappas[i] > Scalar(0)))
      throw std::invalid_argument("make_partition: kappas must be positive");
  return Partition<Scalar>{std::move(breakpoints), std::move(kappas)};
}

template <class Scalar>
Partition<Scalar> make_partition(const std::vector<Scalar>& breakpoints,
                                 const std::vector<Scalar>& kappas) {
  using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
  Vec bp = Eigen::Map<const Vec>(breakpoints.data(), static_cast<Eigen::Index>(breakpoints.size()));
  Vec ks = Eigen::Map<const Vec>(kappas.data(), static_cast<Eigen::Index>(kappas.size()));
  return make_partition(std::move(bp), std::move(ks));
}

template <class Scalar>
Partition<Scalar> uniform_partition(Scalar x_left, Scalar x_right, Eigen::Index n_sub,
                                    Scalar kappa = Scalar(1)) {
  Eigen::Vector<Scalar, Eigen::Dynamic> bp =
      Eigen::Vector<Scalar, Eigen::Dynamic>::LinSpaced(n_sub + 1, x_left, x_right);
  Eigen::Vector<Scalar, Eigen::Dynamic> ks =
      Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(n_sub, kappa);
  return make_partition(std::move(bp), std::move(ks));
}

}  // namespace wrc
