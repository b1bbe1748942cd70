#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "wrcontrol/hyperbolic.hpp"
#include "wrcontrol/iterreport.hpp"
#include "wrcontrol/partition.hpp"
#include "wrcontrol/spectral.hpp"

namespace wrc {

enum class Algorithm { dnwr, nnwr };

// Relaxation weights that balance the interface recursion: DNWR takes a
// single weight from the diffusivity contrast, NNWR one weight per interface.
template <class Scalar>
std::vector<Scalar> optimal_relaxation(const std::vector<Scalar>& kappas, Algorithm alg) {
  for (Scalar k : kappas)
    if (!(k > Scalar(0)))
      throw std::invalid_argument("optimal_relaxation: diffusivities must be positive");
  if (alg == Algorithm::dnwr) {
    if (kappas.size() != 2)
      throw std::invalid_argument("optimal_relaxation: dnwr needs exactly 2 diffusivities");
    return {Scalar(1) / (Scalar(1) + std::sqrt(kappas[0] / kappas[1]))};
  }
  if (kappas.size() < 2)
    throw std::invalid_argument("optimal_relaxation: nnwr needs at least 2 diffusivities");
  std::vector<Scalar> out;
  out.reserve(kappas.size() - 1);
  for (std::size_t i = 0; i + 1 < kappas.size(); ++i) {
    const Scalar r = std::sqrt(kappas[i] / kappas[i + 1]);
    out.push_back(Scalar(1) / (Scalar(2) + r + Scalar(1) / r));
  }
  return out;
}

template <class Scalar>
std::vector<Scalar> optimal_relaxation(const Eigen::Vector<Scalar, Eigen::Dynamic>& kappas,
                                       Algorithm alg) {
  return optimal_relaxation(std::vector<Scalar>(kappas.begin(), kappas.end()), alg);
}

// Largest modulus over the spectrum of the one-shot DNWR error symbol at
// theta = theta_opt. Values above 1 predict divergence of the iteration.
template <class Scalar>
Scalar convergence_factor_rho(const SpectralData<Scalar>& sd, Scalar a, Scalar b, Scalar kappa1,
                              Scalar kappa2) {
  if (!(a > Scalar(0)) || !(b > Scalar(0)))
    throw std::invalid_argument("convergence_factor_rho: lengths must be positive");
  if (!(kappa1 > Scalar(0)) || !(kappa2 > Scalar(0)))
    throw std::invalid_argument("convergence_factor_rho: diffusivities must be positive");
  const Scalar pref = std::sqrt(kappa1) / (std::sqrt(kappa1) + std::sqrt(kappa2));
  Scalar worst = Scalar(0);
  for (const auto& z : spectrum_roots(sd)) {
    const auto r =
        stable_ratio(RatioKind::sinh_over_sinh_cosh, std::array<Scalar, 3>{a, b, Scalar(0)}, z);
    if (!r.is_zero()) worst = std::max(worst, std::exp(r.logmag));
  }
  return pref * worst;
}

template <class Scalar = double>
struct BoundCurve {
  std::vector<Scalar> values;  // bound at iteration k = 0, 1, ...
  Scalar lambda = Scalar(0);   // smallest real part over the spectrum
  Scalar cond_inf = Scalar(0);
  Scalar factor = Scalar(0);  // per-iteration contraction multiplier
  std::vector<Scalar> d;      // interface jump coefficients (multi-subdomain only)
  Scalar dbar = Scalar(0);
  Scalar h = Scalar(0);  // smallest scaled subdomain length
};

// Geometric envelope for the DNWR interface error: the slowest spectral mode
// sets the contraction factor, the eigenvector conditioning the level.
template <class Scalar>
BoundCurve<Scalar> dnwr_error_bound(const SpectralData<Scalar>& sd, Scalar a, Scalar b,
                                    Scalar kappa1, Scalar kappa2, int iterations, Scalar init) {
  if (!(a > Scalar(0)) || !(b > Scalar(0)))
    throw std::invalid_argument("dnwr_error_bound: lengths must be positive");
  if (!(kappa1 > Scalar(0)) || !(kappa2 > Scalar(0)))
    throw std::invalid_argument("dnwr_error_bound: diffusivities must be positive");
  if (iterations < 0) throw std::invalid_argument("dnwr_error_bound: iterations < 0");
  BoundCurve<Scalar> curve;
  curve.lambda = lambda_min(sd);  // already on the square-root scale
  curve.cond_inf = sd.cond_inf;
  const std::complex<Scalar> root(curve.lambda, Scalar(0));
  const auto ratio = stable_ratio(RatioKind::coth_coth_minus_one,
                                  std::array<Scalar, 3>{a, b, Scalar(0)}, root);
  curve.factor =
      std::sqrt(kappa1) / (std::sqrt(kappa1) + std::sqrt(kappa2)) * ratio.value().real();
  curve.values.reserve(static_cast<std::size_t>(iterations) + 1);
  Scalar v = curve.cond_inf * init;
  curve.values.push_back(v);
  for (int k = 1; k <= iterations; ++k) {
    v *= curve.factor;
    curve.values.push_back(v);
  }
  return curve;
}

// Interface jump coefficients for the NNWR envelope. Interface i sits between
// subdomains i and i+1 (1-based); interior interfaces collect contrast ratios
// from both neighbor pairs, the outermost interfaces drop the absent side.
template <class Scalar>
std::vector<Scalar> nnwr_jump_coefficients(const std::vector<Scalar>& kappas) {
  const std::size_t N = kappas.size();
  if (N < 2)
    throw std::invalid_argument("nnwr_jump_coefficients: need at least 2 diffusivities");
  std::vector<Scalar> d(N - 1);
  for (std::size_t i = 1; i < N; ++i) {
    Scalar s = std::sqrt(kappas[i - 1] / kappas[i]) + std::sqrt(kappas[i] / kappas[i - 1]);
    if (i + 1 < N) s += std::sqrt(kappas[i + 1] / kappas[i]);
    if (i > 1) s += std::sqrt(kappas[i - 2] / kappas[i - 1]);
    d[i - 1] = s / Scalar(2);
  }
  return d;
}

template <class Scalar>
std::vector<Scalar> nnwr_jump_coefficients(const Eigen::Vector<Scalar, Eigen::Dynamic>& kappas) {
  return nnwr_jump_coefficients(std::vector<Scalar>(kappas.begin(), kappas.end()));
}

// Geometric envelope for the NNWR maximal interface error.
template <class Scalar>
BoundCurve<Scalar> nnwr_error_bound(const SpectralData<Scalar>& sd,
                                    const Partition<Scalar>& part, int iterations, Scalar init) {
  if (iterations < 0) throw std::invalid_argument("nnwr_error_bound: iterations < 0");
  BoundCurve<Scalar> curve;
  curve.lambda = lambda_min(sd);
  curve.cond_inf = sd.cond_inf;
  curve.d = nnwr_jump_coefficients(part.kappas);
  const auto thetas = optimal_relaxation(part.kappas, Algorithm::nnwr);
  for (std::size_t i = 0; i < curve.d.size(); ++i)
    curve.dbar = std::max(curve.dbar, thetas[i] * curve.d[i]);
  curve.h = part.min_scaled_length();
  const std::complex<Scalar> root(curve.lambda, Scalar(0));
  const auto ratio = stable_ratio(
      RatioKind::cosech_cosech,
      std::array<Scalar, 3>{curve.h / Scalar(2), curve.h / Scalar(2), Scalar(0)}, root);
  curve.factor = curve.dbar * ratio.value().real();
  curve.values.reserve(static_cast<std::size_t>(iterations) + 1);
  Scalar v = curve.cond_inf * init;
  curve.values.push_back(v);
  for (int k = 1; k <= iterations; ++k) {
    v *= curve.factor;
    curve.values.push_back(v);
  }
  return curve;
}

template <class Scalar = double>
struct RateEstimate {
  Scalar rate = Scalar(0);
  bool flagged = false;
};

// Observed contraction rate of a finished run: geometric mean of the last
// error ratios, zeroed and flagged when the iteration terminated finitely.
template <class Scalar>
RateEstimate<Scalar> estimate_numerical_rate(const IterationReport<Scalar>& report) {
  RateEstimate<Scalar> est;
  est.rate = rate_from_errors(report.errors, &est.flagged);
  return est;
}

}  // namespace wrc
