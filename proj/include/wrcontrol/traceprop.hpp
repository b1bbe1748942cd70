#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "wrcontrol/hyperbolic.hpp"
#include "wrcontrol/partition.hpp"
#include "wrcontrol/spectral.hpp"
#include "wrcontrol/subdomain.hpp"

namespace wrc {

namespace detail {

// P diag(w) P^{-1} applied to a stacked real trace; the imaginary residue is
// discarded (it is at rounding level for conjugate-closed spectra).
template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> apply_weighted(
    const SpectralData<Scalar>& sd, const std::vector<std::complex<Scalar>>& weights,
    const Eigen::Vector<Scalar, Eigen::Dynamic>& v) {
  ComplexVector<Scalar> c = sd.eigvec_inv * v.template cast<std::complex<Scalar>>();
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= weights[static_cast<std::size_t>(i)];
  return (sd.eigvec * c).real();
}

}  // namespace detail

// One analytic DNWR update on the error trace:
//   Pi' = -diag(theta I, phi I) sqrt(k1/k2) P tanh(b sqrt(L)) coth(a sqrt(L)) P^{-1} Pi
//         + diag((1-theta) I, (1-phi) I) Pi
// with a, b the diffusion-scaled subdomain lengths.
template <class Scalar>
TraceSet<Scalar> dnwr_trace_step(const SpectralData<Scalar>& sd, Scalar a, Scalar b, Scalar kappa1,
                                 Scalar kappa2, Scalar theta, Scalar phi,
                                 const TraceSet<Scalar>& Pi) {
  if (!(theta > Scalar(0)) || theta >= Scalar(1) || !(phi > Scalar(0)) || phi >= Scalar(1))
    throw std::invalid_argument("dnwr_trace_step: relaxation weights must lie in (0, 1)");
  if (!(a > Scalar(0)) || !(b > Scalar(0)))
    throw std::invalid_argument("dnwr_trace_step: scaled lengths must be positive");
  if (Pi.pi.size() != sd.eigenvalues.size())
    throw std::invalid_argument("dnwr_trace_step: trace length must match the spectrum");

  const auto roots = spectrum_roots(sd);
  std::vector<std::complex<Scalar>> w(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i)
    w[i] = tanh_stable(b * roots[i]) * coth_stable(a * roots[i]);

  const Eigen::Vector<Scalar, Eigen::Dynamic> propagated = detail::apply_weighted(sd, w, Pi.pi);
  const Scalar ratio = std::sqrt(kappa1 / kappa2);
  TraceSet<Scalar> out{Eigen::Vector<Scalar, Eigen::Dynamic>(Pi.pi.size())};
  const Eigen::Index nb = Pi.block();
  out.pi.head(nb) = -theta * ratio * propagated.head(nb) + (Scalar(1) - theta) * Pi.omega();
  out.pi.tail(nb) = -phi * ratio * propagated.tail(nb) + (Scalar(1) - phi) * Pi.upsilon();
  return out;
}

namespace detail {

// Interface-coupling matrices of the analytic NNWR sweep at one spectral root.
// Bg maps interface traces to flux jumps of the Dirichlet sweep; Bn maps those
// jumps to the summed Neumann-correction traces. Both are tridiagonal; the
// sqrt(lambda) factors cancel in the product Bn * Bg.
template <class Scalar>
DenseComplexMatrix<Scalar> nnwr_interface_matrix(const Partition<Scalar>& part,
                                                 std::complex<Scalar> z) {
  using C = std::complex<Scalar>;
  const Eigen::Index N = part.count();
  const Eigen::Index K = N - 1;
  std::vector<C> co(static_cast<std::size_t>(N)), cs(static_cast<std::size_t>(N)),
      ta(static_cast<std::size_t>(N));
  std::vector<Scalar> sk(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    const C hz = part.scaled_length(i) * z;
    co[static_cast<std::size_t>(i)] = coth_stable(hz);
    ta[static_cast<std::size_t>(i)] = tanh_stable(hz);
    const auto s = sinh_scaled(hz);
    // cosech underflows to 0 for huge arguments, the correct limit here
    cs[static_cast<std::size_t>(i)] =
        s.is_zero() ? C(0) : std::exp(-s.logmag) * C(std::cos(-s.arg), std::sin(-s.arg));
    sk[static_cast<std::size_t>(i)] = std::sqrt(part.kappas[i]);
  }

  DenseComplexMatrix<Scalar> Bg = DenseComplexMatrix<Scalar>::Zero(K, K);
  DenseComplexMatrix<Scalar> Bn = DenseComplexMatrix<Scalar>::Zero(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    const auto il = static_cast<std::size_t>(i);      // subdomain left of interface i
    const auto ir = static_cast<std::size_t>(i + 1);  // subdomain right of interface i
    // flux of the Dirichlet sweep, outward-normal jump at interface i
    Bg(i, i) += sk[il] * co[il];
    if (i > 0) Bg(i, i - 1) -= sk[il] * cs[il];
    Bg(i, i) += sk[ir] * co[ir];
    if (i < K - 1) Bg(i, i + 1) -= sk[ir] * cs[ir];
    // trace sum of the Neumann corrections at interface i
    if (i == 0)
      Bn(i, i) += ta[il] / sk[il];
    else {
      Bn(i, i) += co[il] / sk[il];
      Bn(i, i - 1) += cs[il] / sk[il];
    }
    if (i == K - 1)
      Bn(i, i) += ta[ir] / sk[ir];
    else {
      Bn(i, i) += co[ir] / sk[ir];
      Bn(i, i + 1) += cs[ir] / sk[ir];
    }
  }
  return Bn * Bg;
}

}  // namespace detail

// One analytic NNWR update on all interface error traces: Dirichlet sweep,
// flux jumps, Neumann corrections, relaxed subtraction, evaluated per
// eigenvalue through the decomposition.
template <class Scalar>
std::vector<TraceSet<Scalar>> nnwr_trace_step(const SpectralData<Scalar>& sd,
                                              const Partition<Scalar>& part,
                                              const std::vector<Scalar>& thetas,
                                              const std::vector<Scalar>& phis,
                                              const std::vector<TraceSet<Scalar>>& Pis) {
  const Eigen::Index N = part.count();
  if (N < 2) throw std::invalid_argument("nnwr_trace_step: need at least 2 subdomains");
  const std::size_t K = static_cast<std::size_t>(N - 1);
  if (Pis.size() != K || thetas.size() != K || phis.size() != K)
    throw std::invalid_argument("nnwr_trace_step: need one trace and weight pair per interface");
  const Eigen::Index B = sd.eigenvalues.size();
  for (const auto& tr : Pis)
    if (tr.pi.size() != B)
      throw std::invalid_argument("nnwr_trace_step: trace length must match the spectrum");

  const auto roots = spectrum_roots(sd);

  // spectral coefficients per interface
  std::vector<ComplexVector<Scalar>> coef(K);
  for (std::size_t i = 0; i < K; ++i)
    coef[i] = sd.eigvec_inv * Pis[i].pi.template cast<std::complex<Scalar>>();

  // per eigenvalue, couple the interfaces; then return to physical time
  std::vector<ComplexVector<Scalar>> mixed(K, ComplexVector<Scalar>::Zero(B));
  for (Eigen::Index m = 0; m < B; ++m) {
    const auto G = detail::nnwr_interface_matrix(part, roots[static_cast<std::size_t>(m)]);
    for (std::size_t i = 0; i < K; ++i) {
      std::complex<Scalar> acc(0);
      for (std::size_t j = 0; j < K; ++j)
        acc += G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * coef[j][m];
      mixed[i][m] = acc;
    }
  }

  std::vector<TraceSet<Scalar>> out(K);
  const Eigen::Index nb = B / 2;
  for (std::size_t i = 0; i < K; ++i) {
    const Eigen::Vector<Scalar, Eigen::Dynamic> corr = (sd.eigvec * mixed[i]).real();
    out[i].pi.resize(B);
    out[i].pi.head(nb) = Pis[i].omega() - thetas[i] * corr.head(nb);
    out[i].pi.tail(nb) = Pis[i].upsilon() - phis[i] * corr.tail(nb);
  }
  return out;
}

}  // namespace wrc
