#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wrc {

// Complex value held as exp(logmag) * exp(i*arg). Hyperbolic factors of the
// operator eigenvalues have |argument| up to ~1e5, far past the ~709 overflow
// of a naive cosh; splitting off the exponent keeps every intermediate
// representable while ratios of such factors are O(1).
template <class Scalar = double>
struct ScaledComplex {
  Scalar logmag = -std::numeric_limits<Scalar>::infinity();  // -inf encodes 0
  Scalar arg = Scalar(0);

  static ScaledComplex from(std::complex<Scalar> v) {
    if (v == std::complex<Scalar>(0)) return {};
    return {std::log(std::abs(v)), std::arg(v)};
  }
  static ScaledComplex exp_of(std::complex<Scalar> z) { return {z.real(), z.imag()}; }

  bool is_zero() const { return logmag == -std::numeric_limits<Scalar>::infinity(); }
  Scalar log_abs() const { return logmag; }

  // May underflow to 0 or overflow to inf; callers that care use log_abs().
  std::complex<Scalar> value() const {
    if (is_zero()) return {};
    return std::exp(logmag) * std::complex<Scalar>(std::cos(arg), std::sin(arg));
  }

  friend ScaledComplex operator*(ScaledComplex a, ScaledComplex b) {
    if (a.is_zero() || b.is_zero()) return {};
    return {a.logmag + b.logmag, a.arg + b.arg};
  }
  friend ScaledComplex operator/(ScaledComplex a, ScaledComplex b) {
    if (b.is_zero()) throw std::domain_error("ScaledComplex: division by zero");
    if (a.is_zero()) return {};
    return {a.logmag - b.logmag, a.arg - b.arg};
  }
  friend ScaledComplex operator*(ScaledComplex a, std::complex<Scalar> c) { return a * from(c); }
  friend ScaledComplex operator*(std::complex<Scalar> c, ScaledComplex a) { return a * from(c); }

  // a + b evaluated as a*(1 + b/a) around the larger magnitude.
  friend ScaledComplex operator+(ScaledComplex a, ScaledComplex b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (b.logmag > a.logmag) std::swap(a, b);
    const std::complex<Scalar> r =
        std::exp(b.logmag - a.logmag) * std::complex<Scalar>(std::cos(b.arg - a.arg), std::sin(b.arg - a.arg));
    return a * from(std::complex<Scalar>(1) + r);
  }
  friend ScaledComplex operator-(ScaledComplex a, ScaledComplex b) {
    if (b.is_zero()) return a;
    return a + ScaledComplex{b.logmag, b.arg + Scalar(M_PI)};
  }

  ScaledComplex pow_int(int k) const {
    if (is_zero()) return k == 0 ? from(std::complex<Scalar>(1)) : ScaledComplex{};
    return {logmag * Scalar(k), arg * Scalar(k)};
  }
};

// sinh, cosh, tanh, coth of z with Re z >= 0, via w = exp(-2z) (|w| <= 1):
//   sinh z = e^z (1 - w)/2,  cosh z = e^z (1 + w)/2.
template <class Scalar>
ScaledComplex<Scalar> sinh_scaled(std::complex<Scalar> z) {
  if (z.real() < Scalar(0)) throw std::domain_error("sinh_scaled: need Re z >= 0");
  const std::complex<Scalar> w = std::exp(Scalar(-2) * z);
  return ScaledComplex<Scalar>::exp_of(z) * ((std::complex<Scalar>(1) - w) / Scalar(2));
}

template <class Scalar>
ScaledComplex<Scalar> cosh_scaled(std::complex<Scalar> z) {
  if (z.real() < Scalar(0)) throw std::domain_error("cosh_scaled: need Re z >= 0");
  const std::complex<Scalar> w = std::exp(Scalar(-2) * z);
  return ScaledComplex<Scalar>::exp_of(z) * ((std::complex<Scalar>(1) + w) / Scalar(2));
}

template <class Scalar>
std::complex<Scalar> tanh_stable(std::complex<Scalar> z) {
  const std::complex<Scalar> w = std::exp(Scalar(-2) * z);
  return (std::complex<Scalar>(1) - w) / (std::complex<Scalar>(1) + w);
}

template <class Scalar>
std::complex<Scalar> coth_stable(std::complex<Scalar> z) {
  const std::complex<Scalar> w = std::exp(Scalar(-2) * z);
  return (std::complex<Scalar>(1) + w) / (std::complex<Scalar>(1) - w);
}

enum class RatioKind {
  sinh_over_sinh_cosh,   // sinh((b-a)z) / (sinh(az) cosh(bz));     lengths {a, b}
  coth_coth_minus_one,   // coth(az) coth(bz) - 1;                  lengths {a, b}
  cosech_cosech,         // cosech(az) cosech(bz);                  lengths {a, b}
  cosech_coth_pair       // cosech(l0 z)(r1 coth(l1 z)+r2 coth(l2 z)); lengths {l0, l1, l2}
};

// Ratios of hyperbolic factors evaluated through exp(-2*length*z) building
// blocks, so the leading exponentials cancel analytically instead of
// overflowing. Valid for Re z > 0; every length must be positive.
template <class Scalar>
ScaledComplex<Scalar> stable_ratio(RatioKind kind, const std::array<Scalar, 3>& len,
                                   std::complex<Scalar> z, Scalar r1 = Scalar(1),
                                   Scalar r2 = Scalar(1)) {
  using C = std::complex<Scalar>;
  using SC = ScaledComplex<Scalar>;
  if (!(z.real() > Scalar(0))) throw std::domain_error("stable_ratio: need Re z > 0");
  const C one(1);
  switch (kind) {
    case RatioKind::sinh_over_sinh_cosh: {
      const Scalar a = len[0], b = len[1];
      if (!(a > Scalar(0)) || !(b > Scalar(0))) throw std::domain_error("stable_ratio: lengths must be positive");
      // 2(e^{-2az} - e^{-2bz}) / ((1-e^{-2az})(1+e^{-2bz})), leading factor split off
      const Scalar mn = std::min(a, b);
      const C ea = std::exp(Scalar(-2) * a * z), eb = std::exp(Scalar(-2) * b * z);
      const C diff = one - std::exp(Scalar(-2) * std::abs(b - a) * z);  // 0 at a == b
      const Scalar sign = (b >= a) ? Scalar(1) : Scalar(-1);
      return SC::exp_of(Scalar(-2) * mn * z) *
             (sign * Scalar(2) * diff / ((one - ea) * (one + eb)));
    }
    case RatioKind::coth_coth_minus_one: {
      const Scalar a = len[0], b = len[1];
      if (!(a > Scalar(0)) || !(b > Scalar(0))) throw std::domain_error("stable_ratio: lengths must be positive");
      // 2(e^{-2az} + e^{-2bz}) / ((1-e^{-2az})(1-e^{-2bz}))
      const Scalar mn = std::min(a, b);
      const C ea = std::exp(Scalar(-2) * a * z), eb = std::exp(Scalar(-2) * b * z);
      const C sum = one + std::exp(Scalar(-2) * std::abs(b - a) * z);
      return SC::exp_of(Scalar(-2) * mn * z) * (Scalar(2) * sum / ((one - ea) * (one - eb)));
    }
    case RatioKind::cosech_cosech: {
      const Scalar a = len[0], b = len[1];
      if (!(a > Scalar(0)) || !(b > Scalar(0))) throw std::domain_error("stable_ratio: lengths must be positive");
      const C ea = std::exp(Scalar(-2) * a * z), eb = std::exp(Scalar(-2) * b * z);
      return SC::exp_of(-(a + b) * z) * (Scalar(4) / ((one - ea) * (one - eb)));
    }
    case RatioKind::cosech_coth_pair: {
      const Scalar l0 = len[0], l1 = len[1], l2 = len[2];
      if (!(l0 > Scalar(0)) || !(l1 > Scalar(0)) || !(l2 > Scalar(0)))
        throw std::domain_error("stable_ratio: lengths must be positive");
      const C e0 = std::exp(Scalar(-2) * l0 * z);
      const C combo = r1 * coth_stable(l1 * z) + r2 * coth_stable(l2 * z);
      return SC::exp_of(-l0 * z) * (Scalar(2) * combo / (one - e0));
    }
  }
  throw std::logic_error("stable_ratio: unknown kind");
}

// Per-subdomain, per-eigenvalue sinh/cosh factors sigma_i = sinh(h_i z),
// gamma_i = cosh(h_i z) with h_i the kappa-scaled length and z a principal
// eigenvalue root, kept in scaled form.
template <class Scalar = double>
struct HyperbolicFactors {
  std::vector<Scalar> scaled_lengths;            // h_i
  std::vector<std::complex<Scalar>> roots;       // z_m, Re > 0
  std::vector<std::vector<ScaledComplex<Scalar>>> sinh_f;  // [i][m]
  std::vector<std::vector<ScaledComplex<Scalar>>> cosh_f;  // [i][m]

  // |gamma^2 - sigma^2 - 1| relative to |gamma|^2, evaluated in scaled form.
  Scalar identity_residual(std::size_t i, std::size_t m) const {
    const auto g2 = cosh_f[i][m] * cosh_f[i][m];
    const auto s2 = sinh_f[i][m] * sinh_f[i][m];
    const auto d = g2 - s2;
    const auto one = ScaledComplex<Scalar>::from(std::complex<Scalar>(1));
    const auto err = d - one;
    if (err.is_zero()) return Scalar(0);
    return std::exp(err.logmag - std::max(g2.logmag, Scalar(0)));
  }
};

template <class Scalar>
HyperbolicFactors<Scalar> hyperbolic_factors(const std::vector<Scalar>& scaled_lengths,
                                             const std::vector<std::complex<Scalar>>& roots) {
  HyperbolicFactors<Scalar> hf;
  hf.scaled_lengths = scaled_lengths;
  hf.roots = roots;
  hf.sinh_f.resize(scaled_lengths.size());
  hf.cosh_f.resize(scaled_lengths.size());
  for (std::size_t i = 0; i < scaled_lengths.size(); ++i) {
    hf.sinh_f[i].reserve(roots.size());
    hf.cosh_f[i].reserve(roots.size());
    for (const auto& z : roots) {
      hf.sinh_f[i].push_back(sinh_scaled(scaled_lengths[i] * z));
      hf.cosh_f[i].push_back(cosh_scaled(scaled_lengths[i] * z));
    }
  }
  return hf;
}

}  // namespace wrc
