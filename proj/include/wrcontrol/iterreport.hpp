#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace wrc {

// Measured asymptotic rate: geometric mean of the last three error ratios.
// Finite termination (a ratio collapsing by more than six decades) reports 0;
// histories too short to average are flagged best-effort.
template <class Scalar>
Scalar rate_from_errors(const std::vector<Scalar>& errors, bool* flagged = nullptr) {
  if (flagged) *flagged = false;
  if (errors.size() < 2) {
    if (flagged) *flagged = true;
    return Scalar(0);
  }
  const std::size_t navail = errors.size() - 1;
  const std::size_t use = navail < 3 ? navail : 3;
  if (navail < 3 && flagged) *flagged = true;
  Scalar logsum = Scalar(0);
  for (std::size_t k = errors.size() - use; k < errors.size(); ++k) {
    const Scalar prev = errors[k - 1];
    const Scalar cur = errors[k];
    if (!(prev > Scalar(0)) || !(cur > Scalar(0)) || cur < Scalar(1e-6) * prev) {
      if (flagged) *flagged = true;
      return Scalar(0);
    }
    logsum += std::log(cur / prev);
  }
  return std::exp(logsum / Scalar(use));
}

template <class Scalar = double>
struct IterationReport {
  std::vector<Scalar> errors;  // errors[k]: interface error of the k-th iterate (k = 0 initial)
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  Scalar rate = Scalar(0);
  bool rate_flagged = false;
  int divergent_interface = -1;  // NNWR: first interface crossing the growth guard
  std::string config_echo;

  Scalar final_error() const { return errors.empty() ? Scalar(0) : errors.back(); }
};

}  // namespace wrc
