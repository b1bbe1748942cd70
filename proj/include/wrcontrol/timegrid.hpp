#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wrc {

enum class MeshKind { uniform, one_sided_graded, both_sided_graded };

inline const char* mesh_kind_name(MeshKind k) {
  switch (k) {
    case MeshKind::uniform: return "uniform";
    case MeshKind::one_sided_graded: return "one_sided_graded";
    case MeshKind::both_sided_graded: return "both_sided_graded";
  }
  return "?";
}

inline MeshKind mesh_kind_from(const std::string& s) {
  if (s == "uniform") return MeshKind::uniform;
  if (s == "one_sided_graded" || s == "one_sided") return MeshKind::one_sided_graded;
  if (s == "both_sided_graded" || s == "both_sided") return MeshKind::both_sided_graded;
  throw std::invalid_argument("unknown mesh kind: " + s);
}

// Time nodes t_0 .. t_{n+1} on [0, T] with n interior nodes.
template <class Scalar = double>
struct TimeMesh {
  MeshKind kind = MeshKind::uniform;
  Scalar alpha = Scalar(1);  // fractional order in (0,1]
  Scalar horizon = Scalar(1);
  Eigen::Index n = 0;  // interior node count
  Eigen::Vector<Scalar, Eigen::Dynamic> nodes;

  Eigen::Index intervals() const { return n + 1; }
};

// Graded nodes cluster where the solution has weak singularities: at t=0 for
// one-sided grading, at both ends for both-sided grading (which needs odd n so
// that t_{(n+1)/2} = T/2 is a node). The grading exponent (2-alpha)/alpha
// equals 1 at alpha=1, so graded kinds degenerate to the uniform spacing.
template <class Scalar>
TimeMesh<Scalar> build_mesh(MeshKind kind, Scalar alpha, Scalar horizon, Eigen::Index n) {
  if (!(alpha > Scalar(0)) || alpha > Scalar(1))
    throw std::invalid_argument("build_mesh: alpha must lie in (0,1]");
  if (!(horizon > Scalar(0)))
    throw std::invalid_argument("build_mesh: horizon must be positive");
  if (n < 1) throw std::invalid_argument("build_mesh: need n >= 1");
  if (kind == MeshKind::both_sided_graded && n % 2 == 0)
    throw std::invalid_argument("build_mesh: both-sided grading needs odd n");

  TimeMesh<Scalar> m;
  m.kind = kind;
  m.alpha = alpha;
  m.horizon = horizon;
  m.n = n;
  m.nodes.resize(n + 2);

  const Scalar r = (Scalar(2) - alpha) / alpha;
  switch (kind) {
    case MeshKind::uniform:
      m.nodes = Eigen::Vector<Scalar, Eigen::Dynamic>::LinSpaced(n + 2, Scalar(0), horizon);
      break;
    case MeshKind::one_sided_graded:
      for (Eigen::Index j = 0; j <= n + 1; ++j)
        m.nodes[j] = std::pow(Scalar(j) / Scalar(n + 1), r) * horizon;
      break;
    case MeshKind::both_sided_graded: {
      const Eigen::Index half = (n + 1) / 2;
      for (Eigen::Index j = 0; j <= half; ++j) {
        m.nodes[j] = std::pow(Scalar(j) / Scalar(half), r) * (horizon / Scalar(2));
        m.nodes[n + 1 - j] = horizon - m.nodes[j];
      }
      break;
    }
  }
  m.nodes[0] = Scalar(0);
  m.nodes[n + 1] = horizon;
  return m;
}

// t'_j = T - t_{n+1-j}. Node-wise identity for uniform and both-sided kinds;
// for one-sided grading it moves the cluster to the far end (the stencil of
// the reversed-time operator).
template <class Scalar>
TimeMesh<Scalar> reflect_mesh(const TimeMesh<Scalar>& m) {
  TimeMesh<Scalar> out = m;
  out.nodes = (m.horizon - m.nodes.reverse().array()).matrix().eval();
  out.nodes[0] = Scalar(0);
  out.nodes[m.n + 1] = m.horizon;
  return out;
}

}  // namespace wrc
