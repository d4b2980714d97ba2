#pragma once

#include <functional>
#include <limits>

#include "affine_libor/types.hpp"

namespace affine_libor {

/// Right-hand sides of the generalized Riccati system
///   d/dt phi = F(psi),  d/dt psi = R(psi),  phi_0 = 0, psi_0 = u.
/// F(0) = 0 and R(0) = 0 for every admissible parameter set.
template <typename Scalar>
struct RiccatiRhs {
  std::function<Scalar(const Vec<Scalar>&)> F;
  std::function<Vec<Scalar>(const Vec<Scalar>&)> R;
  /// Componentwise supremum of the exponential-moment domain for a given
  /// remaining horizon. Empty means the domain is all of R^d.
  std::function<Vector(double)> upper_bound;
};

/// Exponential-moment domain of a process on a fixed horizon. Only the
/// upper bound matters on the state space R_{>=0}^d: every u <= 0 is inside.
struct DomainSpec {
  Vector upper_bound;
  double horizon = 0.0;

  /// Strict interior test on real parts; the boundary itself is excluded.
  template <typename Scalar>
  bool contains(const Vec<Scalar>& u) const {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (!(real_part(u(i)) < upper_bound(i))) return false;
    }
    return true;
  }
};

struct RiccatiOptions {
  double tol = 1e-12;
  /// Steps shorter than min_step * t are treated as a collapse.
  double min_step = 1e-13;
  long max_steps = 2'000'000;
};

/// Integrates the Riccati system to time t with an embedded Dormand-Prince
/// 5(4) pair. Throws BlowUp when psi leaves the domain before t and
/// StepUnderflow when error control cannot make progress.
template <typename Scalar>
TransformPair<Scalar> riccati_solve(const RiccatiRhs<Scalar>& rhs, double t,
                                    const Vec<Scalar>& u,
                                    const RiccatiOptions& options = {});

template <typename Scalar>
TransformPair<Scalar> riccati_solve(const RiccatiRhs<Scalar>& rhs, double t,
                                    const Vec<Scalar>& u, double tol) {
  RiccatiOptions options;
  options.tol = tol;
  return riccati_solve(rhs, t, u, options);
}

}  // namespace affine_libor
