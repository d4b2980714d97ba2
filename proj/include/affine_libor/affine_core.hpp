#pragma once

#include <limits>

#include "affine_libor/processes.hpp"
#include "affine_libor/riccati.hpp"
#include "affine_libor/types.hpp"

namespace affine_libor {

constexpr double kUnboundedHorizon = std::numeric_limits<double>::infinity();

/// (phi_t(u), psi_t(u)) for any supported process. Closed forms are used
/// when the family has one; otherwise the Riccati system is integrated.
///
/// Throws HorizonViolation if t is outside [0, max_horizon] and
/// DomainViolation if Re u is not strictly inside the domain for horizon t.
template <typename Scalar>
TransformPair<Scalar> transform(const ProcessSpec& process, double t, const Vec<Scalar>& u,
                                double max_horizon = kUnboundedHorizon);

inline TransformPair<double> transform(const ProcessSpec& process, double t, const Vector& u,
                                       double max_horizon = kUnboundedHorizon) {
  return transform<double>(process, t, u, max_horizon);
}

/// max(|phi_{t+s}(u) - phi_t(u) - phi_s(psi_t(u))|,
///     ||psi_{t+s}(u) - psi_s(psi_t(u))||_inf).
double check_semiflow(const ProcessSpec& process, double t, double s, const Vector& u,
                      double max_horizon = kUnboundedHorizon);

}  // namespace affine_libor
