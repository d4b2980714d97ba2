#include "affine_libor/affine_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "affine_libor/errors.hpp"

namespace affine_libor {

template <typename Scalar>
TransformPair<Scalar> transform(const ProcessSpec& process, double t, const Vec<Scalar>& u,
                                double max_horizon) {
  if (!(t >= 0.0) || !(t <= max_horizon)) {
    throw Error(ErrorKind::HorizonViolation,
                "transform: t = " + std::to_string(t) + " outside [0, T_N]");
  }
  if (u.size() != process.dimension()) {
    throw Error(ErrorKind::InvalidParameter, "transform: argument has wrong dimension");
  }
  if (t == 0.0) return {Scalar(0), u};

  struct Visitor {
    double t;
    const Vec<Scalar>& u;
    const ProcessSpec& process;
    TransformPair<Scalar> operator()(const CirParams& p) const { return cir_transform<Scalar>(p, t, u(0)); }
    TransformPair<Scalar> operator()(const GammaOuParams& p) const {
      return gamma_ou_transform<Scalar>(p, t, u(0));
    }
    TransformPair<Scalar> operator()(const LevySubordinatorSpec& s) const {
      return subordinator_transform<Scalar>(s, t, u(0));
    }
    TransformPair<Scalar> operator()(const RiccatiProcess& p) const {
      if (!process.domain(t).contains(u)) {
        throw Error(ErrorKind::DomainViolation, "transform: u outside the domain");
      }
      return riccati_solve<Scalar>(process.riccati_rhs<Scalar>(), t, u, p.options);
    }
    TransformPair<Scalar> operator()(const ProductProcess& p) const {
      return product_transform<Scalar>(p, t, u);
    }
  };
  return std::visit(Visitor{t, u, process}, process.variant());
}

double check_semiflow(const ProcessSpec& process, double t, double s, const Vector& u,
                      double max_horizon) {
  if (!(t >= 0.0) || !(s >= 0.0)) {
    throw Error(ErrorKind::HorizonViolation, "check_semiflow: negative time");
  }
  const auto whole = transform<double>(process, t + s, u, max_horizon);
  const auto first = transform<double>(process, t, u, max_horizon);
  const auto second = transform<double>(process, s, first.psi, max_horizon);
  double dev = std::abs(whole.phi - first.phi - second.phi);
  dev = std::max(dev, (whole.psi - second.psi).cwiseAbs().maxCoeff());
  return dev;
}

template TransformPair<double> transform(const ProcessSpec&, double, const Vec<double>&, double);
template TransformPair<Complex> transform(const ProcessSpec&, double, const Vec<Complex>&, double);

}  // namespace affine_libor
