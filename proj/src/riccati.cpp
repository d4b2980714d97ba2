#include "affine_libor/riccati.hpp"

#include <algorithm>
#include <cmath>

#include "affine_libor/errors.hpp"

namespace affine_libor {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <typename Scalar>
Vec<Scalar> derivative(const RiccatiRhs<Scalar>& rhs, const Vec<Scalar>& y) {
  const Eigen::Index d = y.size() - 1;
  Vec<Scalar> psi = y.tail(d);
  Vec<Scalar> dy(y.size());
  dy(0) = rhs.F(psi);
  dy.tail(d) = rhs.R(psi);
  return dy;
}

template <typename Scalar>
bool all_finite(const Vec<Scalar>& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(std::abs(y(i)))) return false;
  }
  return true;
}

}  // namespace

template <typename Scalar>
TransformPair<Scalar> riccati_solve(const RiccatiRhs<Scalar>& rhs, double t,
                                    const Vec<Scalar>& u,
                                    const RiccatiOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::HorizonViolation, "riccati_solve: negative or non-finite horizon");
  }
  if (!(options.tol > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "riccati_solve: tolerance must be positive");
  }
  const Eigen::Index d = u.size();
  Vec<Scalar> y(d + 1);
  y(0) = Scalar(0);
  y.tail(d) = u;
  if (t == 0.0) return {y(0), y.tail(d)};

  auto inside = [&](const Vec<Scalar>& state, double remaining) {
    if (!all_finite(state)) return false;
    if (!rhs.upper_bound) return true;
    const Vector bound = rhs.upper_bound(remaining);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!(real_part(state(i + 1)) < bound(i))) return false;
    }
    return true;
  };

  const double floor = options.min_step * t;
  double s = 0.0;
  double h = std::min(t, 1e-2 * t + 1e-6);
  Vec<Scalar> k1 = derivative(rhs, y);
  long steps = 0;
  while (s < t) {
    if (++steps > options.max_steps) {
      throw Error(ErrorKind::StepUnderflow, "riccati_solve: step budget exhausted");
    }
    h = std::min(h, t - s);
    const bool last = (s + h >= t);

    Vec<Scalar> k2 = derivative(rhs, Vec<Scalar>(y + h * (a21 * k1)));
    Vec<Scalar> k3 = derivative(rhs, Vec<Scalar>(y + h * (a31 * k1 + a32 * k2)));
    Vec<Scalar> k4 = derivative(rhs, Vec<Scalar>(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    Vec<Scalar> k5 = derivative(
        rhs, Vec<Scalar>(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    Vec<Scalar> k6 = derivative(
        rhs, Vec<Scalar>(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    Vec<Scalar> y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double s_new = last ? t : s + h;

    if (!inside(y_new, t - s_new)) {
      h *= 0.5;
      if (h < floor) {
        throw Error(ErrorKind::BlowUp,
                    "riccati_solve: psi left the exponential-moment domain before t");
      }
      continue;
    }

    Vec<Scalar> k7 = derivative(rhs, y_new);
    Vec<Scalar> err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale =
          options.tol * (1.0 + std::max(std::abs(y(i)), std::abs(y_new(i))));
      err_norm = std::max(err_norm, std::abs(err(i)) / scale);
    }
    if (!std::isfinite(err_norm)) err_norm = 1e10;

    if (err_norm <= 1.0) {
      s = s_new;
      y = std::move(y_new);
      k1 = std::move(k7);
      const double grow = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      if (h < floor) {
        throw Error(ErrorKind::StepUnderflow, "riccati_solve: step size collapsed");
      }
    }
  }
  return {y(0), y.tail(d)};
}

template TransformPair<double> riccati_solve(const RiccatiRhs<double>&, double,
                                             const Vec<double>&, const RiccatiOptions&);
template TransformPair<Complex> riccati_solve(const RiccatiRhs<Complex>&, double,
                                              const Vec<Complex>&, const RiccatiOptions&);

}  // namespace affine_libor
