#pragma once

#include <complex>

#include <Eigen/Dense>

namespace affine_libor {

using Complex = std::complex<double>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = Vec<double>;
using ComplexVector = Vec<Complex>;

/// Log-MGF coefficients: E_x[exp<u, X_t>] = exp(phi + <psi, x>).
template <typename Scalar>
struct TransformPair {
  Scalar phi{};
  Vec<Scalar> psi;
};

inline double real_part(double x) { return x; }
inline double real_part(const Complex& z) { return z.real(); }

template <typename Derived>
Vector real_part(const Eigen::MatrixBase<Derived>& v) {
  return v.real();
}

}  // namespace affine_libor
