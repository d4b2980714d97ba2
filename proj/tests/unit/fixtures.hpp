#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "affine_libor/errors.hpp"
#include "affine_libor/model.hpp"

namespace fixtures {

using namespace affine_libor;

inline TenorStructure euro_curve() {
  return TenorStructure({0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0},
                        {0.9833630, 0.9647388, 0.9435826, 0.9228903, 0.9006922, 0.8790279,
                         0.8568412, 0.8352144, 0.8133497, 0.7920573});
}

inline CirParams cir_params() { return {0.001, 0.50, 0.59, 1.25}; }
inline GammaOuParams gamma_ou_params() { return {0.01, 2.0, 1.0, 1.25}; }

inline Vector scalar(double x) { return Vector::Constant(1, x); }

inline CalibratedModel cir_model() {
  return fit_term_structure(euro_curve(), ProcessSpec(cir_params()), scalar(1.25));
}

inline CalibratedModel gamma_ou_model() {
  return fit_term_structure(euro_curve(), ProcessSpec(gamma_ou_params()), scalar(1.25));
}

inline ProcessSpec cir2f_process(double theta2 = 0.8, double x2 = 0.75) {
  ProductProcess p;
  p.factors.emplace_back(cir_params());
  p.factors.emplace_back(CirParams{0.05, theta2, 0.45, x2});
  return ProcessSpec(std::move(p));
}

inline CalibratedModel cir2f_model(double theta2 = 0.8, double x2 = 0.75) {
  ProcessSpec p = cir2f_process(theta2, x2);
  return fit_term_structure(euro_curve(), p, p.initial_state());
}

/// Kind of the library error thrown by `f`, or nullopt when nothing is thrown.
inline std::optional<ErrorKind> error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace fixtures
