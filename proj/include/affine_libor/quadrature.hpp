#pragma once

#include <functional>

#include "affine_libor/types.hpp"

namespace affine_libor {

struct HalfLineOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
  /// Width of the first panel [0, first_panel]; later panels double.
  double first_panel = 1.0;
  /// Hard cap on the integration range.
  double v_max = 1e14;
  int max_tail_panels = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double range = 0.0;  // furthest abscissa reached
  long evaluations = 0;
};

/// Integral of Re g(v) over [0, inf).
///
/// Geometrically growing panels are integrated with adaptive Gauss-Kronrod
/// until the panels either become negligible or start to contain several
/// oscillations of g. In the latter case the remaining tail is summed over
/// half periods of the local phase rate of g and extrapolated with Wynn's
/// epsilon algorithm. Throws QuadratureFailure if neither stage converges.
QuadratureResult integrate_real_half_line(const std::function<Complex(double)>& g,
                                          const HalfLineOptions& options = {});

/// Wynn epsilon extrapolation of a sequence of partial sums. Returns the
/// estimate and sets `error` to the distance between the last two estimates.
double wynn_epsilon(const std::vector<double>& partial_sums, double* error = nullptr);

}  // namespace affine_libor
