#include "affine_libor/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "affine_libor/errors.hpp"

namespace affine_libor {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr unsigned kMaxDepth = 10;

struct Panel {
  double value;
  double error;
};

// Phase rate d/dv arg g(v); zero where g vanishes, is not finite, or flips sign.
double phase_rate(const std::function<Complex(double)>& g, double v, long& evals) {
  const double h = 1e-4 * std::max(1.0, 1e-3 * v);
  const Complex a = g(v);
  const Complex b = g(v + h);
  evals += 2;
  if (!(std::abs(a) > 0.0) || !(std::abs(b) > 0.0) || !std::isfinite(std::abs(a)) ||
      !std::isfinite(std::abs(b))) {
    return 0.0;
  }
  const double turn = std::arg(b / a);
  return std::abs(turn) < 0.5 * M_PI ? turn / h : 0.0;
}

// Oscillation rate of Re g on [a, a + width] from its sign changes. Used for
// integrands without a usable phase, such as real-valued ones.
double crossing_rate(const std::function<Complex(double)>& g, double a, double width, long& evals) {
  constexpr int kSamples = 256;
  int crossings = 0;
  double prev = g(a).real();
  for (int j = 1; j <= kSamples; ++j) {
    const double y = g(a + width * j / kSamples).real();
    if ((y > 0.0 && prev < 0.0) || (y < 0.0 && prev > 0.0)) ++crossings;
    if (y != 0.0) prev = y;
  }
  evals += kSamples + 1;
  return M_PI * crossings / width;
}

}  // namespace

double wynn_epsilon(const std::vector<double>& s, double* error) {
  const std::size_t n = s.size();
  if (n == 0) {
    if (error) *error = std::numeric_limits<double>::infinity();
    return 0.0;
  }
  if (n < 3) {
    if (error) *error = n == 2 ? std::abs(s[1] - s[0]) : std::numeric_limits<double>::infinity();
    return s.back();
  }
  // Columns of the epsilon table; only even columns are estimates.
  std::vector<double> prev(n + 1, 0.0);  // eps_{-1}
  std::vector<double> cur(s.begin(), s.end());
  double best = s.back();
  double best_err = std::abs(s[n - 1] - s[n - 2]);
  double last_even = s.back();
  for (std::size_t col = 1; cur.size() > 1; ++col) {
    std::vector<double> next(cur.size() - 1);
    bool broken = false;
    for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
      const double diff = cur[j + 1] - cur[j];
      if (diff == 0.0 || !std::isfinite(diff)) {
        broken = true;
        break;
      }
      next[j] = prev[j + 1] + 1.0 / diff;
    }
    if (broken) break;
    prev = std::move(cur);
    cur = std::move(next);
    if (col % 2 == 0 && !cur.empty()) {
      const double est = cur.back();
      const double err = cur.size() > 1 ? std::abs(cur.back() - cur[cur.size() - 2])
                                        : std::abs(est - last_even);
      if (std::isfinite(est) && err < best_err) {
        best = est;
        best_err = err;
      }
      last_even = est;
    }
  }
  if (error) *error = best_err;
  return best;
}

QuadratureResult integrate_real_half_line(const std::function<Complex(double)>& g,
                                          const HalfLineOptions& options) {
  QuadratureResult out;
  const auto f = [&](double v) {
    ++out.evaluations;
    const double y = g(v).real();
    if (!std::isfinite(y)) {
      throw Error(ErrorKind::QuadratureFailure, "integrand is not finite at v = " + std::to_string(v));
    }
    return y;
  };
  const auto panel = [&](double a, double b) {
    double err = 0.0;
    const double val = Kronrod::integrate(f, a, b, kMaxDepth, 1e-3 * options.rel_tol, &err);
    return Panel{val, err};
  };
  const auto target = [&](double sum) {
    return std::max(options.abs_tol, options.rel_tol * std::abs(sum));
  };

  // Stage one: doubling panels.
  double sum = 0.0;
  double err = 0.0;
  double a = 0.0;
  double width = options.first_panel;
  int quiet = 0;
  double omega = 0.0;
  while (true) {
    const Panel p = panel(a, a + width);
    sum += p.value;
    err += p.error;
    a += width;
    quiet = std::abs(p.value) < 0.1 * target(sum) ? quiet + 1 : 0;
    if (quiet >= 2 && a >= 4.0 * options.first_panel) {
      out.value = sum;
      out.error = err + std::abs(p.value);
      out.range = a;
      return out;
    }
    if (a >= options.v_max) {
      throw Error(ErrorKind::QuadratureFailure,
                  "integral did not settle before v = " + std::to_string(options.v_max));
    }
    width = a;
    omega = std::abs(phase_rate(g, a, out.evaluations));
    if (omega == 0.0) omega = crossing_rate(g, a, width, out.evaluations);
    if (omega * width > 8.0 * M_PI) break;
  }

  // Stage two: half-period panels with extrapolation of the partial sums.
  const double half = M_PI / omega;
  std::vector<double> partial{sum};
  double last = sum;
  int stable = 0;
  quiet = 0;
  for (int n = 0; n < options.max_tail_panels; ++n) {
    const Panel p = panel(a, a + half);
    a += half;
    sum += p.value;
    err += p.error;
    partial.push_back(sum);
    if (partial.size() > 40) partial.erase(partial.begin());
    quiet = std::abs(p.value) < 0.1 * target(sum) ? quiet + 1 : 0;
    if (quiet >= 2) {
      out.value = sum;
      out.error = err + std::abs(p.value);
      out.range = a;
      return out;
    }
    double ext_err = 0.0;
    const double ext = wynn_epsilon(partial, &ext_err);
    stable = (std::abs(ext - last) < target(ext) && ext_err < target(ext)) ? stable + 1 : 0;
    last = ext;
    if (stable >= 3) {
      out.value = ext;
      out.error = err + ext_err;
      out.range = a;
      return out;
    }
  }
  throw Error(ErrorKind::QuadratureFailure, "oscillatory tail did not converge");
}

}  // namespace affine_libor
