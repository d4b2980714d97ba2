#include "affine_libor/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "affine_libor/distributions.hpp"
#include "affine_libor/errors.hpp"
#include "affine_libor/parallel.hpp"
#include "affine_libor/quadrature.hpp"

namespace affine_libor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const Complex kI(0.0, 1.0);

void check_caplet(const CalibratedModel& m, const CapletSpec& c) {
  if (c.period_index < 1 || c.period_index > m.size() - 1) {
    throw Error(ErrorKind::IndexError, "caplet period index must lie in [1, N-1]");
  }
  if (!(c.strike >= 0.0) || !std::isfinite(c.strike)) {
    throw Error(ErrorKind::InvalidParameter, "caplet strike must be a non-negative rate");
  }
}

void check_swaption(const CalibratedModel& m, const SwaptionSpec& s) {
  if (s.start_index < 1 || s.end_index <= s.start_index || s.end_index > m.size()) {
    throw Error(ErrorKind::IndexError, "swaption needs 1 <= i < m <= N");
  }
  if (!(s.strike >= 0.0) || !std::isfinite(s.strike)) {
    throw Error(ErrorKind::InvalidParameter, "swaption strike must be a non-negative rate");
  }
  if (m.process.dimension() != 1) {
    throw Error(ErrorKind::ModelMismatch, "swaption pricing needs a one-dimensional driver");
  }
}

HalfLineOptions half_line(const QuadratureSettings& q, double scale) {
  HalfLineOptions o;
  o.rel_tol = q.rel_tol;
  o.abs_tol = q.abs_tol / scale;
  o.v_max = q.truncation;
  return o;
}

const CirParams& require_cir(const CalibratedModel& m) {
  const auto* p = m.process.get_if<CirParams>();
  if (!p) throw Error(ErrorKind::ModelMismatch, "closed-form pricer needs a one-factor CIR driver");
  return *p;
}

// Fourier price of E_{P_{k+1}}[(e^Y - K)^+] (R > 1) or of the put (R < 0).
PriceResult forward_price_option(const CalibratedModel& m, const CapletSpec& c,
                                 const QuadratureSettings& q, bool call) {
  check_caplet(m, c);
  const int k = c.period_index;
  const ForwardPriceMgf mgf(m, k, m.tenor.date(k));
  const double lo = mgf.strip_inf();
  const double hi = mgf.strip_sup();
  double R;
  if (q.damping) {
    R = *q.damping;
  } else if (call) {
    R = std::isfinite(hi) ? 0.5 * (1.0 + hi) : 2.0;
  } else {
    R = lo < -2.0 ? -1.0 : 0.5 * lo;
  }
  const bool inside = call ? (R > 1.0 && R < hi) : (R < 0.0 && R > lo);
  if (!inside) {
    throw Error(ErrorKind::DampingOutOfStrip,
                "damping " + std::to_string(R) + " outside the admissible strip (" +
                    std::to_string(call ? 1.0 : lo) + ", " + std::to_string(call ? hi : 0.0) + ")");
  }
  const double log_k = std::log(c.bold_strike(m.tenor));
  const auto g = [&](double v) {
    const Complex z(R, -v);
    return std::exp((1.0 - z) * log_k + mgf.log_value(z)) / (z * (z - 1.0));
  };
  const double scale = m.tenor.discount(k + 1) / M_PI;
  const auto r = integrate_real_half_line(g, half_line(q, scale));
  PriceResult out;
  out.price = scale * r.value;
  out.error_estimate = scale * r.error;
  out.damping = R;
  out.method = "fourier";
  return out;
}

struct CirMarginal {
  double a, b, nu, x;
};

CirMarginal cir_marginal(const CirParams& p, double x0, double t) {
  if (!(p.eta > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "chi-square pricer needs eta > 0");
  }
  return {cir_a(p, t), cir_b(p, t), p.lambda * p.theta / (p.eta * p.eta), x0};
}

// Tail P(X_t > y) of a CIR factor under the measure tilted by exp(theta X_t).
double cir_tilted_ccdf(const CirParams& p, const CirMarginal& cm, double theta, double y) {
  const double s = p.eta * p.eta * cm.b;
  const double zeta = 1.0 - 2.0 * s * theta;
  if (!(zeta > 0.0)) throw Error(ErrorKind::DomainViolation, "tilt outside the CIR domain");
  return ncchi2_ccdf(y * zeta / s, cm.nu, cm.x * cm.a / (s * zeta));
}

}  // namespace

double CapletSpec::bold_strike(const TenorStructure& tenor) const {
  return 1.0 + tenor.accrual(period_index) * strike;
}

std::vector<double> SwaptionSpec::coupons(const TenorStructure& tenor) const {
  std::vector<double> c;
  for (int k = start_index + 1; k <= end_index; ++k) {
    c.push_back(tenor.accrual(k - 1) * strike + (k == end_index ? 1.0 : 0.0));
  }
  return c;
}

PriceResult caplet_fourier(const CalibratedModel& m, const CapletSpec& c, const QuadratureSettings& q) {
  return forward_price_option(m, c, q, true);
}

PriceResult floorlet_fourier(const CalibratedModel& m, const CapletSpec& c,
                             const QuadratureSettings& q) {
  return forward_price_option(m, c, q, false);
}

PriceResult caplet_cir_closed(const CalibratedModel& m, const CapletSpec& c) {
  const CirParams& p = require_cir(m);
  check_caplet(m, c);
  const int k = c.period_index;
  const double Tk = m.tenor.date(k);
  const double bold = c.bold_strike(m.tenor);
  const auto e = forward_exponents(m, k, k + 1, Tk);
  const double Bk = e.B(0);
  const double gap = std::log(bold) - e.A;
  const double Bd_k = m.tenor.discount(k);
  const double Bd_k1 = m.tenor.discount(k + 1);
  PriceResult out;
  out.method = "closed";
  if (Bk == 0.0) {
    out.price = std::max(Bd_k - bold * Bd_k1, 0.0);
    return out;
  }
  const CirMarginal cm = cir_marginal(p, m.x0(0), Tk);
  const double h = m.horizon() - Tk;
  const double psi_k = transform<double>(m.process, h, m.u(k), m.horizon()).psi(0);
  const double psi_k1 = transform<double>(m.process, h, m.u(k + 1), m.horizon()).psi(0);
  const double y = gap / Bk;
  out.price = Bd_k * cir_tilted_ccdf(p, cm, psi_k, y) - bold * Bd_k1 * cir_tilted_ccdf(p, cm, psi_k1, y);
  return out;
}

PriceResult caplet_cir2f_closed(const CalibratedModel& m, const CapletSpec& c) {
  std::vector<CirParams> factors;
  if (const auto* p = m.process.get_if<CirParams>()) {
    factors.push_back(*p);
  } else if (const auto* prod = m.process.get_if<ProductProcess>()) {
    for (const auto& f : prod->factors) {
      const auto* p = f.get_if<CirParams>();
      if (!p) throw Error(ErrorKind::ModelMismatch, "every factor must be CIR");
      factors.push_back(*p);
    }
  } else {
    throw Error(ErrorKind::ModelMismatch, "closed-form pricer needs independent CIR factors");
  }
  check_caplet(m, c);
  const int k = c.period_index;
  const double Tk = m.tenor.date(k);
  const double bold = c.bold_strike(m.tenor);
  const auto e = forward_exponents(m, k, k + 1, Tk);
  const double h = m.horizon() - Tk;
  const Vector psi_k = transform<double>(m.process, h, m.u(k), m.horizon()).psi;
  const Vector psi_k1 = transform<double>(m.process, h, m.u(k + 1), m.horizon()).psi;

  // P_m(A + <B, X> > log K): deterministic factors move into the shift,
  // vanishing ones are dropped.
  const auto tail = [&](const Vector& psi) {
    std::vector<double> sig, nus, alphas;
    double shift = e.A;
    for (std::size_t j = 0; j < factors.size(); ++j) {
      const CirParams& p = factors[j];
      const auto jj = static_cast<Eigen::Index>(j);
      const double Bj = e.B(jj);
      const double x = m.x0(jj);
      const double a = cir_a(p, Tk);
      const double b = cir_b(p, Tk);
      if (Bj == 0.0) continue;
      if (p.eta == 0.0) {
        shift += Bj * (x * a + p.lambda * p.theta * b);
        continue;
      }
      const double s = p.eta * p.eta * b;
      const double zeta = 1.0 - 2.0 * s * psi(jj);
      const double nu = p.lambda * p.theta / (p.eta * p.eta);
      const double alpha = x * a / (s * zeta);
      if (nu == 0.0 && alpha == 0.0) continue;
      sig.push_back(Bj * s / zeta);
      nus.push_back(nu);
      alphas.push_back(alpha);
    }
    const double level = std::log(bold);
    if (sig.empty()) return shift > level ? 1.0 : 0.0;
    ChiSqMixSpec mix;
    mix.sigmas = Eigen::Map<Vector>(sig.data(), static_cast<Eigen::Index>(sig.size()));
    mix.nus = Eigen::Map<Vector>(nus.data(), static_cast<Eigen::Index>(nus.size()));
    mix.alphas = Eigen::Map<Vector>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    mix.shift = shift;
    return chisq_mix_ccdf(level, mix);
  };
  if ((e.B.array() < 0.0).any()) {
    throw Error(ErrorKind::ModelMismatch, "forward exponent has a negative state coefficient");
  }
  PriceResult out;
  out.method = "closed";
  out.price = m.tenor.discount(k) * tail(psi_k) - bold * m.tenor.discount(k + 1) * tail(psi_k1);
  return out;
}

namespace {

struct SwapLegs {
  std::vector<double> c, A, B;
};

SwapLegs swap_legs(const CalibratedModel& m, const SwaptionSpec& s) {
  SwapLegs legs;
  legs.c = s.coupons(m.tenor);
  const double Ti = m.tenor.date(s.start_index);
  for (int k = s.start_index + 1; k <= s.end_index; ++k) {
    const auto e = forward_exponents(m, k, s.start_index, Ti);
    legs.A.push_back(e.A);
    legs.B.push_back(e.B(0));
  }
  return legs;
}

double exercise_function(const SwapLegs& l, double x, double* slope = nullptr) {
  double f = 1.0;
  double df = 0.0;
  for (std::size_t j = 0; j < l.c.size(); ++j) {
    const double t = l.c[j] * std::exp(l.A[j] + l.B[j] * x);
    f -= t;
    df -= l.B[j] * t;
  }
  if (slope) *slope = df;
  return f;
}

double solve_root(const SwapLegs& l) {
  if (std::all_of(l.B.begin(), l.B.end(), [](double b) { return b == 0.0; })) {
    throw Error(ErrorKind::NoSignChange, "exercise function is constant");
  }
  if (l.c.size() == 1) return (-std::log(l.c[0]) - l.A[0]) / l.B[0];
  double lo = 0.0, hi = 0.0;
  const double f0 = exercise_function(l, 0.0);
  if (f0 == 0.0) return 0.0;
  double step = 1.0;
  for (int it = 0;; ++it) {
    if (it > 1100) throw Error(ErrorKind::NoSignChange, "exercise function keeps its sign");
    const double x = f0 < 0.0 ? step : -step;
    const double fx = exercise_function(l, x);
    if ((f0 < 0.0) == (fx < 0.0) && fx != 0.0) {
      step *= 2.0;
      continue;
    }
    if (f0 < 0.0) {
      lo = step / 2.0 >= 1.0 ? step / 2.0 : 0.0;
      hi = x;
    } else {
      lo = x;
      hi = step / 2.0 >= 1.0 ? -step / 2.0 : 0.0;
    }
    break;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    double slope = 0.0;
    const double fx = exercise_function(l, x, &slope);
    if (std::abs(fx) <= 1e-14) return x;
    if (fx < 0.0) lo = x; else hi = x;
    double next = slope > 0.0 ? x - fx / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

double swaption_root(const CalibratedModel& m, const SwaptionSpec& s) {
  check_swaption(m, s);
  return solve_root(swap_legs(m, s));
}

PriceResult swaption_fourier(const CalibratedModel& m, const SwaptionSpec& s,
                             const QuadratureSettings& q) {
  check_swaption(m, s);
  const SwapLegs legs = swap_legs(m, s);
  const double y = solve_root(legs);
  const int i = s.start_index;
  const ForwardMeasureMgf mgf(m, i, m.tenor.date(i));
  const double sup = mgf.strip_sup()(0);
  const double R = q.damping.value_or(0.5 * std::min(1.0, sup));
  if (!(R > 0.0 && R < sup)) {
    throw Error(ErrorKind::DampingOutOfStrip, "damping " + std::to_string(R) +
                                                   " outside (0, " + std::to_string(sup) + ")");
  }
  // Coupon weights at the root sum to one, which removes the 1/(iz) term.
  std::vector<double> w(legs.c.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = legs.c[j] * std::exp(legs.A[j] + legs.B[j] * y);
  ComplexVector arg(1);
  const auto g = [&](double v) {
    const Complex z(v, R);
    Complex sum = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) sum += w[j] * (-legs.B[j]) / (legs.B[j] + kI * z);
    arg(0) = Complex(R, -v);
    return std::exp(mgf.log_value(arg) + kI * z * y) * sum / (kI * z);
  };
  const double scale = m.tenor.discount(i) / M_PI;
  const auto r = integrate_real_half_line(g, half_line(q, scale));
  PriceResult out;
  out.price = scale * r.value;
  out.error_estimate = scale * r.error;
  out.damping = R;
  out.root = y;
  out.method = "fourier";
  return out;
}

PriceResult swaption_cir_closed(const CalibratedModel& m, const SwaptionSpec& s) {
  const CirParams& p = require_cir(m);
  check_swaption(m, s);
  const SwapLegs legs = swap_legs(m, s);
  const double y = solve_root(legs);
  const int i = s.start_index;
  const double Ti = m.tenor.date(i);
  const CirMarginal cm = cir_marginal(p, m.x0(0), Ti);
  const double h = m.horizon() - Ti;
  const auto psi = [&](int k) { return transform<double>(m.process, h, m.u(k), m.horizon()).psi(0); };
  double price = m.tenor.discount(i) * cir_tilted_ccdf(p, cm, psi(i), y);
  for (int k = i + 1; k <= s.end_index; ++k) {
    price -= legs.c[static_cast<std::size_t>(k - i - 1)] * m.tenor.discount(k) *
             cir_tilted_ccdf(p, cm, psi(k), y);
  }
  PriceResult out;
  out.price = price;
  out.root = y;
  out.method = "closed";
  return out;
}

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double black76_price(double vol, double forward_rate, double strike, double expiry, double annuity) {
  if (!(vol >= 0.0) || !(expiry >= 0.0) || !(annuity > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "black76_price needs vol >= 0, expiry >= 0, annuity > 0");
  }
  if (strike <= 0.0) return annuity * (forward_rate - strike);
  const double sd = vol * std::sqrt(expiry);
  if (sd == 0.0 || forward_rate <= 0.0) return annuity * std::max(forward_rate - strike, 0.0);
  const double d1 = (std::log(forward_rate / strike) + 0.5 * sd * sd) / sd;
  return annuity * (forward_rate * norm_cdf(d1) - strike * norm_cdf(d1 - sd));
}

double black76_implied_vol(double price, double forward_rate, double strike, double expiry,
                           double annuity) {
  if (!(annuity > 0.0) || !(expiry > 0.0) || !std::isfinite(price)) {
    throw Error(ErrorKind::InvalidParameter, "implied vol needs a finite price and positive expiry, annuity");
  }
  const double intrinsic = annuity * std::max(forward_rate - strike, 0.0);
  const double upper = annuity * std::max(forward_rate, 0.0);
  const double slack = 1e-15 * annuity;
  if (price < intrinsic - slack || price > upper + slack) {
    throw Error(ErrorKind::OutOfBounds, "price " + std::to_string(price) + " outside [" +
                                            std::to_string(intrinsic) + ", " + std::to_string(upper) + "]");
  }
  if (price <= intrinsic) return 0.0;
  if (strike <= 0.0 || forward_rate <= 0.0 || price >= upper) {
    throw Error(ErrorKind::OutOfBounds, "price carries no volatility information");
  }
  const auto value = [&](double v) { return black76_price(v, forward_rate, strike, expiry, annuity); };
  double lo = 0.0;
  double hi = 1.0;
  while (value(hi) < price) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorKind::OutOfBounds, "implied volatility exceeds 1e6");
  }
  const double sqrt_t = std::sqrt(expiry);
  double v = 0.5 * (lo + hi);
  for (int it = 0; it < 500; ++it) {
    const double diff = value(v) - price;
    if (std::abs(diff) <= 1e-15 * annuity + 1e-13 * price) return v;
    if (diff < 0.0) lo = v; else hi = v;
    const double d1 = (std::log(forward_rate / strike) + 0.5 * v * v * expiry) / (v * sqrt_t);
    const double vega = annuity * forward_rate * sqrt_t * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * M_PI);
    double next = vega > 0.0 ? v - diff / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-16 * hi) return next;
    v = next;
  }
  return v;
}

namespace {

std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

SurfaceMethod parse_surface_method(const std::string& name) {
  if (name == "fourier") return SurfaceMethod::Fourier;
  if (name == "closed") return SurfaceMethod::Closed;
  throw Error(ErrorKind::ParseError, "unknown pricing method '" + name + "' (fourier|closed)");
}

std::string to_string(SurfaceMethod method) {
  return method == SurfaceMethod::Fourier ? "fourier" : "closed";
}

std::vector<SurfaceCell> vol_surface(const CalibratedModel& m, const std::vector<double>& strikes,
                                     SurfaceMethod method, const QuadratureSettings& q,
                                     unsigned threads) {
  const int n_exp = m.size() - 1;
  const std::size_t n_cells = static_cast<std::size_t>(std::max(n_exp, 0)) * strikes.size();
  std::vector<SurfaceCell> cells(n_cells);
  const auto price_cell = [&](std::size_t idx) {
    const int k = static_cast<int>(idx / strikes.size()) + 1;
    SurfaceCell& cell = cells[idx];
    cell.expiry = m.tenor.date(k);
    cell.strike = strikes[idx % strikes.size()];
    cell.price = kNaN;
    cell.implied_vol = kNaN;
    try {
      const CapletSpec c{k, cell.strike};
      PriceResult r;
      if (method == SurfaceMethod::Fourier) {
        r = caplet_fourier(m, c, q);
      } else if (m.process.get_if<CirParams>()) {
        r = caplet_cir_closed(m, c);
      } else {
        r = caplet_cir2f_closed(m, c);
      }
      cell.price = r.price;
      const double annuity = m.tenor.accrual(k) * m.tenor.discount(k + 1);
      const double forward = m.tenor.initial_libor(k);
      // A time value at the level of pricing noise carries no volatility;
      // inverting it would only report rounding.
      const double time_value = r.price - annuity * std::max(forward - cell.strike, 0.0);
      const double noise = std::max(10.0 * r.error_estimate, 1e-9 * annuity * std::max(forward, cell.strike));
      if (time_value <= noise) {
        throw Error(ErrorKind::OutOfBounds,
                    "price equals the intrinsic value to pricing accuracy (time value " +
                        format_sci(time_value) + "); the strike is below the support of the rate");
      }
      cell.implied_vol = black76_implied_vol(cell.price, forward, cell.strike, cell.expiry, annuity);
      if (!(cell.implied_vol > 0.0)) throw Error(ErrorKind::OutOfBounds, "zero implied volatility");
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      cell.implied_vol = kNaN;
    }
  };
  parallel_for(n_cells, price_cell, threads);
  return cells;
}

}  // namespace affine_libor
