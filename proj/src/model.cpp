#include "affine_libor/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "affine_libor/errors.hpp"

namespace affine_libor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_index(const CalibratedModel& m, int k, int lo, int hi, const char* what) {
  if (k < lo || k > hi) {
    throw Error(ErrorKind::IndexError, std::string(what) + ": index " + std::to_string(k) +
                                           " outside [" + std::to_string(lo) + ", " +
                                           std::to_string(hi) + "]");
  }
  (void)m;
}

void check_time(double t, double hi, const char* what) {
  if (!(t >= 0.0) || !(t <= hi)) {
    throw Error(ErrorKind::HorizonViolation, std::string(what) + ": time outside [0, " +
                                                 std::to_string(hi) + "]");
  }
}

// exp(phi + <psi, x>) in log form, so overflow shows up as +inf.
double log_mgf(const ProcessSpec& process, double t, const Vector& u, const Vector& x,
               double max_horizon) {
  const auto tr = transform<double>(process, t, u, max_horizon);
  return tr.phi + tr.psi.dot(x);
}

}  // namespace

TenorStructure::TenorStructure(std::vector<double> maturities, std::vector<double> discounts,
                               std::optional<std::vector<double>> accruals) {
  if (maturities.empty() || maturities.size() != discounts.size()) {
    throw Error(ErrorKind::InvalidParameter,
                "tenor: need one discount factor per maturity and at least one date");
  }
  dates_.reserve(maturities.size() + 1);
  dates_.push_back(0.0);
  for (double T : maturities) {
    if (!std::isfinite(T) || !(T > dates_.back())) {
      throw Error(ErrorKind::InvalidParameter, "tenor: dates must be strictly increasing from 0");
    }
    dates_.push_back(T);
  }
  discounts_.reserve(discounts.size() + 1);
  discounts_.push_back(1.0);
  for (double B : discounts) {
    if (!(B > 0.0 && B <= 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "tenor: discount factors must lie in (0, 1]");
    }
    discounts_.push_back(B);
  }
  const std::size_t n = maturities.size();
  if (accruals) {
    if (accruals->size() != n) {
      throw Error(ErrorKind::InvalidParameter, "tenor: one accrual per period required");
    }
    for (double d : *accruals) {
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw Error(ErrorKind::InvalidParameter, "tenor: accruals must be positive");
      }
    }
    accruals_ = std::move(*accruals);
  } else {
    for (std::size_t k = 0; k < n; ++k) accruals_.push_back(dates_[k + 1] - dates_[k]);
  }
}

double TenorStructure::date(int k) const {
  if (k < 0 || k > size()) throw Error(ErrorKind::IndexError, "tenor date index out of range");
  return dates_[static_cast<std::size_t>(k)];
}

double TenorStructure::discount(int k) const {
  if (k < 0 || k > size()) throw Error(ErrorKind::IndexError, "tenor discount index out of range");
  return discounts_[static_cast<std::size_t>(k)];
}

double TenorStructure::accrual(int k) const {
  if (k < 0 || k >= size()) throw Error(ErrorKind::IndexError, "tenor accrual index out of range");
  return accruals_[static_cast<std::size_t>(k)];
}

bool TenorStructure::non_negative_rates() const {
  for (int k = 1; k < size(); ++k) {
    if (discounts_[static_cast<std::size_t>(k + 1)] > discounts_[static_cast<std::size_t>(k)]) {
      return false;
    }
  }
  return true;
}

double TenorStructure::initial_libor(int k) const {
  return (discount(k) / discount(k + 1) - 1.0) / accrual(k);
}

const Vector& CalibratedModel::u(int k) const {
  if (k < 1 || k > size()) throw Error(ErrorKind::IndexError, "u index out of range");
  return us[static_cast<std::size_t>(k - 1)];
}

double martingale_value(const ProcessSpec& process, double horizon, double t, const Vector& x,
                        const Vector& u) {
  check_time(t, horizon, "martingale_value");
  return std::exp(log_mgf(process, horizon - t, u, x, horizon));
}

double martingale_value(const CalibratedModel& m, double t, const Vector& x, const Vector& u) {
  return martingale_value(m.process, m.horizon(), t, x, u);
}

namespace {

// Largest s with s * w strictly inside the domain on `horizon`.
double diagonal_sup(const ProcessSpec& process, double horizon, const Vector& w) {
  const Vector bound = process.upper_bound(horizon);
  double s = kInf;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) s = std::min(s, bound(j) / w(j));
  }
  return s;
}

// Points approaching the domain boundary along direction w; geometric in the
// distance to the boundary, or doubling when the domain is unbounded.
template <typename Visit>
void walk_to_boundary(double s_max, Visit&& visit) {
  if (std::isfinite(s_max)) {
    for (int j = 1; j <= 60; ++j) {
      const double s = s_max * (1.0 - std::ldexp(1.0, -j));
      if (!(s < s_max)) return;
      if (!visit(s)) return;
    }
  } else {
    for (int j = -4; j <= 1020; ++j) {
      if (!visit(std::ldexp(1.0, j))) return;
    }
  }
}

}  // namespace

namespace {

// Closed-form families whose MGF is known to diverge at the domain boundary.
// The numerical walk cannot see a logarithmic blow-up with a small exponent.
bool diverges_at_boundary(const ProcessSpec& process, double horizon) {
  if (const auto* c = process.get_if<CirParams>()) return c->eta > 0.0;
  if (const auto* g = process.get_if<GammaOuParams>()) return g->beta > 0.0 && g->lambda * horizon > 0.0;
  if (const auto* prod = process.get_if<ProductProcess>()) {
    const Vector bound = process.upper_bound(horizon);
    const double binding = bound.minCoeff();
    Eigen::Index offset = 0;
    for (const ProcessSpec& f : prod->factors) {
      const Eigen::Index n = f.dimension();
      if (bound.segment(offset, n).minCoeff() == binding && std::isfinite(binding) &&
          diverges_at_boundary(f, horizon)) {
        return true;
      }
      offset += n;
    }
  }
  return false;
}

}  // namespace

double estimate_gamma_x(const ProcessSpec& process, double horizon) {
  const Eigen::Index d = process.dimension();
  const Vector ones = Vector::Ones(d);
  const double s_max = diagonal_sup(process, horizon, ones);
  if (diverges_at_boundary(process, horizon)) return kInf;
  double best = 1.0;
  double previous = 1.0;
  int stalled = 0;
  walk_to_boundary(s_max, [&](double s) {
    double value;
    try {
      value = std::exp(log_mgf(process, horizon, Vector(s * ones), ones, kInf));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DomainViolation || e.kind() == ErrorKind::BlowUp) return false;
      throw;
    }
    if (!std::isfinite(value)) {
      best = kInf;
      return false;
    }
    best = std::max(best, value);
    stalled = (value - previous <= 1e-15 * value) ? stalled + 1 : 0;
    previous = value;
    return stalled < 8;
  });
  return best;
}

CalibratedModel fit_term_structure(const TenorStructure& tenor, const ProcessSpec& process,
                                   const Vector& x0, const CalibrationOptions& options) {
  const int N = tenor.size();
  const Eigen::Index d = process.dimension();
  if (x0.size() != d) throw Error(ErrorKind::InvalidParameter, "x0 has wrong dimension");
  if ((x0.array() < 0.0).any() || !x0.allFinite()) {
    throw Error(ErrorKind::InvalidParameter, "x0 must be non-negative");
  }
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tolerance must be positive");
  for (int k = 1; k < N; ++k) {
    if (tenor.ratio(k) < tenor.ratio(k + 1)) {
      throw Error(ErrorKind::NonMonotoneCurve,
                  "discount ratios increase at k = " + std::to_string(k) +
                      " (negative initial LIBOR rate)");
    }
  }

  const double T = tenor.horizon();
  CalibratedModel model{process, x0, tenor, std::vector<Vector>(static_cast<std::size_t>(N), Vector::Zero(d))};
  const double top = tenor.ratio(1);
  if (top == 1.0) return model;

  const Vector w = options.direction.value_or(Vector::Ones(d));
  if (w.size() != d || (w.array() < 0.0).any() || !(w.maxCoeff() > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "calibration direction must be non-negative and nonzero");
  }

  auto log_f = [&](double s) { return log_mgf(process, T, Vector(s * w), x0, T); };

  double s_plus = 0.0;
  walk_to_boundary(diagonal_sup(process, T, w), [&](double s) {
    double lf;
    try {
      lf = log_f(s);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DomainViolation || e.kind() == ErrorKind::BlowUp) return false;
      throw;
    }
    if (lf > std::log(top)) {
      s_plus = s;
      return false;
    }
    return true;
  });
  if (s_plus == 0.0) {
    throw Error(ErrorKind::InfeasibleCurve,
                "the driver's exponential moments cannot reach B(0,T_1)/B(0,T_N)");
  }

  auto f = [&](double xi) { return std::exp(log_f(xi * s_plus)); };
  std::vector<double> xi(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = N - 1; k >= 1; --k) {
    const double target = tenor.ratio(k);
    double lo = xi[static_cast<std::size_t>(k) + 1];
    double hi = 1.0;
    double best = lo;
    double best_res = std::abs(f(lo) - target);
    for (int it = 0; it < options.max_iterations && best_res > options.tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      const double val = f(mid);
      const double res = std::abs(val - target);
      if (res < best_res) {
        best_res = res;
        best = mid;
      }
      if (val < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    if (best_res > options.tol) {
      throw Error(ErrorKind::ConvergenceFailure,
                  "calibration residual " + std::to_string(best_res) + " at k = " + std::to_string(k));
    }
    xi[static_cast<std::size_t>(k)] = best;
    model.us[static_cast<std::size_t>(k) - 1] = best * s_plus * w;
  }
  return model;
}

ForwardExponents forward_exponents(const CalibratedModel& m, int k, int i, double t) {
  const int N = m.size();
  check_index(m, k, 1, N, "forward_exponents");
  check_index(m, i, 1, N, "forward_exponents");
  check_time(t, m.tenor.date(std::min(k, i)), "forward_exponents");
  if (k == i) return {0.0, Vector::Zero(m.process.dimension())};
  const double h = m.horizon() - t;
  const auto a = transform<double>(m.process, h, m.u(k), m.horizon());
  const auto b = transform<double>(m.process, h, m.u(i), m.horizon());
  return {a.phi - b.phi, a.psi - b.psi};
}

double libor_rate(const CalibratedModel& m, int k, double t, const Vector& x) {
  check_index(m, k, 1, m.size() - 1, "libor_rate");
  const auto e = forward_exponents(m, k, k + 1, t);
  return std::expm1(e.A + e.B.dot(x)) / m.tenor.accrual(k);
}

double libor_lower_bound(const CalibratedModel& m, int k, double t) {
  check_index(m, k, 1, m.size() - 1, "libor_lower_bound");
  return std::expm1(forward_exponents(m, k, k + 1, t).A) / m.tenor.accrual(k);
}

ForwardMeasureMgf::ForwardMeasureMgf(const CalibratedModel& m, int k, double t) : m_(&m), t_(t) {
  check_index(m, k, 1, m.size(), "forward_measure_exponents");
  check_time(t, m.tenor.date(k), "forward_measure_exponents");
  shift_ = transform<double>(m.process, m.horizon() - t, m.u(k), m.horizon()).psi;
  const auto base = transform<double>(m.process, t, shift_, m.horizon());
  phi_shift_ = base.phi;
  psi_base_ = base.psi;
}

template <typename Scalar>
Scalar ForwardMeasureMgf::log_value(const Vec<Scalar>& v) const {
  const Vec<Scalar> w = shift_.cast<Scalar>() + v;
  const auto tr = transform<Scalar>(m_->process, t_, w, m_->horizon());
  return tr.phi - phi_shift_ + (tr.psi - psi_base_.cast<Scalar>()).cwiseProduct(m_->x0.cast<Scalar>()).sum();
}

Vector ForwardMeasureMgf::strip_sup() const {
  return m_->process.upper_bound(t_) - shift_;
}

template <typename Scalar>
TransformPair<Scalar> forward_measure_exponents(const CalibratedModel& m, int k, double t,
                                                const Vec<Scalar>& v) {
  check_index(m, k, 1, m.size(), "forward_measure_exponents");
  check_time(t, m.tenor.date(k), "forward_measure_exponents");
  const Vector shift = transform<double>(m.process, m.horizon() - t, m.u(k), m.horizon()).psi;
  const auto base = transform<double>(m.process, t, shift, m.horizon());
  const auto tilted = transform<Scalar>(m.process, t, Vec<Scalar>(shift.cast<Scalar>() + v), m.horizon());
  return {tilted.phi - base.phi, tilted.psi - base.psi.cast<Scalar>()};
}

ForwardPriceMgf::ForwardPriceMgf(const CalibratedModel& m, int k, double t) : m_(&m), t_(t) {
  check_index(m, k, 1, m.size() - 1, "forward_price_mgf");
  check_time(t, m.tenor.date(k), "forward_price_mgf");
  const double h = m.horizon() - t;
  const auto a = transform<double>(m.process, h, m.u(k), m.horizon());
  const auto b = transform<double>(m.process, h, m.u(k + 1), m.horizon());
  phi_k_ = a.phi;
  phi_k1_ = b.phi;
  psi_k_ = a.psi;
  psi_k1_ = b.psi;
  exps_ = {a.phi - b.phi, a.psi - b.psi};
  log_prefactor_ = std::log(m.tenor.discount(m.size()) / m.tenor.discount(k + 1));
}

template <typename Scalar>
Scalar ForwardPriceMgf::log_value(Scalar v) const {
  const Vec<Scalar> w = v * psi_k_.cast<Scalar>() + (1.0 - v) * psi_k1_.cast<Scalar>();
  const auto tr = transform<Scalar>(m_->process, t_, w, m_->horizon());
  return log_prefactor_ + v * phi_k_ + (1.0 - v) * phi_k1_ + tr.phi +
         tr.psi.cwiseProduct(m_->x0.cast<Scalar>()).sum();
}

double ForwardPriceMgf::strip_sup() const {
  const Vector bound = m_->process.upper_bound(t_);
  double sup = kInf;
  for (Eigen::Index j = 0; j < bound.size(); ++j) {
    if (exps_.B(j) > 0.0) sup = std::min(sup, (bound(j) - psi_k1_(j)) / exps_.B(j));
  }
  return sup;
}

double ForwardPriceMgf::strip_inf() const {
  const Vector bound = m_->process.upper_bound(t_);
  double inf = -kInf;
  for (Eigen::Index j = 0; j < bound.size(); ++j) {
    if (exps_.B(j) < 0.0) inf = std::max(inf, (bound(j) - psi_k1_(j)) / exps_.B(j));
  }
  return inf;
}

template <typename Scalar>
Scalar forward_price_mgf(const CalibratedModel& m, int k, double t, Scalar v) {
  return std::exp(ForwardPriceMgf(m, k, t).log_value(v));
}

template double ForwardPriceMgf::log_value(double) const;
template Complex ForwardPriceMgf::log_value(Complex) const;
template double ForwardMeasureMgf::log_value(const Vec<double>&) const;
template Complex ForwardMeasureMgf::log_value(const Vec<Complex>&) const;
template TransformPair<double> forward_measure_exponents(const CalibratedModel&, int, double,
                                                         const Vec<double>&);
template TransformPair<Complex> forward_measure_exponents(const CalibratedModel&, int, double,
                                                          const Vec<Complex>&);
template double forward_price_mgf(const CalibratedModel&, int, double, double);
template Complex forward_price_mgf(const CalibratedModel&, int, double, Complex);

}  // namespace affine_libor
