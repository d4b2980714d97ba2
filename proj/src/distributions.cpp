#include "affine_libor/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "affine_libor/errors.hpp"

namespace affine_libor {

namespace {

constexpr double kSeriesTail = 1e-14;

void check_ncchi2(double nu, double alpha_nc) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorKind::InvalidParameter, "non-central chi-square needs nu > 0");
  }
  if (!(alpha_nc >= 0.0) || !std::isfinite(alpha_nc)) {
    throw Error(ErrorKind::InvalidParameter, "non-central chi-square needs alpha >= 0");
  }
}

double poisson_weight(double mean, long j) {
  if (mean == 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(-mean + static_cast<double>(j) * std::log(mean) -
                  std::lgamma(static_cast<double>(j) + 1.0));
}

// sum_j Poisson(alpha/2)_j * term(nu/2 + j), expanding from the mode in both
// directions until the unvisited Poisson mass is below kSeriesTail.
template <typename Term>
double poisson_mixture(double nu, double alpha_nc, Term&& term) {
  const double mean = 0.5 * alpha_nc;
  const long mode = static_cast<long>(std::floor(mean));
  double sum = 0.0;
  double mass = 0.0;

  for (long j = mode; j >= 0; --j) {
    const double w = poisson_weight(mean, j);
    sum += w * term(0.5 * nu + static_cast<double>(j));
    mass += w;
    if (w < 1e-300 || (w < kSeriesTail * 1e-3 && j < mode)) break;
  }
  for (long j = mode + 1;; ++j) {
    if (1.0 - mass <= kSeriesTail) break;
    const double w = poisson_weight(mean, j);
    sum += w * term(0.5 * nu + static_cast<double>(j));
    mass += w;
    if (w == 0.0 && static_cast<double>(j) > mean) break;
    if (j - mode > 100000) {
      throw Error(ErrorKind::ConvergenceFailure, "non-central chi-square series did not converge");
    }
  }
  return sum;
}

}  // namespace

double ncchi2_cdf(double x, double nu, double alpha_nc) {
  check_ncchi2(nu, alpha_nc);
  if (std::isnan(x)) throw Error(ErrorKind::InvalidParameter, "ncchi2_cdf: NaN argument");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double y = 0.5 * x;
  const double v = poisson_mixture(nu, alpha_nc, [y](double a) { return boost::math::gamma_p(a, y); });
  return std::clamp(v, 0.0, 1.0);
}

double ncchi2_ccdf(double x, double nu, double alpha_nc) {
  check_ncchi2(nu, alpha_nc);
  if (std::isnan(x)) throw Error(ErrorKind::InvalidParameter, "ncchi2_ccdf: NaN argument");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double y = 0.5 * x;
  const double v = poisson_mixture(nu, alpha_nc, [y](double a) { return boost::math::gamma_q(a, y); });
  return std::clamp(v, 0.0, 1.0);
}

double lsnc_cdf(double x, const LsncChi2Params& p) {
  if (p.sigma == 0.0 || !std::isfinite(p.sigma)) {
    throw Error(ErrorKind::InvalidParameter, "LSNC chi-square needs a finite nonzero scale");
  }
  const double z = (x - p.mu) / p.sigma;
  // The law has no atoms, so reflection needs no boundary correction.
  return p.sigma > 0.0 ? ncchi2_cdf(z, p.nu, p.alpha_nc) : ncchi2_ccdf(z, p.nu, p.alpha_nc);
}

double lsnc_ccdf(double x, const LsncChi2Params& p) {
  if (p.sigma == 0.0 || !std::isfinite(p.sigma)) {
    throw Error(ErrorKind::InvalidParameter, "LSNC chi-square needs a finite nonzero scale");
  }
  const double z = (x - p.mu) / p.sigma;
  return p.sigma > 0.0 ? ncchi2_ccdf(z, p.nu, p.alpha_nc) : ncchi2_cdf(z, p.nu, p.alpha_nc);
}

template <typename Scalar>
Scalar lsnc_cgf(Scalar u, const LsncChi2Params& p) {
  const Scalar zeta = 1.0 - 2.0 * p.sigma * u;
  if (!(real_part(zeta) > 0.0)) {
    throw Error(ErrorKind::DomainViolation, "lsnc_cgf: u outside 1 - 2 sigma u > 0");
  }
  return -0.5 * p.nu * std::log(zeta) + p.alpha_nc * p.sigma * u / zeta + p.mu * u;
}

LsncChi2Params lsnc_tilt(const LsncChi2Params& p, double theta) {
  const double zeta = 1.0 - 2.0 * p.sigma * theta;
  if (!(zeta > 0.0)) {
    throw Error(ErrorKind::DomainViolation, "lsnc_tilt: theta outside 1 - 2 sigma theta > 0");
  }
  return {p.mu, p.sigma / zeta, p.nu, p.alpha_nc / zeta};
}

namespace {

void check_mix(const ChiSqMixSpec& m) {
  const auto n = m.sigmas.size();
  if (n == 0 || m.nus.size() != n || m.alphas.size() != n) {
    throw Error(ErrorKind::InvalidParameter, "chi-square mix: vectors must share a length >= 1");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(m.sigmas(j) > 0.0) || !std::isfinite(m.sigmas(j))) {
      throw Error(ErrorKind::InvalidParameter, "chi-square mix: sigmas must be positive");
    }
    check_ncchi2(m.nus(j), m.alphas(j));
  }
}

// Ruben's expansion: sum_j sigma_j Y_j = sum_k c_k * beta * chi2(nu_tot + 2k)
// with beta = min sigma_j and non-negative c_k summing to one.
template <typename Term>
double ruben_mixture(const ChiSqMixSpec& m, Term&& term) {
  const Eigen::Index n = m.sigmas.size();
  const double beta = m.sigmas.minCoeff();
  const double nu_tot = m.nus.sum();
  Vector q(n), ratio(n);
  double log_c0 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    ratio(j) = beta / m.sigmas(j);
    q(j) = 1.0 - ratio(j);
    log_c0 += 0.5 * m.nus(j) * std::log(ratio(j)) - 0.5 * m.alphas(j);
  }
  std::vector<double> c{std::exp(log_c0)};
  if (c[0] == 0.0) {
    throw Error(ErrorKind::ConvergenceFailure, "chi-square mix: leading coefficient underflows");
  }
  std::vector<double> g{0.0};
  double sum = c[0] * term(beta, 0.5 * nu_tot);
  double mass = c[0];
  constexpr long kMaxTerms = 20000;
  for (long k = 1; 1.0 - mass > 1e-14; ++k) {
    if (k > kMaxTerms) {
      throw Error(ErrorKind::ConvergenceFailure, "chi-square mix: series truncation bound not reached");
    }
    double gk = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double qk1 = std::pow(q(j), static_cast<double>(k - 1));
      gk += 0.5 * m.nus(j) * qk1 * q(j) + 0.5 * m.alphas(j) * ratio(j) * static_cast<double>(k) * qk1;
    }
    g.push_back(gk);
    double ck = 0.0;
    for (long r = 0; r < k; ++r) ck += g[static_cast<std::size_t>(k - r)] * c[static_cast<std::size_t>(r)];
    ck /= static_cast<double>(k);
    c.push_back(ck);
    sum += ck * term(beta, 0.5 * nu_tot + static_cast<double>(k));
    mass += ck;
  }
  return sum;
}

}  // namespace

double chisq_mix_cdf(double x, const ChiSqMixSpec& m) {
  check_mix(m);
  const double y = x - m.shift;
  if (y <= 0.0) return 0.0;
  if (std::isinf(y)) return 1.0;
  const double v = ruben_mixture(m, [y](double beta, double a) {
    return boost::math::gamma_p(a, 0.5 * y / beta);
  });
  return std::clamp(v, 0.0, 1.0);
}

double chisq_mix_ccdf(double x, const ChiSqMixSpec& m) {
  check_mix(m);
  const double y = x - m.shift;
  if (y <= 0.0) return 1.0;
  if (std::isinf(y)) return 0.0;
  const double v = ruben_mixture(m, [y](double beta, double a) {
    return boost::math::gamma_q(a, 0.5 * y / beta);
  });
  return std::clamp(v, 0.0, 1.0);
}

template double lsnc_cgf(double, const LsncChi2Params&);
template Complex lsnc_cgf(Complex, const LsncChi2Params&);

}  // namespace affine_libor
