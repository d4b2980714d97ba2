#pragma once

#include "affine_libor/types.hpp"

namespace affine_libor {

/// Location-scale non-central chi-square: (Y - mu) / sigma ~ chi2(nu, alpha_nc).
/// A negative sigma reflects the law; sigma = 0 is rejected.
struct LsncChi2Params {
  double mu = 0.0;
  double sigma = 1.0;
  double nu = 1.0;
  double alpha_nc = 0.0;
};

/// Law of shift + sum_j sigmas(j) * Y_j with independent Y_j ~ chi2(nus(j), alphas(j)).
struct ChiSqMixSpec {
  Vector sigmas;
  Vector nus;
  Vector alphas;
  double shift = 0.0;
};

/// Non-central chi-square CDF by a Poisson-weighted series of central CDFs,
/// summed outward from the modal Poisson index.
double ncchi2_cdf(double x, double nu, double alpha_nc);
/// Upper tail 1 - ncchi2_cdf, summed directly to keep relative accuracy.
double ncchi2_ccdf(double x, double nu, double alpha_nc);

double lsnc_cdf(double x, const LsncChi2Params& p);
double lsnc_ccdf(double x, const LsncChi2Params& p);

/// -(nu/2) log(1 - 2 sigma u) + alpha sigma u / (1 - 2 sigma u) + mu u.
template <typename Scalar>
Scalar lsnc_cgf(Scalar u, const LsncChi2Params& p);

/// Exponentially tilted law: (mu, sigma/zeta, nu, alpha/zeta), zeta = 1 - 2 sigma theta.
LsncChi2Params lsnc_tilt(const LsncChi2Params& p, double theta);

/// P(shift + sum sigma_j Y_j <= x), absolute error <= 1e-12.
double chisq_mix_cdf(double x, const ChiSqMixSpec& m);
double chisq_mix_ccdf(double x, const ChiSqMixSpec& m);

}  // namespace affine_libor
