#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "affine_libor/riccati.hpp"
#include "affine_libor/types.hpp"

namespace affine_libor {

/// Cox-Ingersoll-Ross driver dX = -lambda (X - theta) dt + 2 eta sqrt(X) dW.
struct CirParams {
  double lambda = 0.0;
  double theta = 0.0;
  double eta = 0.0;
  double x0 = 1.0;
};

/// a(t) = exp(-lambda t).
double cir_a(const CirParams& p, double t);
/// b(t) = t for lambda = 0, (1 - exp(-lambda t)) / lambda otherwise.
double cir_b(const CirParams& p, double t);
/// Transform exists for u < 1 / (2 eta^2 b(t)); +inf when eta = 0 or t = 0.
double cir_domain_sup(const CirParams& p, double t);

/// OU process driven by a compound Poisson subordinator with intensity
/// lambda*beta and Exp(alpha) jumps; its stationary law is Gamma(alpha, beta).
struct GammaOuParams {
  double lambda = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double x0 = 1.0;
};

/// Levy subordinator with cumulant generating function kappa, finite on
/// (-inf, domain_sup). kappa must accept complex arguments in the strip
/// Re u < domain_sup.
struct LevySubordinatorSpec {
  std::function<Complex(Complex)> kappa;
  double domain_sup = std::numeric_limits<double>::infinity();
  double x0 = 1.0;
};

/// Process known only through its Riccati right-hand sides. The complex
/// version is optional; without it the process cannot be used for Fourier
/// pricing.
struct RiccatiProcess {
  RiccatiRhs<double> rhs;
  std::function<RiccatiRhs<Complex>()> complex_rhs;
  Vector x0;
  RiccatiOptions options;
};

class ProcessSpec;

/// Independent one-dimensional factors stacked into a d-dimensional process.
struct ProductProcess {
  std::vector<ProcessSpec> factors;
};

/// One supported affine driver. Parameter records are validated on
/// construction.
class ProcessSpec {
 public:
  using Variant =
      std::variant<CirParams, GammaOuParams, LevySubordinatorSpec, RiccatiProcess, ProductProcess>;

  ProcessSpec(CirParams p);
  ProcessSpec(GammaOuParams p);
  ProcessSpec(LevySubordinatorSpec p);
  ProcessSpec(RiccatiProcess p);
  ProcessSpec(ProductProcess p);

  const Variant& variant() const { return v_; }
  Eigen::Index dimension() const { return dim_; }
  std::string family() const;

  /// Initial state recorded in the parameter records.
  Vector initial_state() const;
  /// Componentwise supremum of the exponential-moment domain on `horizon`.
  Vector upper_bound(double horizon) const;
  DomainSpec domain(double horizon) const { return {upper_bound(horizon), horizon}; }
  bool has_closed_form() const;

  template <typename Scalar>
  RiccatiRhs<Scalar> riccati_rhs() const;

  template <typename T>
  const T* get_if() const { return std::get_if<T>(&v_); }

 private:
  Variant v_;
  Eigen::Index dim_ = 1;
};

template <typename Scalar>
TransformPair<Scalar> cir_transform(const CirParams& p, double t, Scalar u);
template <typename Scalar>
TransformPair<Scalar> gamma_ou_transform(const GammaOuParams& p, double t, Scalar u);
template <typename Scalar>
TransformPair<Scalar> subordinator_transform(const LevySubordinatorSpec& s, double t, Scalar u);
template <typename Scalar>
TransformPair<Scalar> product_transform(const ProductProcess& p, double t, const Vec<Scalar>& u);

/// Riccati right-hand sides of the concrete families.
template <typename Scalar>
RiccatiRhs<Scalar> cir_rhs(const CirParams& p);
template <typename Scalar>
RiccatiRhs<Scalar> gamma_ou_rhs(const GammaOuParams& p);

/// Cumulant generating function lambda*beta*u/(alpha-u) of the compound
/// Poisson driver of the Gamma-OU process.
LevySubordinatorSpec compound_poisson_exp_subordinator(double intensity, double alpha,
                                                       double x0 = 1.0);

}  // namespace affine_libor
