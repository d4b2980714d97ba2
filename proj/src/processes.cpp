#include "affine_libor/processes.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "affine_libor/affine_core.hpp"
#include "affine_libor/errors.hpp"

namespace affine_libor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool nonneg(double x) { return std::isfinite(x) && x >= 0.0; }
bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void validate(const CirParams& p) {
  if (!nonneg(p.lambda) || !nonneg(p.theta) || !nonneg(p.eta) || !nonneg(p.x0)) {
    throw Error(ErrorKind::InvalidParameter, "CIR parameters must be finite and non-negative");
  }
}

void validate(const GammaOuParams& p) {
  if (!positive(p.lambda) || !positive(p.alpha) || !nonneg(p.beta) || !nonneg(p.x0)) {
    throw Error(ErrorKind::InvalidParameter,
                "Gamma-OU needs lambda > 0, alpha > 0, beta >= 0, x0 >= 0");
  }
}

void validate(const LevySubordinatorSpec& s) {
  if (!s.kappa) throw Error(ErrorKind::InvalidParameter, "subordinator without kappa");
  if (!(s.domain_sup > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "0 must be interior to the kappa domain");
  }
  if (!nonneg(s.x0)) throw Error(ErrorKind::InvalidParameter, "subordinator x0 must be >= 0");
}

void check_domain(double re_u, double sup, const char* family) {
  if (!(re_u < sup)) {
    throw Error(ErrorKind::DomainViolation,
                std::string(family) + ": u outside the exponential-moment domain");
  }
}

template <typename Scalar>
Vec<Scalar> scalar_vec(Scalar x) {
  Vec<Scalar> v(1);
  v(0) = x;
  return v;
}

double log1p_of(double x) { return std::log1p(x); }
Complex log1p_of(const Complex& z) { return std::log(1.0 + z); }

}  // namespace

double cir_a(const CirParams& p, double t) { return std::exp(-p.lambda * t); }

double cir_b(const CirParams& p, double t) {
  if (p.lambda == 0.0) return t;
  return -std::expm1(-p.lambda * t) / p.lambda;
}

double cir_domain_sup(const CirParams& p, double t) {
  if (p.eta == 0.0 || t == 0.0) return kInf;
  return 1.0 / (2.0 * p.eta * p.eta * cir_b(p, t));
}

template <typename Scalar>
TransformPair<Scalar> cir_transform(const CirParams& p, double t, Scalar u) {
  if (t == 0.0) return {Scalar(0), scalar_vec(u)};
  check_domain(real_part(u), cir_domain_sup(p, t), "CIR");
  const double a = cir_a(p, t);
  const double b = cir_b(p, t);
  if (p.eta == 0.0) {
    return {p.lambda * p.theta * b * u, scalar_vec(Scalar(a * u))};
  }
  const double c = 2.0 * p.eta * p.eta * b;
  const Scalar den = 1.0 - c * u;
  const Scalar phi = -(p.lambda * p.theta / (2.0 * p.eta * p.eta)) * log1p_of(Scalar(-c * u));
  return {phi, scalar_vec(Scalar(a * u / den))};
}

template <typename Scalar>
TransformPair<Scalar> gamma_ou_transform(const GammaOuParams& p, double t, Scalar u) {
  if (t == 0.0) return {Scalar(0), scalar_vec(u)};
  check_domain(real_part(u), p.alpha, "Gamma-OU");
  const double decay = std::exp(-p.lambda * t);
  Scalar phi;
  if constexpr (std::is_same_v<Scalar, double>) {
    phi = p.beta * std::log1p(-std::expm1(-p.lambda * t) * u / (p.alpha - u));
  } else {
    phi = p.beta * (std::log(p.alpha - decay * u) - std::log(p.alpha - u));
  }
  return {phi, scalar_vec(Scalar(decay * u))};
}

template <typename Scalar>
TransformPair<Scalar> subordinator_transform(const LevySubordinatorSpec& s, double t, Scalar u) {
  if (t == 0.0) return {Scalar(0), scalar_vec(u)};
  check_domain(real_part(u), s.domain_sup, "subordinator");
  Scalar kappa;
  if constexpr (std::is_same_v<Scalar, double>) {
    kappa = s.kappa(Complex(u, 0.0)).real();
  } else {
    kappa = s.kappa(u);
  }
  return {t * kappa, scalar_vec(u)};
}

template <typename Scalar>
TransformPair<Scalar> product_transform(const ProductProcess& p, double t, const Vec<Scalar>& u) {
  const auto n = static_cast<Eigen::Index>(p.factors.size());
  if (u.size() != n) {
    throw Error(ErrorKind::InvalidParameter, "product_transform: argument has wrong dimension");
  }
  TransformPair<Scalar> out{Scalar(0), Vec<Scalar>(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    try {
      const auto f = transform<Scalar>(p.factors[j], t, scalar_vec(u(j)));
      out.phi += f.phi;
      out.psi(j) = f.psi(0);
    } catch (const Error& e) {
      throw Error(e.kind(), "factor " + std::to_string(j) + ": " + e.what());
    }
  }
  return out;
}

template <typename Scalar>
RiccatiRhs<Scalar> cir_rhs(const CirParams& p) {
  RiccatiRhs<Scalar> rhs;
  rhs.F = [p](const Vec<Scalar>& u) -> Scalar { return p.lambda * p.theta * u(0); };
  rhs.R = [p](const Vec<Scalar>& u) -> Vec<Scalar> {
    return scalar_vec<Scalar>(2.0 * p.eta * p.eta * u(0) * u(0) - p.lambda * u(0));
  };
  rhs.upper_bound = [p](double h) {
    Vector b(1);
    b(0) = cir_domain_sup(p, h);
    return b;
  };
  return rhs;
}

template <typename Scalar>
RiccatiRhs<Scalar> gamma_ou_rhs(const GammaOuParams& p) {
  RiccatiRhs<Scalar> rhs;
  rhs.F = [p](const Vec<Scalar>& u) -> Scalar {
    return p.lambda * p.beta * u(0) / (p.alpha - u(0));
  };
  rhs.R = [p](const Vec<Scalar>& u) -> Vec<Scalar> { return scalar_vec<Scalar>(-p.lambda * u(0)); };
  rhs.upper_bound = [p](double) {
    Vector b(1);
    b(0) = p.alpha;
    return b;
  };
  return rhs;
}

LevySubordinatorSpec compound_poisson_exp_subordinator(double intensity, double alpha, double x0) {
  if (!nonneg(intensity) || !positive(alpha)) {
    throw Error(ErrorKind::InvalidParameter, "compound Poisson: intensity >= 0, alpha > 0");
  }
  LevySubordinatorSpec s;
  s.kappa = [intensity, alpha](Complex u) { return intensity * u / (alpha - u); };
  s.domain_sup = alpha;
  s.x0 = x0;
  return s;
}

ProcessSpec::ProcessSpec(CirParams p) : v_(p), dim_(1) { validate(p); }
ProcessSpec::ProcessSpec(GammaOuParams p) : v_(p), dim_(1) { validate(p); }
ProcessSpec::ProcessSpec(LevySubordinatorSpec p) : dim_(1) {
  validate(p);
  v_ = std::move(p);
}
ProcessSpec::ProcessSpec(RiccatiProcess p) {
  if (!p.rhs.F || !p.rhs.R) {
    throw Error(ErrorKind::InvalidParameter, "Riccati process needs both F and R");
  }
  if (p.x0.size() == 0) {
    throw Error(ErrorKind::InvalidParameter, "Riccati process needs an initial state");
  }
  dim_ = p.x0.size();
  v_ = std::move(p);
}
ProcessSpec::ProcessSpec(ProductProcess p) {
  if (p.factors.empty()) throw Error(ErrorKind::InvalidParameter, "product without factors");
  for (const auto& f : p.factors) {
    if (f.dimension() != 1) {
      throw Error(ErrorKind::InvalidParameter, "product factors must be one-dimensional");
    }
  }
  dim_ = static_cast<Eigen::Index>(p.factors.size());
  v_ = std::move(p);
}

std::string ProcessSpec::family() const {
  struct Visitor {
    std::string operator()(const CirParams&) const { return "cir"; }
    std::string operator()(const GammaOuParams&) const { return "gamma_ou"; }
    std::string operator()(const LevySubordinatorSpec&) const { return "subordinator"; }
    std::string operator()(const RiccatiProcess&) const { return "riccati"; }
    std::string operator()(const ProductProcess& p) const {
      std::string s = "product(";
      for (std::size_t i = 0; i < p.factors.size(); ++i) {
        if (i) s += ",";
        s += p.factors[i].family();
      }
      return s + ")";
    }
  };
  return std::visit(Visitor{}, v_);
}

Vector ProcessSpec::initial_state() const {
  struct Visitor {
    Vector operator()(const CirParams& p) const { return Vector::Constant(1, p.x0); }
    Vector operator()(const GammaOuParams& p) const { return Vector::Constant(1, p.x0); }
    Vector operator()(const LevySubordinatorSpec& p) const { return Vector::Constant(1, p.x0); }
    Vector operator()(const RiccatiProcess& p) const { return p.x0; }
    Vector operator()(const ProductProcess& p) const {
      Vector x(static_cast<Eigen::Index>(p.factors.size()));
      for (std::size_t i = 0; i < p.factors.size(); ++i) x(i) = p.factors[i].initial_state()(0);
      return x;
    }
  };
  return std::visit(Visitor{}, v_);
}

Vector ProcessSpec::upper_bound(double horizon) const {
  struct Visitor {
    double h;
    Vector operator()(const CirParams& p) const { return Vector::Constant(1, cir_domain_sup(p, h)); }
    Vector operator()(const GammaOuParams& p) const { return Vector::Constant(1, p.alpha); }
    Vector operator()(const LevySubordinatorSpec& p) const {
      return Vector::Constant(1, p.domain_sup);
    }
    Vector operator()(const RiccatiProcess& p) const {
      if (!p.rhs.upper_bound) return Vector::Constant(p.x0.size(), kInf);
      return p.rhs.upper_bound(h);
    }
    Vector operator()(const ProductProcess& p) const {
      Vector b(static_cast<Eigen::Index>(p.factors.size()));
      for (std::size_t i = 0; i < p.factors.size(); ++i) b(i) = p.factors[i].upper_bound(h)(0);
      return b;
    }
  };
  return std::visit(Visitor{horizon}, v_);
}

bool ProcessSpec::has_closed_form() const {
  if (std::holds_alternative<RiccatiProcess>(v_)) return false;
  if (const auto* p = std::get_if<ProductProcess>(&v_)) {
    for (const auto& f : p->factors) {
      if (!f.has_closed_form()) return false;
    }
  }
  return true;
}

template <typename Scalar>
RiccatiRhs<Scalar> ProcessSpec::riccati_rhs() const {
  struct Visitor {
    RiccatiRhs<Scalar> operator()(const CirParams& p) const { return cir_rhs<Scalar>(p); }
    RiccatiRhs<Scalar> operator()(const GammaOuParams& p) const { return gamma_ou_rhs<Scalar>(p); }
    RiccatiRhs<Scalar> operator()(const LevySubordinatorSpec& s) const {
      RiccatiRhs<Scalar> rhs;
      auto kappa = s.kappa;
      rhs.F = [kappa](const Vec<Scalar>& u) -> Scalar {
        if constexpr (std::is_same_v<Scalar, double>) {
          return kappa(Complex(u(0), 0.0)).real();
        } else {
          return kappa(u(0));
        }
      };
      rhs.R = [](const Vec<Scalar>& u) -> Vec<Scalar> { return Vec<Scalar>::Zero(u.size()); };
      const double sup = s.domain_sup;
      rhs.upper_bound = [sup](double) { return Vector::Constant(1, sup); };
      return rhs;
    }
    RiccatiRhs<Scalar> operator()(const RiccatiProcess& p) const {
      if constexpr (std::is_same_v<Scalar, double>) {
        return p.rhs;
      } else {
        if (!p.complex_rhs) {
          throw Error(ErrorKind::ModelMismatch,
                      "Riccati process has no complex right-hand side for Fourier use");
        }
        return p.complex_rhs();
      }
    }
    RiccatiRhs<Scalar> operator()(const ProductProcess& p) const {
      std::vector<RiccatiRhs<Scalar>> parts;
      for (const auto& f : p.factors) parts.push_back(f.template riccati_rhs<Scalar>());
      RiccatiRhs<Scalar> rhs;
      rhs.F = [parts](const Vec<Scalar>& u) -> Scalar {
        Scalar sum(0);
        for (std::size_t j = 0; j < parts.size(); ++j) sum += parts[j].F(scalar_vec<Scalar>(u(j)));
        return sum;
      };
      rhs.R = [parts](const Vec<Scalar>& u) -> Vec<Scalar> {
        Vec<Scalar> out(u.size());
        for (std::size_t j = 0; j < parts.size(); ++j) out(j) = parts[j].R(scalar_vec<Scalar>(u(j)))(0);
        return out;
      };
      rhs.upper_bound = [parts](double h) {
        Vector b(static_cast<Eigen::Index>(parts.size()));
        for (std::size_t j = 0; j < parts.size(); ++j) {
          b(j) = parts[j].upper_bound ? parts[j].upper_bound(h)(0) : kInf;
        }
        return b;
      };
      return rhs;
    }
  };
  return std::visit(Visitor{}, v_);
}

template TransformPair<double> cir_transform(const CirParams&, double, double);
template TransformPair<Complex> cir_transform(const CirParams&, double, Complex);
template TransformPair<double> gamma_ou_transform(const GammaOuParams&, double, double);
template TransformPair<Complex> gamma_ou_transform(const GammaOuParams&, double, Complex);
template TransformPair<double> subordinator_transform(const LevySubordinatorSpec&, double, double);
template TransformPair<Complex> subordinator_transform(const LevySubordinatorSpec&, double, Complex);
template TransformPair<double> product_transform(const ProductProcess&, double, const Vec<double>&);
template TransformPair<Complex> product_transform(const ProductProcess&, double, const Vec<Complex>&);
template RiccatiRhs<double> cir_rhs(const CirParams&);
template RiccatiRhs<Complex> cir_rhs(const CirParams&);
template RiccatiRhs<double> gamma_ou_rhs(const GammaOuParams&);
template RiccatiRhs<Complex> gamma_ou_rhs(const GammaOuParams&);
template RiccatiRhs<double> ProcessSpec::riccati_rhs<double>() const;
template RiccatiRhs<Complex> ProcessSpec::riccati_rhs<Complex>() const;

}  // namespace affine_libor
