#include <doctest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "affine_libor/affine_core.hpp"
#include "affine_libor/errors.hpp"
#include "fixtures.hpp"

using namespace affine_libor;
using fixtures::scalar;

namespace {

// Classical fixed-step RK4 on (phi, psi) for a one-dimensional system.
std::pair<double, double> rk4(const std::function<double(double)>& F,
                              const std::function<double(double)>& R, double t, double u,
                              int steps) {
  const double h = t / steps;
  double phi = 0.0, psi = u;
  for (int i = 0; i < steps; ++i) {
    const double k1p = F(psi), k1 = R(psi);
    const double k2p = F(psi + 0.5 * h * k1), k2 = R(psi + 0.5 * h * k1);
    const double k3p = F(psi + 0.5 * h * k2), k3 = R(psi + 0.5 * h * k2);
    const double k4p = F(psi + h * k3), k4 = R(psi + h * k3);
    phi += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    psi += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return {phi, psi};
}

RiccatiProcess squared_bessel(double alpha, bool with_bound) {
  RiccatiProcess p;
  p.rhs.F = [alpha](const Vector& u) { return alpha * u(0); };
  p.rhs.R = [](const Vector& u) { return Vector::Constant(1, 2.0 * u(0) * u(0)); };
  if (with_bound) p.rhs.upper_bound = [](double t) { return Vector::Constant(1, 0.5 / t); };
  p.x0 = scalar(1.0);
  return p;
}

}  // namespace

TEST_SUITE("transforms") {

TEST_CASE("t = 0 returns the identity pair") {
  const ProcessSpec p(fixtures::cir_params());
  const auto tr = transform(p, 0.0, scalar(0.3));
  CHECK(tr.phi == 0.0);
  CHECK(tr.psi(0) == 0.3);
}

TEST_CASE("u = 0 gives phi = psi = 0 for every family") {
  for (const ProcessSpec& p : {ProcessSpec(fixtures::cir_params()), ProcessSpec(fixtures::gamma_ou_params()),
                               ProcessSpec(compound_poisson_exp_subordinator(0.3, 2.0))}) {
    const auto tr = transform(p, 2.0, scalar(0.0));
    CHECK(tr.phi == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(tr.psi(0) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("CIR transform matches an expectation under the non-central chi-square law") {
  const CirParams p{0.5, 1.0, 0.3, 0.8};
  const double t = 1.3, u = 0.7;
  const double s = p.eta * p.eta * cir_b(p, t);
  const double nu = p.lambda * p.theta / (p.eta * p.eta);
  const double nc = p.x0 * cir_a(p, t) / s;
  boost::math::non_central_chi_squared law(nu, nc);
  const auto integrand = [&](double y) { return std::exp(u * s * y) * boost::math::pdf(law, y); };
  const double expect =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 400.0, 15, 1e-13);
  const auto tr = transform(ProcessSpec(p), t, scalar(u));
  CHECK(std::exp(tr.phi + tr.psi(0) * p.x0) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("CIR with lambda = 0 uses b(t) = t") {
  const CirParams p{0.0, 0.0, 0.5, 1.0};
  CHECK(cir_b(p, 2.0) == 2.0);
  const auto tr = transform(ProcessSpec(p), 2.0, scalar(0.1));
  CHECK(tr.psi(0) == doctest::Approx(0.1 / (1.0 - 2.0 * 0.25 * 2.0 * 0.1)));
  CHECK(cir_b(CirParams{1e-300, 0.0, 0.5, 1.0}, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("CIR domain boundary") {
  const CirParams p = fixtures::cir_params();
  const double sup = cir_domain_sup(p, 5.0);
  CHECK(sup == doctest::Approx(1.0 / (2.0 * p.eta * p.eta * cir_b(p, 5.0))));
  CHECK_NOTHROW(transform(ProcessSpec(p), 5.0, scalar(0.999 * sup)));
  CHECK_THROWS_AS(transform(ProcessSpec(p), 5.0, scalar(sup)), Error);
  try {
    transform(ProcessSpec(p), 5.0, scalar(1.01 * sup));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainViolation);
  }
  CHECK(std::isinf(cir_domain_sup(CirParams{0.1, 0.5, 0.0, 1.0}, 3.0)));
}

TEST_CASE("Gamma-OU phi matches direct integration of the Levy exponent") {
  const GammaOuParams p = fixtures::gamma_ou_params();
  const double t = 3.0, u = 1.7;
  const auto kappa = [&](double s) {
    const double v = std::exp(-p.lambda * s) * u;
    return p.lambda * p.beta * v / (p.alpha - v);
  };
  const double phi = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(kappa, 0.0, t, 15, 1e-14);
  const auto tr = transform(ProcessSpec(p), t, scalar(u));
  CHECK(tr.phi == doctest::Approx(phi).epsilon(1e-12));
  CHECK(tr.psi(0) == doctest::Approx(std::exp(-p.lambda * t) * u));
  CHECK_THROWS_AS(transform(ProcessSpec(p), t, scalar(p.alpha)), Error);
}

TEST_CASE("subordinator transform is (t kappa(u), u)") {
  const ProcessSpec p(compound_poisson_exp_subordinator(0.4, 3.0, 0.5));
  const auto tr = transform(p, 2.5, scalar(1.2));
  CHECK(tr.phi == doctest::Approx(2.5 * 0.4 * 1.2 / (3.0 - 1.2)));
  CHECK(tr.psi(0) == 1.2);
}

TEST_CASE("product transform stacks independent factors") {
  const ProcessSpec prod = fixtures::cir2f_process();
  const auto& factors = prod.get_if<ProductProcess>()->factors;
  Vector u(2);
  u << 0.05, 0.1;
  const auto tr = transform(prod, 2.0, u);
  const auto a = transform(factors[0], 2.0, scalar(0.05));
  const auto b = transform(factors[1], 2.0, scalar(0.1));
  CHECK(tr.phi == doctest::Approx(a.phi + b.phi).epsilon(1e-15));
  CHECK(tr.psi(0) == a.psi(0));
  CHECK(tr.psi(1) == b.psi(0));
  CHECK_THROWS_AS(transform(prod, 2.0, scalar(0.1)), Error);
}

TEST_CASE("complex transform agrees with the real one on the real axis") {
  const ProcessSpec p(fixtures::gamma_ou_params());
  const auto r = transform<double>(p, 1.5, scalar(0.4));
  ComplexVector z(1);
  z(0) = Complex(0.4, 0.0);
  const auto c = transform<Complex>(p, 1.5, z);
  CHECK(c.phi.real() == doctest::Approx(r.phi).epsilon(1e-14));
  CHECK(std::abs(c.phi.imag()) < 1e-15);
  CHECK(c.psi(0).real() == doctest::Approx(r.psi(0)));
}

TEST_CASE("complex transform is the characteristic function") {
  // |E exp(i v X)| <= 1 and conjugate symmetry.
  const ProcessSpec p(fixtures::cir_params());
  ComplexVector z(1);
  for (double v : {0.5, 3.0, 40.0}) {
    z(0) = Complex(0.0, v);
    const auto a = transform<Complex>(p, 2.0, z);
    z(0) = Complex(0.0, -v);
    const auto b = transform<Complex>(p, 2.0, z);
    CHECK(std::real(a.phi + a.psi(0) * 1.25) <= 1e-15);
    CHECK(std::abs(a.phi - std::conj(b.phi)) < 1e-14);
  }
}

TEST_CASE("horizon and dimension errors") {
  const ProcessSpec p(fixtures::cir_params());
  CHECK_THROWS_AS(transform(p, 6.0, scalar(0.1), 5.0), Error);
  try {
    transform(p, -1.0, scalar(0.1));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::HorizonViolation);
  }
  try {
    transform(p, 1.0, Vector::Zero(2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParameter);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ProcessSpec(CirParams{-0.1, 0.5, 0.5, 1.0}), Error);
  CHECK_THROWS_AS(ProcessSpec(CirParams{0.1, 0.5, -0.5, 1.0}), Error);
  CHECK_THROWS_AS(ProcessSpec(GammaOuParams{0.0, 2.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(ProcessSpec(GammaOuParams{0.1, -2.0, 1.0, 1.0}), Error);
  CHECK_THROWS_AS(ProcessSpec(ProductProcess{}), Error);
  CHECK_THROWS_AS(ProcessSpec(LevySubordinatorSpec{}), Error);
  CHECK_THROWS_AS(ProcessSpec(RiccatiProcess{}), Error);
}

TEST_CASE("semi-flow holds for closed forms") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const ProcessSpec cir(fixtures::cir_params());
  const ProcessSpec gou(fixtures::gamma_ou_params());
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = 2.5 * U(gen), s = 2.5 * U(gen);
    worst = std::max(worst, check_semiflow(cir, t, s, scalar(cir_domain_sup(fixtures::cir_params(), t + s) * U(gen) * 0.95)));
    worst = std::max(worst, check_semiflow(gou, t, s, scalar(-2.0 + 3.9 * U(gen))));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("order preservation and midpoint convexity") {
  const ProcessSpec cir(fixtures::cir_params());
  const double t = 3.0;
  const double sup = cir_domain_sup(fixtures::cir_params(), t);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(-1.0, 0.95);
  for (int i = 0; i < 200; ++i) {
    double a = U(gen) * sup, b = U(gen) * sup;
    if (a > b) std::swap(a, b);
    const auto ta = transform(cir, t, scalar(a));
    const auto tb = transform(cir, t, scalar(b));
    const auto tm = transform(cir, t, scalar(0.5 * (a + b)));
    CHECK(ta.phi <= tb.phi);
    CHECK(ta.psi(0) <= tb.psi(0));
    CHECK(tm.phi <= 0.5 * (ta.phi + tb.phi) + 1e-14);
    CHECK(tm.psi(0) <= 0.5 * (ta.psi(0) + tb.psi(0)) + 1e-14);
  }
}

}  // TEST_SUITE

TEST_SUITE("riccati") {

TEST_CASE("Dormand-Prince agrees with the closed forms") {
  const CirParams c = fixtures::cir_params();
  const GammaOuParams g = fixtures::gamma_ou_params();
  for (double t : {0.1, 1.0, 5.0}) {
    for (double frac : {-1.0, 0.2, 0.8}) {
      const double u = frac * cir_domain_sup(c, t);
      const auto ode = riccati_solve(cir_rhs<double>(c), t, scalar(u));
      const auto ref = cir_transform<double>(c, t, u);
      CHECK(ode.phi == doctest::Approx(ref.phi).epsilon(1e-9));
      CHECK(ode.psi(0) == doctest::Approx(ref.psi(0)).epsilon(1e-9));
      const auto ode2 = riccati_solve(gamma_ou_rhs<double>(g), t, scalar(frac * g.alpha));
      const auto ref2 = gamma_ou_transform<double>(g, t, frac * g.alpha);
      CHECK(ode2.phi == doctest::Approx(ref2.phi).epsilon(1e-9));
      CHECK(ode2.psi(0) == doctest::Approx(ref2.psi(0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("Dormand-Prince agrees with fixed-step RK4 on a system without closed form") {
  RiccatiRhs<double> rhs;
  rhs.F = [](const Vector& u) { return 0.5 * u(0) * u(0) + 0.3 * u(0); };
  rhs.R = [](const Vector& u) { return Vector::Constant(1, 0.25 * u(0) * u(0) - 0.7 * u(0)); };
  const auto ode = riccati_solve(rhs, 2.0, scalar(0.9));
  const auto ref = rk4([](double p) { return 0.5 * p * p + 0.3 * p; },
                       [](double p) { return 0.25 * p * p - 0.7 * p; }, 2.0, 0.9, 20000);
  CHECK(ode.phi == doctest::Approx(ref.first).epsilon(1e-10));
  CHECK(ode.psi(0) == doctest::Approx(ref.second).epsilon(1e-10));
}

TEST_CASE("squared Bessel Riccati process matches its closed form") {
  const double alpha = 1.5, t = 0.8, u = 0.4;
  const ProcessSpec p(squared_bessel(alpha, true));
  const auto tr = transform(p, t, scalar(u));
  CHECK(tr.phi == doctest::Approx(-0.5 * alpha * std::log(1.0 - 2.0 * t * u)).epsilon(1e-9));
  CHECK(tr.psi(0) == doctest::Approx(u / (1.0 - 2.0 * t * u)).epsilon(1e-9));
  CHECK_FALSE(p.has_closed_form());
}

TEST_CASE("blow-up before the horizon") {
  // psi = u / (1 - 2 t u) explodes at t = 0.5 for u = 1.
  try {
    transform(ProcessSpec(squared_bessel(1.0, false)), 1.0, scalar(1.0));
    FAIL("expected BlowUp");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BlowUp);
  }
  try {
    transform(ProcessSpec(squared_bessel(1.0, true)), 1.0, scalar(1.0));
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainViolation);
  }
}

TEST_CASE("solver argument checks") {
  const auto rhs = cir_rhs<double>(fixtures::cir_params());
  CHECK_THROWS_AS(riccati_solve(rhs, -1.0, scalar(0.1)), Error);
  CHECK_THROWS_AS(riccati_solve(rhs, 1.0, scalar(0.1), 0.0), Error);
  RiccatiOptions tight;
  tight.max_steps = 3;
  tight.tol = 1e-14;
  CHECK_THROWS_AS(riccati_solve(rhs, 5.0, scalar(0.1), tight), Error);
}

}  // TEST_SUITE
