#include <doctest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "affine_libor/pricing.hpp"
#include "fixtures.hpp"

using namespace affine_libor;
using fixtures::error_kind;
using fixtures::scalar;

namespace {

struct ExpTerm {
  double coef, a, p;
};

// B(0,T_N) E_N[(sum_j coef_j exp(a_j + p_j X_t))^+] for a one-factor CIR driver,
// assuming the bracket is negative below a single root and positive above it.
// Written as an integral of the derivative against the survival function of
// the boost non-central chi-square law.
double cir_positive_part(const CalibratedModel& m, double t, const std::vector<ExpTerm>& terms) {
  const CirParams p = fixtures::cir_params();
  const double s = p.eta * p.eta * cir_b(p, t);
  boost::math::non_central_chi_squared law(p.lambda * p.theta / (p.eta * p.eta),
                                           m.x0(0) * cir_a(p, t) / s);
  const auto h = [&](double x) {
    double v = 0.0;
    for (const auto& e : terms) v += e.coef * std::exp(e.a + e.p * x);
    return v;
  };
  const auto dh = [&](double x) {
    double v = 0.0;
    for (const auto& e : terms) v += e.coef * e.p * std::exp(e.a + e.p * x);
    return v;
  };
  double lo = 0.0, hi = 1.0;
  if (h(lo) >= 0.0) {
    hi = lo;
  } else {
    while (h(hi) < 0.0) hi *= 2.0;
    for (int j = 0; j < 200; ++j) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) < 0.0 ? lo : hi) = mid;
    }
  }
  const double root = hi;
  const auto f = [&](double x) { return dh(x) * boost::math::cdf(boost::math::complement(law, x / s)); };
  double total = std::max(h(0.0), 0.0);
  double a = root;
  for (double width = 0.5; a < 400.0 * s + 200.0; width *= 1.5) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, a + width, 15, 1e-14);
    a += width;
  }
  return m.tenor.discount(m.size()) * total;
}

double caplet_oracle(const CalibratedModel& m, int k, double K) {
  const double t = m.tenor.date(k);
  const auto tk = transform(m.process, m.horizon() - t, m.u(k));
  const auto tk1 = transform(m.process, m.horizon() - t, m.u(k + 1));
  const double bold = 1.0 + m.tenor.accrual(k) * K;
  return cir_positive_part(m, t, {{1.0, tk.phi, tk.psi(0)}, {-bold, tk1.phi, tk1.psi(0)}});
}

double swaption_oracle(const CalibratedModel& m, const SwaptionSpec& sw) {
  const double t = m.tenor.date(sw.start_index);
  const auto ti = transform(m.process, m.horizon() - t, m.u(sw.start_index));
  std::vector<ExpTerm> terms{{1.0, ti.phi, ti.psi(0)}};
  const auto c = sw.coupons(m.tenor);
  for (int k = sw.start_index + 1; k <= sw.end_index; ++k) {
    const auto tk = transform(m.process, m.horizon() - t, m.u(k));
    terms.push_back({-c[static_cast<std::size_t>(k - sw.start_index - 1)], tk.phi, tk.psi(0)});
  }
  return cir_positive_part(m, t, terms);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("pricing") {

TEST_CASE("contract records") {
  const TenorStructure t = fixtures::euro_curve();
  CHECK(CapletSpec{2, 0.04}.bold_strike(t) == doctest::Approx(1.02));
  const auto c = SwaptionSpec{2, 5, 0.04}.coupons(t);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(0.02));
  CHECK(c[1] == doctest::Approx(0.02));
  CHECK(c[2] == doctest::Approx(1.02));
}

TEST_CASE("CIR caplets against an independent expectation") {
  const CalibratedModel m = fixtures::cir_model();
  for (int k : {1, 4, 9}) {
    for (double K : {0.01, 0.035, 0.06}) {
      const double ref = caplet_oracle(m, k, K);
      CHECK(rel(caplet_fourier(m, {k, K}).price, ref) <= 1e-8);
      CHECK(rel(caplet_cir_closed(m, {k, K}).price, ref) <= 1e-8);
    }
  }
}

TEST_CASE("caplet Fourier and closed form agree on the whole grid") {
  const CalibratedModel m = fixtures::cir_model();
  double worst = 0.0;
  for (int k = 1; k < 10; ++k) {
    for (int j = 0; j <= 10; ++j) {
      const CapletSpec c{k, 0.01 + 0.005 * j};
      worst = std::max(worst, rel(caplet_fourier(m, c).price, caplet_cir_closed(m, c).price));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("cap-floor parity") {
  for (const CalibratedModel& m : {fixtures::cir_model(), fixtures::gamma_ou_model()}) {
    for (int k : {1, 5, 9}) {
      for (double K : {0.02, 0.045, 0.07}) {
        const CapletSpec c{k, K};
        const double parity = m.tenor.discount(k) - c.bold_strike(m.tenor) * m.tenor.discount(k + 1);
        const double cap = caplet_fourier(m, c).price;
        const double floor = floorlet_fourier(m, c).price;
        CHECK(cap - floor == doctest::Approx(parity).epsilon(1e-8).scale(1.0));
        CHECK(cap >= 0.0);
        CHECK(floor >= 0.0);
      }
    }
  }
}

TEST_CASE("limiting strikes") {
  const CalibratedModel m = fixtures::cir_model();
  // A zero-strike floorlet pays only if the rate turns negative, which it cannot.
  CHECK(floorlet_fourier(m, {3, 0.0}).price <= 1e-12);
  // Rates cannot fall below zero, so a zero-strike caplet is its intrinsic value.
  const double intrinsic = m.tenor.discount(3) - m.tenor.discount(4);
  CHECK(caplet_fourier(m, {3, 0.0}).price == doctest::Approx(intrinsic).epsilon(1e-9));
  CHECK(caplet_cir_closed(m, {3, 0.0}).price == doctest::Approx(intrinsic).epsilon(1e-9));
  CHECK(error_kind([&] { caplet_fourier(m, {3, -0.01}); }) == ErrorKind::InvalidParameter);
  CHECK(caplet_cir_closed(m, {3, 2.0}).price < 1e-12);
}

TEST_CASE("caplets are decreasing and convex in strike") {
  for (const CalibratedModel& m : {fixtures::cir_model(), fixtures::gamma_ou_model()}) {
    for (int k : {2, 7}) {
      std::vector<double> p;
      for (int j = 0; j <= 12; ++j) p.push_back(caplet_fourier(m, {k, 0.01 + 0.005 * j}).price);
      for (std::size_t j = 1; j < p.size(); ++j) CHECK(p[j] <= p[j - 1] + 1e-14);
      for (std::size_t j = 1; j + 1 < p.size(); ++j) CHECK(p[j - 1] - 2.0 * p[j] + p[j + 1] >= -1e-12);
    }
  }
}

TEST_CASE("flat curve gives worthless positive-strike caplets") {
  const TenorStructure flat({0.5, 1.0, 1.5}, {0.95, 0.95, 0.95});
  const CalibratedModel m = fit_term_structure(flat, ProcessSpec(fixtures::cir_params()), scalar(1.25));
  CHECK(caplet_cir_closed(m, {1, 0.02}).price == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(caplet_fourier(m, {1, 0.02}).price) <= 1e-12);
  CHECK(error_kind([&] { swaption_root(m, {1, 3, 0.02}); }) == ErrorKind::NoSignChange);
}

TEST_CASE("two-factor CIR caplets") {
  const CalibratedModel m = fixtures::cir2f_model();
  for (int k : {2, 5, 8}) {
    for (double K : {0.03, 0.04, 0.05}) {
      const CapletSpec c{k, K};
      CHECK(rel(caplet_cir2f_closed(m, c).price, caplet_fourier(m, c).price) <= 1e-6);
    }
  }
  // A second factor started at zero with no mean reversion level stays at zero.
  const CalibratedModel degenerate = fixtures::cir2f_model(0.0, 0.0);
  const CalibratedModel one = fixtures::cir_model();
  for (int k : {2, 5, 8}) {
    const CapletSpec c{k, 0.04};
    const double ref = caplet_cir_closed(one, c).price;
    CHECK(rel(caplet_cir2f_closed(degenerate, c).price, ref) <= 1e-8);
    CHECK(rel(caplet_fourier(degenerate, c).price, ref) <= 1e-8);
  }
  // The mixture route also covers one-factor models.
  CHECK(rel(caplet_cir2f_closed(one, {4, 0.03}).price, caplet_cir_closed(one, {4, 0.03}).price) <= 1e-8);
}

TEST_CASE("swaption root") {
  const CalibratedModel m = fixtures::cir_model();
  const SwaptionSpec s{2, 6, 0.03};
  const double x = swaption_root(m, s);
  const auto c = s.coupons(m.tenor);
  double f = 1.0;
  for (int k = 3; k <= 6; ++k) {
    const auto e = forward_exponents(m, k, 2, m.tenor.date(2));
    f -= c[static_cast<std::size_t>(k - 3)] * std::exp(e.A + e.B(0) * x);
  }
  CHECK(std::abs(f) <= 1e-12);
  // One period: the root is where the LIBOR rate equals the strike.
  const double x1 = swaption_root(m, {4, 5, 0.04});
  CHECK(libor_rate(m, 4, m.tenor.date(4), scalar(x1)) == doctest::Approx(0.04).epsilon(1e-10));
}

TEST_CASE("swaptions against an independent expectation") {
  const CalibratedModel m = fixtures::cir_model();
  for (const SwaptionSpec& s : {SwaptionSpec{1, 3, 0.02}, SwaptionSpec{2, 6, 0.03}, SwaptionSpec{3, 10, 0.04},
                                SwaptionSpec{5, 8, 0.05}, SwaptionSpec{1, 10, 0.03}, SwaptionSpec{7, 10, 0.035},
                                SwaptionSpec{9, 10, 0.04}}) {
    const double ref = swaption_oracle(m, s);
    CHECK(rel(swaption_fourier(m, s).price, ref) <= 1e-7);
    CHECK(rel(swaption_cir_closed(m, s).price, ref) <= 1e-8);
  }
}

TEST_CASE("swaption bounds and reductions") {
  for (const CalibratedModel& m : {fixtures::cir_model(), fixtures::gamma_ou_model()}) {
    for (int i : {1, 4}) {
      double previous = m.tenor.discount(i);
      for (double K : {0.0, 0.02, 0.04, 0.08, 0.2}) {
        const double p = swaption_fourier(m, {i, i + 4, K}).price;
        CHECK(p >= -1e-14);
        CHECK(p <= previous + 1e-14);
        previous = p;
      }
    }
    // A one-period swaption is a caplet.
    for (int i : {2, 6}) {
      CHECK(swaption_fourier(m, {i, i + 1, 0.045}).price ==
            doctest::Approx(caplet_fourier(m, {i, 0.045}).price).epsilon(1e-8));
    }
  }
}

TEST_CASE("Black-76") {
  const double F = 0.04, T = 2.0, annuity = 0.47;
  for (double K : {0.02, 0.04, 0.07}) {
    for (double vol : {0.05, 0.2, 0.8}) {
      const double p = black76_price(vol, F, K, T, annuity);
      // Skip quotes whose time value is lost in rounding.
      if (p - annuity * std::max(F - K, 0.0) < 1e-9 * annuity * F) continue;
      CHECK(black76_implied_vol(p, F, K, T, annuity) == doctest::Approx(vol).epsilon(1e-9));
    }
  }
  CHECK(black76_price(0.0, F, 0.03, T, annuity) == doctest::Approx(annuity * 0.01));
  CHECK(black76_implied_vol(annuity * 0.01, F, 0.03, T, annuity) == 0.0);
  CHECK(error_kind([&] { black76_implied_vol(annuity * 0.0099, F, 0.03, T, annuity); }) ==
        ErrorKind::OutOfBounds);
  CHECK(error_kind([&] { black76_implied_vol(annuity * F * 1.01, F, 0.03, T, annuity); }) ==
        ErrorKind::OutOfBounds);
  CHECK(error_kind([&] { black76_price(-0.1, F, 0.03, T, annuity); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("volatility surface") {
  const CalibratedModel m = fixtures::cir_model();
  std::vector<double> strikes;
  for (int j = 0; j <= 10; ++j) strikes.push_back(0.01 + 0.005 * j);
  const auto fourier = vol_surface(m, strikes, SurfaceMethod::Fourier);
  const auto closed = vol_surface(m, strikes, SurfaceMethod::Closed, {}, 1);
  REQUIRE(fourier.size() == 99);
  REQUIRE(closed.size() == 99);
  for (std::size_t j = 0; j < fourier.size(); ++j) {
    CHECK(fourier[j].ok);
    CHECK(fourier[j].expiry == closed[j].expiry);
    CHECK(fourier[j].implied_vol > 0.0);
    CHECK(std::abs(fourier[j].implied_vol - closed[j].implied_vol) <= 1e-6 * closed[j].implied_vol);
  }
  CHECK(fourier.front().expiry == 0.5);
  CHECK(fourier.back().strike == doctest::Approx(0.06));
  CHECK(parse_surface_method("closed") == SurfaceMethod::Closed);
  CHECK(to_string(SurfaceMethod::Fourier) == "fourier");
  CHECK(error_kind([] { parse_surface_method("monte-carlo"); }) == ErrorKind::ParseError);
}

TEST_CASE("surface cells below the support of the rate are flagged") {
  // Without a jump the Gamma-OU state only decays, which bounds the rate from below.
  const CalibratedModel m = fixtures::gamma_ou_model();
  const GammaOuParams p = fixtures::gamma_ou_params();
  const double t = m.tenor.date(2);
  const double floor = libor_rate(m, 2, t, scalar(p.x0 * std::exp(-p.lambda * t)));
  CHECK(floor < m.tenor.initial_libor(2));
  const auto cells = vol_surface(m, {floor - 0.002, floor + 0.002}, SurfaceMethod::Fourier, {}, 1);
  REQUIRE(cells.size() == 18);
  CHECK_FALSE(cells[2].ok);
  CHECK(std::isnan(cells[2].implied_vol));
  CHECK(cells[2].error.find("intrinsic") != std::string::npos);
  CHECK(cells[3].ok);
  CHECK(cells[3].implied_vol > 0.0);
}

TEST_CASE("pricing errors") {
  const CalibratedModel cir = fixtures::cir_model();
  const CalibratedModel gou = fixtures::gamma_ou_model();
  QuadratureSettings q;
  q.damping = 0.5;
  CHECK(error_kind([&] { caplet_fourier(cir, {2, 0.03}, q); }) == ErrorKind::DampingOutOfStrip);
  q.damping = 0.5;
  CHECK(error_kind([&] { floorlet_fourier(cir, {2, 0.03}, q); }) == ErrorKind::DampingOutOfStrip);
  CHECK(error_kind([&] { caplet_cir_closed(gou, {2, 0.03}); }) == ErrorKind::ModelMismatch);
  CHECK(error_kind([&] { caplet_cir2f_closed(gou, {2, 0.03}); }) == ErrorKind::ModelMismatch);
  CHECK(error_kind([&] { swaption_cir_closed(gou, {2, 4, 0.03}); }) == ErrorKind::ModelMismatch);
  CHECK(error_kind([&] { swaption_fourier(fixtures::cir2f_model(), {2, 4, 0.03}); }) ==
        ErrorKind::ModelMismatch);
  CHECK(error_kind([&] { caplet_fourier(cir, {10, 0.03}); }) == ErrorKind::IndexError);
  CHECK(error_kind([&] { swaption_fourier(cir, {4, 4, 0.03}); }) == ErrorKind::IndexError);
  CHECK(error_kind([&] { swaption_fourier(cir, {4, 11, 0.03}); }) == ErrorKind::IndexError);
}

TEST_CASE("tighter tolerances move prices by less than the tolerance") {
  for (const CalibratedModel& m : {fixtures::cir_model(), fixtures::gamma_ou_model()}) {
    QuadratureSettings loose, tight;
    loose.rel_tol = 1e-8;
    tight.rel_tol = 5e-9;
    for (int k : {1, 6}) {
      const double a = caplet_fourier(m, {k, 0.045}, loose).price;
      const double b = caplet_fourier(m, {k, 0.045}, tight).price;
      CHECK(std::abs(a - b) <= 1e-8 * b);
    }
  }
}

TEST_CASE("explicit dampings give the same price") {
  const CalibratedModel m = fixtures::gamma_ou_model();
  const double base = caplet_fourier(m, {3, 0.05}).price;
  for (double R : {1.2, 3.0}) {
    QuadratureSettings q;
    q.damping = R;
    const auto r = caplet_fourier(m, {3, 0.05}, q);
    CHECK(r.damping == R);
    CHECK(r.price == doctest::Approx(base).epsilon(1e-9));
  }
}

}  // TEST_SUITE
