#pragma once

#include <optional>
#include <string>
#include <vector>

#include "affine_libor/model.hpp"

namespace affine_libor {

/// Caplet on L(T_k, T_k) paid at T_{k+1}; the same record describes the floorlet.
struct CapletSpec {
  int period_index = 1;  // k
  double strike = 0.0;   // simple rate K

  /// 1 + delta_k K.
  double bold_strike(const TenorStructure& tenor) const;
};

/// Payer swaption exercised at T_i on the swap paying over T_{i+1}..T_m.
struct SwaptionSpec {
  int start_index = 1;  // i
  int end_index = 2;    // m
  double strike = 0.0;

  /// c_k for k = i+1..m, returned in that order.
  std::vector<double> coupons(const TenorStructure& tenor) const;
};

struct QuadratureSettings {
  /// Damping R; a default inside the admissible strip is chosen when unset.
  std::optional<double> damping;
  double truncation = 1e14;
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
};

struct PriceResult {
  double price = 0.0;
  double error_estimate = 0.0;
  std::optional<double> damping;
  std::optional<double> root;
  std::string method;
};

PriceResult caplet_fourier(const CalibratedModel& m, const CapletSpec& c,
                           const QuadratureSettings& q = {});
PriceResult floorlet_fourier(const CalibratedModel& m, const CapletSpec& c,
                             const QuadratureSettings& q = {});

/// One-factor CIR caplet through non-central chi-square tails.
PriceResult caplet_cir_closed(const CalibratedModel& m, const CapletSpec& c);
/// Caplet for independent CIR factors through the distribution of a positive
/// combination of non-central chi-square variables.
PriceResult caplet_cir2f_closed(const CalibratedModel& m, const CapletSpec& c);

/// Zero of f(x) = 1 - sum_k c_k exp(A_{k,i} + B_{k,i} x) for a one-dimensional driver.
double swaption_root(const CalibratedModel& m, const SwaptionSpec& s);
PriceResult swaption_fourier(const CalibratedModel& m, const SwaptionSpec& s,
                             const QuadratureSettings& q = {});
PriceResult swaption_cir_closed(const CalibratedModel& m, const SwaptionSpec& s);

/// Black-76 caplet price annuity * (F N(d1) - K N(d2)); annuity = delta B(0, T_{k+1}).
double black76_price(double vol, double forward_rate, double strike, double expiry, double annuity);
double black76_implied_vol(double price, double forward_rate, double strike, double expiry,
                           double annuity);

enum class SurfaceMethod { Fourier, Closed };

SurfaceMethod parse_surface_method(const std::string& name);
std::string to_string(SurfaceMethod method);

struct SurfaceCell {
  double expiry = 0.0;
  double strike = 0.0;
  double price = 0.0;
  double implied_vol = 0.0;
  bool ok = true;
  std::string error;
};

/// Caplet prices and Black vols for every k = 1..N-1 and strike, expiry-major.
/// Cells that fail carry NaN fields and the error text instead of aborting.
std::vector<SurfaceCell> vol_surface(const CalibratedModel& m, const std::vector<double>& strikes,
                                     SurfaceMethod method, const QuadratureSettings& q = {},
                                     unsigned threads = 0);

}  // namespace affine_libor
