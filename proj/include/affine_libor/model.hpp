#pragma once

#include <optional>
#include <vector>

#include "affine_libor/affine_core.hpp"
#include "affine_libor/processes.hpp"
#include "affine_libor/types.hpp"

namespace affine_libor {

/// Discrete tenor 0 = T_0 < T_1 < ... < T_N with initial discount factors.
/// Indices follow the tenor: discount(0) = 1, accrual(k) covers [T_k, T_{k+1}].
class TenorStructure {
 public:
  /// `maturities` are T_1..T_N, `discounts` B(0,T_1)..B(0,T_N). Accruals
  /// default to the year fractions T_{k+1} - T_k.
  TenorStructure(std::vector<double> maturities, std::vector<double> discounts,
                 std::optional<std::vector<double>> accruals = std::nullopt);

  int size() const { return static_cast<int>(dates_.size()) - 1; }  // N
  double date(int k) const;
  double discount(int k) const;
  double accrual(int k) const;
  double horizon() const { return dates_.back(); }
  const std::vector<double>& dates() const { return dates_; }

  /// B(0,T_k) / B(0,T_N).
  double ratio(int k) const { return discount(k) / discounts_.back(); }
  /// True when every initial LIBOR rate is non-negative.
  bool non_negative_rates() const;
  double initial_libor(int k) const;

 private:
  std::vector<double> dates_;
  std::vector<double> discounts_;
  std::vector<double> accruals_;
};

/// A driver fitted to an initial curve: M_0^{u_k} = B(0,T_k) / B(0,T_N).
struct CalibratedModel {
  ProcessSpec process;
  Vector x0;
  TenorStructure tenor;
  std::vector<Vector> us;  // u_1..u_N, u_N = 0

  int size() const { return tenor.size(); }
  double horizon() const { return tenor.horizon(); }
  const Vector& u(int k) const;
};

struct CalibrationOptions {
  double tol = 1e-13;
  int max_iterations = 200;
  /// Direction of u_+; defaults to the diagonal (1, ..., 1).
  std::optional<Vector> direction;
};

/// exp(phi_{T_N - t}(u) + <psi_{T_N - t}(u), x>).
double martingale_value(const CalibratedModel& m, double t, const Vector& x, const Vector& u);
double martingale_value(const ProcessSpec& process, double horizon, double t, const Vector& x,
                        const Vector& u);

/// sup of E_1[exp<u, X_T>] over the positive domain; +inf when the MGF blows
/// up at the domain boundary.
double estimate_gamma_x(const ProcessSpec& process, double horizon);

CalibratedModel fit_term_structure(const TenorStructure& tenor, const ProcessSpec& process,
                                   const Vector& x0, const CalibrationOptions& options = {});
inline CalibratedModel fit_term_structure(const TenorStructure& tenor, const ProcessSpec& process,
                                          const Vector& x0, double tol) {
  CalibrationOptions options;
  options.tol = tol;
  return fit_term_structure(tenor, process, x0, options);
}

struct ForwardExponents {
  double A = 0.0;
  Vector B;
};

/// A = phi_{T_N-t}(u_k) - phi_{T_N-t}(u_i), B likewise for psi, so that
/// M_t^{u_k} / M_t^{u_i} = exp(A + <B, X_t>). Requires t <= min(T_k, T_i).
ForwardExponents forward_exponents(const CalibratedModel& m, int k, int i, double t);

/// L(t, T_k) = (exp(A_k + <B_k, x>) - 1) / delta_k.
double libor_rate(const CalibratedModel& m, int k, double t, const Vector& x);
/// (exp(A_k) - 1) / delta_k, the floor of L(t, T_k) over x >= 0 for one-factor drivers.
double libor_lower_bound(const CalibratedModel& m, int k, double t);

/// Exponents of E_{P_{T_k}}[exp<v, X_t>] = exp(phi^k_t(v) + <psi^k_t(v), x>).
template <typename Scalar>
TransformPair<Scalar> forward_measure_exponents(const CalibratedModel& m, int k, double t,
                                                const Vec<Scalar>& v);

/// E_{P_{T_{k+1}}}[exp(v (A_k + <B_k, X_t>))] with A_k, B_k taken at T_N - t.
template <typename Scalar>
Scalar forward_price_mgf(const CalibratedModel& m, int k, double t, Scalar v);

/// Cached form of forward_price_mgf for repeated evaluation along a line.
class ForwardPriceMgf {
 public:
  ForwardPriceMgf(const CalibratedModel& m, int k, double t);

  template <typename Scalar>
  Scalar log_value(Scalar v) const;

  /// Supremum of real v with finite MGF (the upper end of J^k).
  double strip_sup() const;
  double strip_inf() const;
  const ForwardExponents& exponents() const { return exps_; }

 private:
  const CalibratedModel* m_;
  double t_;
  double log_prefactor_;
  double phi_k_, phi_k1_;
  Vector psi_k_, psi_k1_;
  ForwardExponents exps_;
};

/// Cached log E_{P_{T_k}}[exp<v, X_t>].
class ForwardMeasureMgf {
 public:
  ForwardMeasureMgf(const CalibratedModel& m, int k, double t);

  template <typename Scalar>
  Scalar log_value(const Vec<Scalar>& v) const;

  /// Componentwise sup of I^k: v + psi_{T_N-t}(u_k) inside the domain.
  Vector strip_sup() const;

 private:
  const CalibratedModel* m_;
  double t_;
  double phi_shift_;
  Vector shift_;
  Vector psi_base_;
};

}  // namespace affine_libor
