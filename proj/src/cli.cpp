#include "affine_libor/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "affine_libor/errors.hpp"
#include "affine_libor/montecarlo.hpp"

namespace affine_libor {

Command parse_command(const std::string& name) {
  if (name == "calibrate") return Command::Calibrate;
  if (name == "caplet") return Command::Caplet;
  if (name == "swaption") return Command::Swaption;
  if (name == "surface") return Command::Surface;
  if (name == "validate") return Command::Validate;
  throw Error(ErrorKind::ParseError,
              "unknown command '" + name + "' (calibrate|caplet|swaption|surface|validate)");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_u_file(std::ostream& os, const CalibratedModel& m) {
  for (int k = 1; k <= m.size(); ++k) {
    const Vector& u = m.u(k);
    for (Eigen::Index j = 0; j < u.size(); ++j) os << (j ? "," : "") << format_number(u(j));
    os << '\n';
  }
}

void write_surface_csv(std::ostream& os, const std::vector<SurfaceCell>& cells) {
  os << "expiry,strike,price,implied_vol\n";
  for (const auto& c : cells) {
    os << format_number(c.expiry) << ',' << format_number(c.strike) << ',' << format_number(c.price)
       << ',' << format_number(c.implied_vol) << '\n';
  }
}

namespace {

bool has_closed_caplet(const ProcessSpec& p) {
  if (p.get_if<CirParams>()) return true;
  const auto* prod = p.get_if<ProductProcess>();
  if (!prod) return false;
  for (const auto& f : prod->factors) {
    if (!f.get_if<CirParams>()) return false;
  }
  return true;
}

PriceResult price_caplet(const CalibratedModel& m, const CapletSpec& c, SurfaceMethod method,
                         const QuadratureSettings& q) {
  if (method == SurfaceMethod::Fourier) return caplet_fourier(m, c, q);
  if (m.process.get_if<CirParams>()) return caplet_cir_closed(m, c);
  return caplet_cir2f_closed(m, c);
}

class Report {
 public:
  explicit Report(std::ostream& os) : os_(os) {}

  void check(const std::string& name, bool ok, const std::string& detail) {
    os_ << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    all_ &= ok;
  }
  bool all() const { return all_; }

 private:
  std::ostream& os_;
  bool all_ = true;
};

bool validate(const CalibratedModel& m, const RunConfig& cfg, std::uint64_t seed, std::ostream& os) {
  Report r(os);
  double worst = 0.0;
  for (int k = 1; k <= m.size(); ++k) {
    worst = std::max(worst, std::abs(martingale_value(m, 0.0, m.x0, m.u(k)) - m.tenor.ratio(k)));
  }
  r.check("calibration", worst <= 10.0 * cfg.calibration.tol,
          "max |M_0^{u_k} - B(0,T_k)/B(0,T_N)| = " + format_number(worst));

  const double T = m.horizon();
  std::uint64_t stream = 0;
  for (double t : {0.25 * T, 0.5 * T, 0.75 * T}) {
    double worst_z = 0.0;
    double lowest = INFINITY;
    for (const auto& rep : martingale_check_all(m, t, cfg.mc_paths, {seed, stream++})) {
      worst_z = std::max(worst_z, std::abs(rep.z));
      lowest = std::min(lowest, rep.min);
    }
    r.check("martingale t=" + format_number(t), worst_z <= 3.0 && lowest >= 1.0,
            "max |z| = " + format_number(worst_z) + ", min M = " + format_number(lowest));
  }

  const int k = std::clamp(cfg.caplet_index, 1, m.size() - 1);
  const CapletSpec c{k, cfg.caplet_strike};
  const double fourier = caplet_fourier(m, c, cfg.quadrature).price;
  const McEstimate mc = mc_price(m, caplet_payoff(m, k, c.strike), k + 1, cfg.mc_paths, {seed, stream++});
  const double z = (mc.estimate - fourier) / mc.std_error;
  r.check("caplet_mc k=" + std::to_string(k), std::abs(z) <= 3.0,
          "fourier " + format_number(fourier) + ", mc " + format_number(mc.estimate) + " +- " +
              format_number(mc.std_error));

  if (has_closed_caplet(m.process)) {
    const double closed = price_caplet(m, c, SurfaceMethod::Closed, cfg.quadrature).price;
    const double rel = std::abs(closed - fourier) / std::abs(closed);
    r.check("caplet_closed k=" + std::to_string(k), rel <= 1e-6,
            "closed " + format_number(closed) + ", relative gap " + format_number(rel));
  }
  if (m.process.get_if<CirParams>() && cfg.swaption_end > cfg.swaption_start) {
    const SwaptionSpec s{cfg.swaption_start, cfg.swaption_end, cfg.swaption_strike};
    const double a = swaption_fourier(m, s, cfg.quadrature).price;
    const double b = swaption_cir_closed(m, s).price;
    const double rel = std::abs(a - b) / std::abs(b);
    r.check("swaption_closed", rel <= 1e-6,
            "fourier " + format_number(a) + ", closed " + format_number(b));
  }
  os << "validate: " << (r.all() ? "PASS" : "FAIL") << '\n';
  return r.all();
}

// Sends output to the --out file when given, otherwise to `fallback`.
void emit(const CliOptions& opts, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (!opts.out) {
    body(fallback);
    return;
  }
  std::ofstream file(*opts.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::ParseError, "cannot write " + opts.out->string());
  body(file);
}

}  // namespace

int run_command(Command cmd, const RunConfig& cfg, const CliOptions& opts, std::ostream& out,
                std::ostream& err) {
  try {
    const TenorStructure tenor = load_tenor_csv(cfg.tenor_file);
    const CalibratedModel m = fit_term_structure(tenor, cfg.process, cfg.x0, cfg.calibration);
    const SurfaceMethod method = opts.method.value_or(cfg.method.value_or(SurfaceMethod::Fourier));
    const std::uint64_t seed = opts.seed.value_or(cfg.seed);

    switch (cmd) {
      case Command::Calibrate:
        emit(opts, out, [&](std::ostream& os) { write_u_file(os, m); });
        return kExitOk;
      case Command::Caplet: {
        const CapletSpec c{cfg.caplet_index, cfg.caplet_strike};
        const PriceResult p = price_caplet(m, c, method, cfg.quadrature);
        const int k = c.period_index;
        const double annuity = tenor.accrual(k) * tenor.discount(k + 1);
        const double vol = black76_implied_vol(p.price, tenor.initial_libor(k), c.strike, tenor.date(k), annuity);
        emit(opts, out, [&](std::ostream& os) {
          os << "method = " << p.method << "\nindex = " << k << "\nstrike = " << format_number(c.strike)
             << "\nprice = " << format_number(p.price)
             << "\nerror_estimate = " << format_number(p.error_estimate)
             << "\ndamping = " << (p.damping ? format_number(*p.damping) : "none")
             << "\nforward_rate = " << format_number(tenor.initial_libor(k))
             << "\nimplied_vol = " << format_number(vol) << '\n';
        });
        return kExitOk;
      }
      case Command::Swaption: {
        const SwaptionSpec s{cfg.swaption_start, cfg.swaption_end, cfg.swaption_strike};
        const PriceResult p = method == SurfaceMethod::Fourier ? swaption_fourier(m, s, cfg.quadrature)
                                                               : swaption_cir_closed(m, s);
        emit(opts, out, [&](std::ostream& os) {
          os << "method = " << p.method << "\nstart = " << s.start_index << "\nend = " << s.end_index
             << "\nstrike = " << format_number(s.strike) << "\nprice = " << format_number(p.price)
             << "\nerror_estimate = " << format_number(p.error_estimate)
             << "\ndamping = " << (p.damping ? format_number(*p.damping) : "none")
             << "\nroot = " << format_number(p.root.value_or(NAN)) << '\n';
        });
        return kExitOk;
      }
      case Command::Surface: {
        if (cfg.strikes.empty()) throw Error(ErrorKind::ParseError, "surface.strikes is not set");
        const auto cells = vol_surface(m, cfg.strikes, method, cfg.quadrature, cfg.threads);
        emit(opts, out, [&](std::ostream& os) { write_surface_csv(os, cells); });
        long failed = 0;
        for (const auto& c : cells) {
          if (!c.ok) {
            ++failed;
            err << "warning: cell expiry " << format_number(c.expiry) << " strike "
                << format_number(c.strike) << ": " << c.error << '\n';
          }
        }
        err << "surface: " << cells.size() << " cells, " << failed << " failed\n";
        return kExitOk;
      }
      case Command::Validate: {
        std::ostringstream report;
        const bool ok = validate(m, cfg, seed, report);
        emit(opts, out, [&](std::ostream& os) { os << report.str(); });
        return ok ? kExitOk : kExitValidationFailed;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace affine_libor
