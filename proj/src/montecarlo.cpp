#include "affine_libor/montecarlo.hpp"

#include <cmath>
#include <ostream>
#include <span>

#include "affine_libor/errors.hpp"
#include "affine_libor/parallel.hpp"
#include "affine_libor/pricing.hpp"

namespace affine_libor {

std::mt19937_64 RngStream::engine(std::uint64_t chunk, std::uint64_t factor) const {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream_id), hi(stream_id),
                    lo(chunk), hi(chunk), lo(factor), hi(factor)};
  return std::mt19937_64(seq);
}

Vector PathBatch::state(long path, std::size_t time_index) const {
  Vector x(n_factors());
  for (Eigen::Index f = 0; f < n_factors(); ++f) {
    x(f) = states[static_cast<std::size_t>(f)](path, static_cast<Eigen::Index>(time_index));
  }
  return x;
}

namespace {

void check_grid(const std::vector<double>& times, long n_paths) {
  if (times.empty() || times.front() != 0.0) {
    throw Error(ErrorKind::InvalidGrid, "monitoring grid must start at 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1]) || !std::isfinite(times[i])) {
      throw Error(ErrorKind::InvalidGrid, "monitoring grid must be strictly increasing");
    }
  }
  if (n_paths < 1) throw Error(ErrorKind::InvalidParameter, "need at least one path");
}

long poisson_draw(double mean, std::mt19937_64& eng) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<long>(mean)(eng);
}

// Fills one factor's (paths x times) matrix chunk by chunk; `step` maps
// (state, step index, engine) to the next state.
template <typename Step>
Eigen::MatrixXd simulate_factor(const std::vector<double>& times, long n_paths, double x0,
                                const RngStream& rng, std::uint64_t factor, Step&& step) {
  Eigen::MatrixXd out(n_paths, static_cast<Eigen::Index>(times.size()));
  const long n_chunks = (n_paths + kPathChunk - 1) / kPathChunk;
  parallel_for(static_cast<std::size_t>(n_chunks), [&](std::size_t c) {
    auto eng = rng.engine(c, factor);
    const long first = static_cast<long>(c) * kPathChunk;
    const long last = std::min(n_paths, first + kPathChunk);
    for (long p = first; p < last; ++p) {
      double x = x0;
      out(p, 0) = x;
      for (std::size_t i = 1; i < times.size(); ++i) {
        x = step(x, i, eng);
        out(p, static_cast<Eigen::Index>(i)) = x;
      }
    }
  });
  return out;
}

Eigen::MatrixXd cir_factor(const CirParams& p, double x0, const std::vector<double>& times,
                           long n_paths, const RngStream& rng, std::uint64_t factor) {
  struct StepConst {
    double a, s, drift;
  };
  std::vector<StepConst> k(times.size());
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double h = times[i] - times[i - 1];
    const double b = cir_b(p, h);
    k[i] = {cir_a(p, h), p.eta * p.eta * b, p.lambda * p.theta * b};
  }
  const double half_nu = p.eta > 0.0 ? 0.5 * p.lambda * p.theta / (p.eta * p.eta) : 0.0;
  return simulate_factor(times, n_paths, x0, rng, factor, [&](double x, std::size_t i, auto& eng) {
    const StepConst& c = k[i];
    if (c.s == 0.0) return x * c.a + c.drift;
    const long n = poisson_draw(0.5 * x * c.a / c.s, eng);
    const double shape = half_nu + static_cast<double>(n);
    if (!(shape > 0.0)) return 0.0;
    return 2.0 * c.s * std::gamma_distribution<double>(shape, 1.0)(eng);
  });
}

Eigen::MatrixXd gamma_ou_factor(const GammaOuParams& p, double x0, const std::vector<double>& times,
                                long n_paths, const RngStream& rng, std::uint64_t factor) {
  return simulate_factor(times, n_paths, x0, rng, factor, [&](double x, std::size_t i, auto& eng) {
    std::exponential_distribution<double> jump(p.alpha);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double h = times[i] - times[i - 1];
    double next = x * std::exp(-p.lambda * h);
    const long n = poisson_draw(p.lambda * p.beta * h, eng);
    for (long j = 0; j < n; ++j) {
      const double tau = h * unif(eng);
      next += jump(eng) * std::exp(-p.lambda * (h - tau));
    }
    return next;
  });
}

Eigen::MatrixXd one_factor(const ProcessSpec& f, double x0, const std::vector<double>& times,
                           long n_paths, const RngStream& rng, std::uint64_t factor) {
  if (const auto* p = f.get_if<CirParams>()) return cir_factor(*p, x0, times, n_paths, rng, factor);
  if (const auto* p = f.get_if<GammaOuParams>()) {
    return gamma_ou_factor(*p, x0, times, n_paths, rng, factor);
  }
  throw Error(ErrorKind::InvalidParameter, "no exact sampler for the " + f.family() + " driver");
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 64) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.subspan(0, mid)) + pairwise_sum(v.subspan(mid));
}

}  // namespace

PathBatch simulate_cir(const CirParams& p, const std::vector<double>& times, long n_paths,
                       const RngStream& rng) {
  check_grid(times, n_paths);
  ProcessSpec checked(p);
  PathBatch batch;
  batch.times = times;
  batch.states.push_back(cir_factor(p, p.x0, times, n_paths, rng, 0));
  return batch;
}

PathBatch simulate_gamma_ou(const GammaOuParams& p, const std::vector<double>& times, long n_paths,
                            const RngStream& rng) {
  check_grid(times, n_paths);
  ProcessSpec checked(p);
  PathBatch batch;
  batch.times = times;
  batch.states.push_back(gamma_ou_factor(p, p.x0, times, n_paths, rng, 0));
  return batch;
}

PathBatch simulate(const ProcessSpec& process, const std::vector<double>& times, long n_paths,
                   const RngStream& rng, const std::optional<Vector>& x0) {
  check_grid(times, n_paths);
  const Vector start = x0.value_or(process.initial_state());
  if (start.size() != process.dimension()) {
    throw Error(ErrorKind::InvalidParameter, "initial state has wrong dimension");
  }
  PathBatch batch;
  batch.times = times;
  if (const auto* prod = process.get_if<ProductProcess>()) {
    Eigen::Index offset = 0;
    for (std::size_t f = 0; f < prod->factors.size(); ++f) {
      const auto& factor = prod->factors[f];
      if (factor.dimension() != 1) {
        throw Error(ErrorKind::InvalidParameter, "nested multi-dimensional factors are not simulated");
      }
      batch.states.push_back(one_factor(factor, start(offset), times, n_paths, rng, f));
      offset += 1;
    }
  } else {
    batch.states.push_back(one_factor(process, start(0), times, n_paths, rng, 0));
  }
  return batch;
}

McEstimate sample_statistics(const std::vector<double>& samples) {
  McEstimate out;
  out.n_paths = static_cast<long>(samples.size());
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  out.estimate = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double d = samples[i] - out.estimate;
      sq[i] = d * d;
    }
    out.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return out;
}

namespace {

// Per-path ratios M_t^{u_k} / M_0^{u_k} at time index `ti` of the batch.
std::vector<double> density_weights(const CalibratedModel& m, int k, const PathBatch& batch,
                                    std::size_t ti) {
  const double t = batch.times[ti];
  const auto tr = transform<double>(m.process, m.horizon() - t, m.u(k), m.horizon());
  const double log_m0 = std::log(m.tenor.ratio(k));
  std::vector<double> w(static_cast<std::size_t>(batch.n_paths()));
  for (long p = 0; p < batch.n_paths(); ++p) {
    w[static_cast<std::size_t>(p)] = std::exp(tr.phi + tr.psi.dot(batch.state(p, ti)) - log_m0);
  }
  return w;
}

std::vector<double> terminal_grid(double t) {
  return t > 0.0 ? std::vector<double>{0.0, t} : std::vector<double>{0.0};
}

}  // namespace

McEstimate mc_price(const CalibratedModel& m, const StatePayoff& payoff, int measure_index,
                    long n_paths, const RngStream& rng) {
  if (measure_index < 1 || measure_index > m.size()) {
    throw Error(ErrorKind::IndexError, "measure index outside [1, N]");
  }
  if (!(payoff.time >= 0.0) || payoff.time > m.tenor.date(measure_index)) {
    throw Error(ErrorKind::HorizonViolation, "payoff time must lie in [0, T_k]");
  }
  const auto times = terminal_grid(payoff.time);
  const PathBatch batch = simulate(m.process, times, n_paths, rng, m.x0);
  const std::size_t ti = times.size() - 1;
  std::vector<double> samples = density_weights(m, measure_index, batch, ti);
  for (long p = 0; p < n_paths; ++p) {
    samples[static_cast<std::size_t>(p)] *= payoff.value(batch.state(p, ti));
  }
  McEstimate est = sample_statistics(samples);
  const double scale = m.tenor.discount(measure_index);
  est.estimate *= scale;
  est.std_error *= scale;
  return est;
}

McEstimate mc_weight_mean(const CalibratedModel& m, int k, double t, long n_paths,
                          const RngStream& rng) {
  if (k < 1 || k > m.size()) throw Error(ErrorKind::IndexError, "measure index outside [1, N]");
  const auto times = terminal_grid(t);
  const PathBatch batch = simulate(m.process, times, n_paths, rng, m.x0);
  return sample_statistics(density_weights(m, k, batch, times.size() - 1));
}

StatePayoff caplet_payoff(const CalibratedModel& m, int k, double strike) {
  if (k < 1 || k > m.size() - 1) throw Error(ErrorKind::IndexError, "caplet index outside [1, N-1]");
  const double Tk = m.tenor.date(k);
  const auto e = forward_exponents(m, k, k + 1, Tk);
  const double bold = CapletSpec{k, strike}.bold_strike(m.tenor);
  return {Tk, [e, bold](const Vector& x) { return std::max(std::exp(e.A + e.B.dot(x)) - bold, 0.0); }};
}

StatePayoff swaption_payoff(const CalibratedModel& m, int i, int end, double strike) {
  if (i < 1 || end <= i || end > m.size()) throw Error(ErrorKind::IndexError, "swaption needs 1 <= i < m <= N");
  const double Ti = m.tenor.date(i);
  const auto c = SwaptionSpec{i, end, strike}.coupons(m.tenor);
  std::vector<ForwardExponents> e;
  for (int k = i + 1; k <= end; ++k) e.push_back(forward_exponents(m, k, i, Ti));
  return {Ti, [c, e](const Vector& x) {
            double f = 1.0;
            for (std::size_t j = 0; j < c.size(); ++j) f -= c[j] * std::exp(e[j].A + e[j].B.dot(x));
            return std::max(f, 0.0);
          }};
}

std::vector<MartingaleReport> martingale_check_all(const CalibratedModel& m, double t,
                                                   long n_paths, const RngStream& rng) {
  if (!(t >= 0.0) || t > m.horizon()) throw Error(ErrorKind::HorizonViolation, "t outside [0, T_N]");
  const auto times = terminal_grid(t);
  const PathBatch batch = simulate(m.process, times, n_paths, rng, m.x0);
  const std::size_t ti = times.size() - 1;
  std::vector<MartingaleReport> out;
  for (int k = 1; k <= m.size(); ++k) {
    const auto tr = transform<double>(m.process, m.horizon() - t, m.u(k), m.horizon());
    std::vector<double> values(static_cast<std::size_t>(n_paths));
    double lowest = std::numeric_limits<double>::infinity();
    for (long p = 0; p < n_paths; ++p) {
      const double v = std::exp(tr.phi + tr.psi.dot(batch.state(p, ti)));
      values[static_cast<std::size_t>(p)] = v;
      lowest = std::min(lowest, v);
    }
    const McEstimate s = sample_statistics(values);
    MartingaleReport r;
    r.k = k;
    r.t = t;
    r.expected = martingale_value(m, 0.0, m.x0, m.u(k));
    r.mean = s.estimate;
    r.std_error = s.std_error;
    r.z = s.std_error > 0.0 ? (s.estimate - r.expected) / s.std_error : 0.0;
    r.min = lowest;
    r.n_paths = n_paths;
    out.push_back(r);
  }
  return out;
}

MartingaleReport martingale_check(const CalibratedModel& m, int k, double t, long n_paths,
                                  const RngStream& rng) {
  if (k < 1 || k > m.size()) throw Error(ErrorKind::IndexError, "index outside [1, N]");
  return martingale_check_all(m, t, n_paths, rng)[static_cast<std::size_t>(k - 1)];
}

void write_paths_csv(std::ostream& os, const PathBatch& batch, long max_paths) {
  const long n = max_paths < 0 ? batch.n_paths() : std::min(max_paths, batch.n_paths());
  char buf[160];
  os << "path_id,time,factor_index,state,weight\n";
  for (long p = 0; p < n; ++p) {
    const double w = batch.weights ? (*batch.weights)(p) : 1.0;
    for (std::size_t i = 0; i < batch.times.size(); ++i) {
      for (Eigen::Index f = 0; f < batch.n_factors(); ++f) {
        std::snprintf(buf, sizeof buf, "%ld,%.12g,%ld,%.12g,%.12g\n", p, batch.times[i],
                      static_cast<long>(f),
                      batch.states[static_cast<std::size_t>(f)](p, static_cast<Eigen::Index>(i)), w);
        os << buf;
      }
    }
  }
}

}  // namespace affine_libor
