#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "affine_libor/model.hpp"

namespace affine_libor {

/// Deterministic stream of random numbers identified by (seed, stream_id).
/// Sub-streams for path chunks and factors are derived by hashing the
/// identifiers through std::seed_seq, so no coordination is needed.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  std::mt19937_64 engine(std::uint64_t chunk, std::uint64_t factor = 0) const;
};

/// Simulated states on a monitoring grid.
struct PathBatch {
  std::vector<double> times;
  /// states[f](path, time index) for factor f.
  std::vector<Eigen::MatrixXd> states;
  /// Optional per-path Radon-Nikodym weights.
  std::optional<Vector> weights;

  long n_paths() const { return states.empty() ? 0 : static_cast<long>(states[0].rows()); }
  Eigen::Index n_factors() const { return static_cast<Eigen::Index>(states.size()); }
  /// State vector of one path at one time index.
  Vector state(long path, std::size_t time_index) const;
};

/// Paths are generated in chunks of this size, each with its own sub-stream.
constexpr long kPathChunk = 8192;

/// Exact CIR transitions: X_{t+h} | X_t = eta^2 b(h) * chi2(nu, X_t a(h) / (eta^2 b(h))).
PathBatch simulate_cir(const CirParams& p, const std::vector<double>& times, long n_paths,
                       const RngStream& rng);
/// Exact Gamma-OU transitions: decay plus Poisson(lambda beta h) decayed Exp(alpha) jumps.
PathBatch simulate_gamma_ou(const GammaOuParams& p, const std::vector<double>& times, long n_paths,
                            const RngStream& rng);
/// Simulates CIR, Gamma-OU, or independent products of them. `x0` overrides
/// the initial state in the parameter records when given.
PathBatch simulate(const ProcessSpec& process, const std::vector<double>& times, long n_paths,
                   const RngStream& rng, const std::optional<Vector>& x0 = std::nullopt);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
};

/// Payoff depending on the state at one time.
struct StatePayoff {
  double time = 0.0;
  std::function<double(const Vector&)> value;
};

/// B(0,T_k) E_{P_{T_k}}[payoff], simulated under the terminal measure and
/// reweighted by M_t^{u_k} / M_0^{u_k}.
McEstimate mc_price(const CalibratedModel& m, const StatePayoff& payoff, int measure_index,
                    long n_paths, const RngStream& rng);

/// Mean of M_t^{u_k} / M_0^{u_k} over terminal-measure paths.
McEstimate mc_weight_mean(const CalibratedModel& m, int k, double t, long n_paths,
                          const RngStream& rng);

/// MC caplet and swaption payoffs in forward-price form.
StatePayoff caplet_payoff(const CalibratedModel& m, int k, double strike);
StatePayoff swaption_payoff(const CalibratedModel& m, int i, int end, double strike);

struct MartingaleReport {
  int k = 0;
  double t = 0.0;
  double expected = 0.0;  // M_0^{u_k}
  double mean = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double min = 0.0;
  long n_paths = 0;
};

MartingaleReport martingale_check(const CalibratedModel& m, int k, double t, long n_paths,
                                  const RngStream& rng);
/// Same check for several k on one set of paths.
std::vector<MartingaleReport> martingale_check_all(const CalibratedModel& m, double t,
                                                   long n_paths, const RngStream& rng);

/// Mean and standard error of the samples, reduced pairwise.
McEstimate sample_statistics(const std::vector<double>& samples);

/// CSV dump with header path_id,time,factor_index,state,weight.
void write_paths_csv(std::ostream& os, const PathBatch& batch, long max_paths = -1);

}  // namespace affine_libor
