#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "binopt/grid.hpp"
#include "binopt/model.hpp"
#include "binopt/rng.hpp"
#include "binopt/synthetic.hpp"

namespace binopt {

/// Flat box prior over (theta1, theta2, theta3, sigma0).
struct PriorBox {
  ThetaVec lower{-10.0, -10.0, -10.0, 0.05};
  ThetaVec upper{10.0, 10.0, 10.0, 10.0};

  bool contains(const ThetaVec& theta) const {
    for (int p = 0; p < 4; ++p) {
      if (!(lower[p] <= theta[p] && theta[p] <= upper[p])) return false;
    }
    return true;
  }

  ThetaVec clamp(const ThetaVec& theta) const;

  void validate() const;
};

/// Everything the posterior needs: the (truth-stripped) data, the forward
/// problem, the prior box and the likelihood scale Sigma_eps (price units).
struct PosteriorSpec {
  Observations data;
  GridSpec grid;
  double r = 0.05;
  PriorBox prior;
  double sigma_eps = 0.01;

  void validate() const;
};

/// Likelihood width from the data: sigma_eps = max(level, floor) * RMS(Y).
/// The floor keeps the noiseless posterior proper.
double calibrate_sigma_eps(const std::vector<double>& values,
                           double relative_level, double floor = 0.01);

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Unnormalized log posterior: -||Y - F(theta)||^2 / (2 sigma_eps^2) inside
/// the prior box, -inf outside. A forward-solver failure also maps to -inf;
/// if `failure_log` is given, a diagnostic line is appended per failure.
double log_posterior(const PosteriorSpec& spec, const ThetaVec& theta,
                     std::vector<std::string>* failure_log = nullptr);

/// Any unnormalized log target density over ThetaVec.
using LogDensity = std::function<double(const ThetaVec&)>;

struct McmcState {
  ThetaVec theta{};
  double log_post = kLogZero;
};

struct McmcStepResult {
  McmcState state;
  bool accepted = false;
};

/// One random-walk Metropolis-Hastings step.
///
/// Draw order per step is fixed for replayability: four normals (the
/// componentwise proposal, standard deviations `gamma`), then one uniform.
/// The proposal is accepted iff uniform < min(1, exp(delta log-post)); on
/// rejection the current state is returned unchanged.
McmcStepResult mh_step(const LogDensity& target, const McmcState& current,
                       const ThetaVec& gamma, Rng& rng);

McmcStepResult mh_step(const PosteriorSpec& spec, const McmcState& current,
                       const ThetaVec& gamma, Rng& rng);

struct ChainSettings {
  std::size_t iterations = 100000;
  std::size_t burn_in = 30000;
  ThetaVec gamma{0.02, 0.02, 0.02, 0.01};
  std::uint64_t seed = 0;
  /// Scalar proposal adaptation during burn-in: every window of 1000 steps
  /// the whole gamma vector is halved below 20% acceptance and doubled
  /// above 45%; frozen from burn_in on, so the retained chain is a
  /// time-homogeneous Metropolis-Hastings chain.
  bool adapt = true;

  void validate() const;
};

/// Full sample history (repeats included) with acceptance bookkeeping.
struct Chain {
  std::vector<ThetaVec> samples;
  std::vector<double> log_posts;
  std::vector<std::uint8_t> accepted;  // per-step accept flag
  std::size_t accept_count = 0;
  std::size_t burn_in = 0;
  ThetaVec proposal_gamma{};  // gamma in effect after the burn-in freeze
  std::uint64_t seed = 0;
  std::size_t solver_failures = 0;

  std::size_t size() const { return samples.size(); }
};

/// Thrown when a chain aborts (acceptance rate below 0.5% over the first
/// 5000 steps, the symptom of a mis-scaled proposal).
class ChainError : public std::runtime_error {
 public:
  explicit ChainError(const std::string& what) : std::runtime_error(what) {}
};

/// Runs a full chain from `init` (must be inside the prior box for the
/// posterior overload). Deterministic for a fixed seed.
Chain run_chain(const LogDensity& target, const ThetaVec& init,
                const ChainSettings& settings);

Chain run_chain(const PosteriorSpec& spec, const ThetaVec& init,
                const ChainSettings& settings);

/// Posterior conditional-mean estimate: the arithmetic mean of the samples
/// with index >= burn_in. Throws if burn_in >= chain size.
ThetaVec conditional_mean(const Chain& chain);

struct Histogram {
  std::vector<double> bin_left;
  std::vector<double> bin_right;
  std::vector<double> mass;  // sums to 1
};

/// Histogram of one coordinate over the post-burn-in samples, bin range
/// spanning the sample min/max, counts normalized to unit mass.
Histogram posterior_histogram(const Chain& chain, int coordinate, int n_bins);

/// Effective sample size of one coordinate (post burn-in), via the initial
/// positive sequence estimator on the autocorrelation.
double effective_sample_size(const Chain& chain, int coordinate);

/// CSV with header `k,theta1,theta2,theta3,sigma0,log_post,accepted`; one
/// row per iteration, k starting at 1.
std::string chain_to_csv(const Chain& chain);

/// CSV with header `bin_left,bin_right,mass`.
std::string histogram_to_csv(const Histogram& hist);

}  // namespace binopt
