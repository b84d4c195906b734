#include "binopt/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binopt/csv.hpp"
#include "binopt/pde.hpp"

namespace binopt {

ThetaVec PriorBox::clamp(const ThetaVec& theta) const {
  ThetaVec out = theta;
  for (int p = 0; p < 4; ++p) {
    out[p] = std::clamp(out[p], lower[p], upper[p]);
  }
  return out;
}

void PriorBox::validate() const {
  for (int p = 0; p < 4; ++p) {
    if (!std::isfinite(lower[p]) || !std::isfinite(upper[p]) ||
        !(lower[p] < upper[p])) {
      throw std::invalid_argument(
          "PriorBox: lower must be strictly below upper in every coordinate");
    }
  }
  if (!(lower[3] > 0.0)) {
    throw std::invalid_argument("PriorBox: sigma0 lower bound must be > 0");
  }
}

void PosteriorSpec::validate() const {
  grid.validate();
  prior.validate();
  if (data.points.empty() || data.points.size() != data.values.size()) {
    throw std::invalid_argument("PosteriorSpec: empty or mismatched data");
  }
  for (double p : data.points) {
    if (p < grid.y_min || p > grid.y_max) {
      throw std::invalid_argument(
          "PosteriorSpec: measurement point outside the grid");
    }
  }
  if (!(sigma_eps > 0.0) || !std::isfinite(sigma_eps)) {
    throw std::invalid_argument("PosteriorSpec: sigma_eps must be > 0");
  }
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("PosteriorSpec: r must be finite and >= 0");
  }
}

double calibrate_sigma_eps(const std::vector<double>& values,
                           double relative_level, double floor) {
  if (values.empty()) {
    throw std::invalid_argument("calibrate_sigma_eps: empty data");
  }
  double ssq = 0.0;
  for (double v : values) ssq += v * v;
  const double rms = std::sqrt(ssq / static_cast<double>(values.size()));
  if (!(rms > 0.0)) {
    throw std::invalid_argument("calibrate_sigma_eps: data has zero RMS");
  }
  return std::max(relative_level, floor) * rms;
}

double log_posterior(const PosteriorSpec& spec, const ThetaVec& theta,
                     std::vector<std::string>* failure_log) {
  for (double t : theta) {
    if (!std::isfinite(t)) return kLogZero;
  }
  if (!spec.prior.contains(theta)) return kLogZero;
  std::vector<double> predicted;
  try {
    predicted = forward_observe(ModelParams::from_theta(theta, spec.r),
                                spec.grid, spec.data.points);
  } catch (const std::exception& e) {
    if (failure_log) {
      std::ostringstream msg;
      msg << "forward solve failed at theta=(" << theta[0] << ", " << theta[1]
          << ", " << theta[2] << ", " << theta[3] << "): " << e.what();
      failure_log->push_back(msg.str());
    }
    return kLogZero;
  }
  double ssq = 0.0;
  for (std::size_t j = 0; j < predicted.size(); ++j) {
    const double d = spec.data.values[j] - predicted[j];
    ssq += d * d;
  }
  if (!std::isfinite(ssq)) return kLogZero;
  return -ssq / (2.0 * spec.sigma_eps * spec.sigma_eps);
}

McmcStepResult mh_step(const LogDensity& target, const McmcState& current,
                       const ThetaVec& gamma, Rng& rng) {
  ThetaVec proposal;
  for (int p = 0; p < 4; ++p) {
    proposal[p] = current.theta[p] + gamma[p] * rng.normal();
  }
  const double u = rng.uniform();

  const double log_prop = target(proposal);
  if (log_prop == kLogZero) {
    return {current, false};  // zero-probability proposal, acceptance 0
  }
  const double delta = log_prop - current.log_post;
  const bool accept =
      current.log_post == kLogZero || u < std::min(1.0, std::exp(delta));
  if (accept) {
    return {McmcState{proposal, log_prop}, true};
  }
  return {current, false};
}

McmcStepResult mh_step(const PosteriorSpec& spec, const McmcState& current,
                       const ThetaVec& gamma, Rng& rng) {
  return mh_step(
      [&spec](const ThetaVec& t) { return log_posterior(spec, t); }, current,
      gamma, rng);
}

void ChainSettings::validate() const {
  if (iterations == 0) {
    throw std::invalid_argument("ChainSettings: iterations must be >= 1");
  }
  if (burn_in >= iterations) {
    throw std::invalid_argument(
        "ChainSettings: burn_in must be below iterations");
  }
  for (double g : gamma) {
    if (!std::isfinite(g) || g < 0.0) {
      throw std::invalid_argument("ChainSettings: gamma must be >= 0");
    }
  }
}

namespace {

constexpr std::size_t kAdaptWindow = 1000;
constexpr std::size_t kAbortCheckAt = 5000;
constexpr double kAbortRate = 0.005;
constexpr double kAdaptLow = 0.20;
constexpr double kAdaptHigh = 0.45;

}  // namespace

Chain run_chain(const LogDensity& target, const ThetaVec& init,
                const ChainSettings& settings) {
  settings.validate();
  Rng rng(settings.seed);
  ThetaVec gamma = settings.gamma;

  Chain chain;
  chain.samples.reserve(settings.iterations);
  chain.log_posts.reserve(settings.iterations);
  chain.accepted.reserve(settings.iterations);
  chain.burn_in = settings.burn_in;
  chain.seed = settings.seed;

  McmcState state{init, target(init)};
  std::size_t window_accepts = 0;
  for (std::size_t k = 0; k < settings.iterations; ++k) {
    const auto result = mh_step(target, state, gamma, rng);
    state = result.state;
    chain.samples.push_back(state.theta);
    chain.log_posts.push_back(state.log_post);
    chain.accepted.push_back(result.accepted ? 1 : 0);
    if (result.accepted) {
      ++chain.accept_count;
      ++window_accepts;
    }

    if (k + 1 == kAbortCheckAt && settings.iterations >= kAbortCheckAt &&
        chain.accept_count <
            static_cast<std::size_t>(kAbortRate * kAbortCheckAt)) {
      std::ostringstream msg;
      msg << "chain aborted: acceptance rate "
          << static_cast<double>(chain.accept_count) / kAbortCheckAt
          << " over the first " << kAbortCheckAt
          << " steps is below " << kAbortRate
          << " (mis-scaled proposal gamma?)";
      throw ChainError(msg.str());
    }

    if (settings.adapt && k + 1 <= settings.burn_in &&
        (k + 1) % kAdaptWindow == 0) {
      const double rate =
          static_cast<double>(window_accepts) / kAdaptWindow;
      if (rate < kAdaptLow) {
        for (double& g : gamma) g *= 0.5;
      } else if (rate > kAdaptHigh) {
        for (double& g : gamma) g *= 2.0;
      }
      window_accepts = 0;
    }
  }
  chain.proposal_gamma = gamma;
  return chain;
}

Chain run_chain(const PosteriorSpec& spec, const ThetaVec& init,
                const ChainSettings& settings) {
  spec.validate();
  if (!spec.prior.contains(init)) {
    throw std::invalid_argument("run_chain: init outside the prior box");
  }
  std::vector<std::string> failures;
  Chain chain = run_chain(
      [&spec, &failures](const ThetaVec& t) {
        return log_posterior(spec, t, &failures);
      },
      init, settings);
  chain.solver_failures = failures.size();
  return chain;
}

ThetaVec conditional_mean(const Chain& chain) {
  if (chain.burn_in >= chain.size()) {
    throw std::invalid_argument(
        "conditional_mean: burn-in leaves no samples");
  }
  ThetaVec sum{0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = chain.burn_in; k < chain.size(); ++k) {
    for (int p = 0; p < 4; ++p) sum[p] += chain.samples[k][p];
  }
  const double count = static_cast<double>(chain.size() - chain.burn_in);
  for (double& s : sum) s /= count;
  return sum;
}

Histogram posterior_histogram(const Chain& chain, int coordinate,
                              int n_bins) {
  if (coordinate < 0 || coordinate > 3) {
    throw std::invalid_argument("posterior_histogram: coordinate in 0..3");
  }
  if (n_bins < 1) {
    throw std::invalid_argument("posterior_histogram: n_bins must be >= 1");
  }
  if (chain.burn_in >= chain.size()) {
    throw std::invalid_argument(
        "posterior_histogram: empty post-burn-in segment");
  }
  double lo = chain.samples[chain.burn_in][coordinate];
  double hi = lo;
  for (std::size_t k = chain.burn_in; k < chain.size(); ++k) {
    lo = std::min(lo, chain.samples[k][coordinate]);
    hi = std::max(hi, chain.samples[k][coordinate]);
  }
  const std::size_t count = chain.size() - chain.burn_in;

  Histogram hist;
  if (!(hi > lo)) {
    hist.bin_left = {lo};
    hist.bin_right = {hi};
    hist.mass = {1.0};
    return hist;
  }
  const double width = (hi - lo) / n_bins;
  hist.bin_left.resize(static_cast<std::size_t>(n_bins));
  hist.bin_right.resize(static_cast<std::size_t>(n_bins));
  hist.mass.assign(static_cast<std::size_t>(n_bins), 0.0);
  for (int bin = 0; bin < n_bins; ++bin) {
    hist.bin_left[static_cast<std::size_t>(bin)] = lo + bin * width;
    hist.bin_right[static_cast<std::size_t>(bin)] = lo + (bin + 1) * width;
  }
  hist.bin_right.back() = hi;
  for (std::size_t k = chain.burn_in; k < chain.size(); ++k) {
    const double x = chain.samples[k][coordinate];
    const int bin = std::min(static_cast<int>((x - lo) / width), n_bins - 1);
    hist.mass[static_cast<std::size_t>(bin)] += 1.0;
  }
  for (double& m : hist.mass) m /= static_cast<double>(count);
  return hist;
}

double effective_sample_size(const Chain& chain, int coordinate) {
  if (coordinate < 0 || coordinate > 3) {
    throw std::invalid_argument("effective_sample_size: coordinate in 0..3");
  }
  const std::size_t n = chain.size() - chain.burn_in;
  if (chain.burn_in >= chain.size() || n < 4) {
    throw std::invalid_argument("effective_sample_size: too few samples");
  }
  std::vector<double> x(n);
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = chain.samples[chain.burn_in + k][coordinate];
    mean += x[k];
  }
  mean /= static_cast<double>(n);
  for (double& v : x) v -= mean;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) s += x[k] * x[k + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);

  // Geyer initial positive sequence: sum paired autocorrelations while the
  // pair sums stay positive.
  double tau = 1.0;
  for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / tau;
}

std::string chain_to_csv(const Chain& chain) {
  std::ostringstream out;
  out << "k,theta1,theta2,theta3,sigma0,log_post,accepted\n";
  for (std::size_t k = 0; k < chain.size(); ++k) {
    out << (k + 1);
    for (int p = 0; p < 4; ++p) {
      out << ',' << csv::format_double(chain.samples[k][p]);
    }
    out << ',' << csv::format_double(chain.log_posts[k]) << ','
        << static_cast<int>(chain.accepted[k]) << '\n';
  }
  return out.str();
}

std::string histogram_to_csv(const Histogram& hist) {
  std::ostringstream out;
  out << "bin_left,bin_right,mass\n";
  for (std::size_t k = 0; k < hist.mass.size(); ++k) {
    out << csv::format_double(hist.bin_left[k]) << ','
        << csv::format_double(hist.bin_right[k]) << ','
        << csv::format_double(hist.mass[k]) << '\n';
  }
  return out.str();
}

}  // namespace binopt
