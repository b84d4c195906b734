#include <doctest.h>

#include <cmath>

#include "binopt/inference.hpp"
#include "binopt/pde.hpp"
#include "oracles.hpp"

using namespace binopt;

namespace {

// Coarse grid keeps the unit-test forward solves around a microsecond scale.
GridSpec small_grid() {
  GridSpec g;
  g.n_y = 40;
  g.n_tau = 50;
  return g;
}

PosteriorSpec small_spec(double noise_level, std::uint64_t seed) {
  const GridSpec grid = small_grid();
  const ModelParams truth{1.0, 0.0, 0.0, 1.0, 0.05};
  const auto data = generate(truth, grid, grid.interior_nodes(),
                             NoiseSpec{noise_level, seed});
  PosteriorSpec spec;
  spec.data = data.observations();
  spec.grid = grid;
  spec.r = truth.r;
  spec.sigma_eps = calibrate_sigma_eps(data.values, noise_level);
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("sigma_eps calibration ties the scale to the data RMS") {
  const std::vector<double> values{1.0, 1.0, 1.0, 1.0};
  CHECK(calibrate_sigma_eps(values, 0.0) == doctest::Approx(0.01));
  CHECK(calibrate_sigma_eps(values, 0.05) == doctest::Approx(0.05));
  CHECK(calibrate_sigma_eps({2.0, 2.0}, 0.0) == doctest::Approx(0.02));
  CHECK_THROWS_AS(calibrate_sigma_eps({}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_sigma_eps({0.0, 0.0}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("log posterior peaks at the noiseless truth") {
  const auto spec = small_spec(0.0, 0);
  const ThetaVec truth{1.0, 0.0, 0.0, 1.0};
  CHECK(log_posterior(spec, truth) == doctest::Approx(0.0).epsilon(1e-12));
  // residual monotonicity: farther parameters score lower
  const double near = log_posterior(spec, {1.05, 0.0, 0.0, 1.0});
  const double far = log_posterior(spec, {1.5, 0.0, 0.0, 1.0});
  CHECK(near < 0.0);
  CHECK(far < near);
}

TEST_CASE("log posterior is -inf outside the prior box") {
  const auto spec = small_spec(0.0, 0);
  CHECK(log_posterior(spec, {11.0, 0.0, 0.0, 1.0}) == kLogZero);
  CHECK(log_posterior(spec, {1.0, 0.0, 0.0, 0.01}) == kLogZero);
  CHECK(log_posterior(spec, {1.0, 0.0, 0.0, -1.0}) == kLogZero);
  const double nan = std::nan("");
  CHECK(log_posterior(spec, {nan, 0.0, 0.0, 1.0}) == kLogZero);
}

TEST_CASE("mh_step consumes four normals and one uniform per step") {
  // replay the draw sequence by hand against a fixed seed
  const LogDensity target = [](const ThetaVec& t) {
    return -0.5 * (t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3]);
  };
  const ThetaVec gamma{0.5, 0.5, 0.5, 0.5};
  Rng rng(314);
  McmcState state{{0.1, -0.2, 0.3, 0.4}, target({0.1, -0.2, 0.3, 0.4})};
  const auto result = mh_step(target, state, gamma, rng);

  Rng replay(314);
  ThetaVec proposal;
  for (int p = 0; p < 4; ++p) {
    proposal[p] = state.theta[p] + gamma[p] * replay.normal();
  }
  const double u = replay.uniform();
  const double delta = target(proposal) - state.log_post;
  const bool expect_accept = u < std::min(1.0, std::exp(delta));
  CHECK(result.accepted == expect_accept);
  if (expect_accept) {
    CHECK(result.state.theta == proposal);
  } else {
    CHECK(result.state.theta == state.theta);
  }
}

TEST_CASE("mh_step accepts uphill moves and rejects zero-probability ones") {
  const LogDensity box_target = [](const ThetaVec& t) {
    if (std::abs(t[0]) > 1.0) return kLogZero;
    return 3.0 * t[0];  // increasing in the first coordinate
  };
  const ThetaVec gamma{0.4, 0.0, 0.0, 0.0};
  Rng rng(2718);
  Rng shadow(2718);  // replays the proposal draws
  McmcState state{{0.0, 0.0, 0.0, 0.0}, box_target({0.0, 0.0, 0.0, 0.0})};
  int uphill = 0;
  int outside = 0;
  for (int k = 0; k < 2000; ++k) {
    ThetaVec proposal;
    for (int p = 0; p < 4; ++p) {
      proposal[p] = state.theta[p] + gamma[p] * shadow.normal();
    }
    shadow.uniform();
    const double log_prop = box_target(proposal);

    const auto result = mh_step(box_target, state, gamma, rng);
    if (log_prop == kLogZero) {
      ++outside;
      CHECK_FALSE(result.accepted);  // acceptance probability 0
    } else if (log_prop > state.log_post) {
      ++uphill;
      CHECK(result.accepted);  // acceptance probability 1
    }
    state = result.state;
    CHECK(std::abs(state.theta[0]) <= 1.0);
  }
  CHECK(uphill > 0);
  CHECK(outside > 0);
}

TEST_CASE("sampler recovers the moments of a standard gaussian target") {
  // 1-D target through the 4-D machinery: only the first coordinate moves.
  const LogDensity target = [](const ThetaVec& t) { return -0.5 * t[0] * t[0]; };
  ChainSettings settings;
  settings.iterations = 100000;
  settings.burn_in = 1000;
  settings.gamma = {2.4, 0.0, 0.0, 0.0};
  settings.seed = 57;
  settings.adapt = false;
  const Chain chain = run_chain(target, {0.0, 0.0, 0.0, 0.0}, settings);

  std::vector<double> xs;
  xs.reserve(chain.size() - chain.burn_in);
  for (std::size_t k = chain.burn_in; k < chain.size(); ++k) {
    xs.push_back(chain.samples[k][0]);
  }
  CHECK(std::abs(oracles::mean(xs)) <= 0.05);
  CHECK(std::abs(oracles::sample_variance(xs) - 1.0) <= 0.1);
}

TEST_CASE("every chain sample stays inside the prior box") {
  auto spec = small_spec(0.0, 3);
  spec.prior.lower = {0.5, -0.5, -0.5, 0.5};
  spec.prior.upper = {1.5, 0.5, 0.5, 1.5};
  ChainSettings settings;
  settings.iterations = 3000;
  settings.burn_in = 500;
  settings.seed = 11;
  const Chain chain = run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings);
  for (const auto& s : chain.samples) {
    CHECK(spec.prior.contains(s));
  }
}

TEST_CASE("rejected steps repeat the previous state exactly") {
  const auto spec = small_spec(0.0, 5);
  ChainSettings settings;
  settings.iterations = 2000;
  settings.burn_in = 200;
  settings.seed = 21;
  const Chain chain = run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings);
  REQUIRE(chain.accepted.size() == chain.size());
  std::size_t rejects = 0;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (chain.accepted[k]) continue;
    ++rejects;
    if (k > 0) {
      CHECK(chain.samples[k] == chain.samples[k - 1]);
      CHECK(chain.log_posts[k] == chain.log_posts[k - 1]);
    }
  }
  CHECK(rejects > 0);
  CHECK(chain.accept_count == chain.size() - rejects);
}

TEST_CASE("acceptance decisions replay from the seed") {
  const LogDensity target = [](const ThetaVec& t) {
    return -0.5 * (t[0] * t[0] + 4.0 * t[1] * t[1]);
  };
  ChainSettings settings;
  settings.iterations = 5000;
  settings.burn_in = 1000;
  settings.gamma = {1.0, 0.5, 0.0, 0.0};
  settings.seed = 99;
  settings.adapt = false;  // keep gamma fixed for the replay
  const Chain chain = run_chain(target, {0.0, 0.0, 0.0, 0.0}, settings);

  Rng replay(99);
  ThetaVec current{0.0, 0.0, 0.0, 0.0};
  double log_cur = target(current);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    ThetaVec proposal;
    for (int p = 0; p < 4; ++p) {
      proposal[p] = current[p] + settings.gamma[p] * replay.normal();
    }
    const double u = replay.uniform();
    const double log_prop = target(proposal);
    const bool accept = u < std::min(1.0, std::exp(log_prop - log_cur));
    CHECK(static_cast<bool>(chain.accepted[k]) == accept);
    if (accept) {
      current = proposal;
      log_cur = log_prop;
    }
    CHECK(chain.samples[k] == current);
  }
}

TEST_CASE("chains are deterministic given the seed") {
  const auto spec = small_spec(0.05, 8);
  ChainSettings settings;
  settings.iterations = 1500;
  settings.burn_in = 300;
  settings.seed = 1001;
  const Chain a = run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings);
  const Chain b = run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings);
  CHECK(a.samples == b.samples);
  CHECK(a.accept_count == b.accept_count);
}

TEST_CASE("run_chain with a single iteration keeps init or one proposal") {
  const auto spec = small_spec(0.0, 2);
  ChainSettings settings;
  settings.iterations = 1;
  settings.burn_in = 0;
  settings.seed = 5;
  const ThetaVec init{1.0, 0.0, 0.0, 1.0};
  const Chain chain = run_chain(spec, init, settings);
  REQUIRE(chain.size() == 1);
  if (!chain.accepted[0]) CHECK(chain.samples[0] == init);
}

TEST_CASE("run_chain rejects an init outside the prior box") {
  const auto spec = small_spec(0.0, 2);
  ChainSettings settings;
  settings.iterations = 10;
  settings.burn_in = 0;
  CHECK_THROWS_AS(run_chain(spec, {0.0, 0.0, 0.0, 0.0}, settings),
                  std::invalid_argument);
}

TEST_CASE("invalid chain settings are rejected") {
  const auto spec = small_spec(0.0, 2);
  ChainSettings settings;
  settings.iterations = 100;
  settings.burn_in = 100;
  CHECK_THROWS_AS(run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings),
                  std::invalid_argument);
}

TEST_CASE("a chain that cannot move aborts with diagnostics") {
  // target accepts nothing: -inf everywhere except the exact init
  const ThetaVec init{0.0, 0.0, 0.0, 0.0};
  const LogDensity stuck = [init](const ThetaVec& t) {
    return t == init ? 0.0 : kLogZero;
  };
  ChainSettings settings;
  settings.iterations = 6000;
  settings.burn_in = 5500;
  settings.gamma = {1.0, 1.0, 1.0, 1.0};
  settings.adapt = false;
  CHECK_THROWS_AS(run_chain(stuck, init, settings), ChainError);
}

TEST_CASE("log posterior at the truth dominates every chain sample") {
  const auto spec = small_spec(0.0, 13);
  ChainSettings settings;
  settings.iterations = 2000;
  settings.burn_in = 500;
  settings.seed = 3;
  const Chain chain = run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings);
  const double at_truth = log_posterior(spec, {1.0, 0.0, 0.0, 1.0});
  for (double lp : chain.log_posts) CHECK(at_truth >= lp);
}

TEST_CASE("conditional mean averages the post-burn-in samples") {
  Chain chain;
  chain.samples = {{9.0, 9.0, 9.0, 9.0}, {0.0, 0.0, 0.0, 1.0},
                   {2.0, 0.0, 0.0, 1.0}};
  chain.log_posts = {0.0, 0.0, 0.0};
  chain.accepted = {1, 1, 1};
  chain.burn_in = 1;
  const auto cm = conditional_mean(chain);
  CHECK(cm == ThetaVec{1.0, 0.0, 0.0, 1.0});

  chain.burn_in = 3;
  CHECK_THROWS_AS(conditional_mean(chain), std::invalid_argument);

  Chain constant;
  constant.samples.assign(10, {0.5, -0.5, 0.25, 2.0});
  constant.burn_in = 2;
  CHECK(conditional_mean(constant) == ThetaVec{0.5, -0.5, 0.25, 2.0});
}

TEST_CASE("histogram of identical samples is a single unit-mass bin") {
  Chain chain;
  chain.samples.assign(100, {1.5, 0.0, 0.0, 1.0});
  chain.burn_in = 10;
  const auto hist = posterior_histogram(chain, 0, 25);
  REQUIRE(hist.mass.size() == 1);
  CHECK(hist.mass[0] == 1.0);
  CHECK(hist.bin_left[0] == 1.5);
}

TEST_CASE("histogram mass always sums to one") {
  const auto spec = small_spec(0.05, 17);
  ChainSettings settings;
  settings.iterations = 2000;
  settings.burn_in = 400;
  settings.seed = 23;
  const Chain chain = run_chain(spec, {1.0, 0.0, 0.0, 1.0}, settings);
  for (int coord = 0; coord < 4; ++coord) {
    const auto hist = posterior_histogram(chain, coord, 32);
    double total = 0.0;
    for (double m : hist.mass) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(posterior_histogram(chain, 4, 10), std::invalid_argument);
  CHECK_THROWS_AS(posterior_histogram(chain, 0, 0), std::invalid_argument);
}

TEST_CASE("histogram of uniform draws is flat to within concentration") {
  Chain chain;
  chain.burn_in = 0;
  Rng rng(555);
  chain.samples.reserve(100000);
  for (int k = 0; k < 100000; ++k) {
    chain.samples.push_back({rng.uniform(), 0.0, 0.0, 0.0});
  }
  const auto hist = posterior_histogram(chain, 0, 10);
  REQUIRE(hist.mass.size() == 10);
  for (double m : hist.mass) {
    CHECK(m == doctest::Approx(0.1).epsilon(0.3));  // 0.1 +- 0.03
  }
}

TEST_CASE("effective sample size is sane for iid and sticky chains") {
  Chain iid;
  iid.burn_in = 0;
  Rng rng(8);
  for (int k = 0; k < 20000; ++k) {
    iid.samples.push_back({rng.normal(), 0.0, 0.0, 0.0});
  }
  const double ess_iid = effective_sample_size(iid, 0);
  CHECK(ess_iid > 10000.0);

  // a maximally sticky chain: long constant runs
  Chain sticky;
  sticky.burn_in = 0;
  for (int block = 0; block < 200; ++block) {
    const double v = Rng(block).normal();
    for (int k = 0; k < 100; ++k) sticky.samples.push_back({v, 0, 0, 0});
  }
  CHECK(effective_sample_size(sticky, 0) < 2000.0);
}

TEST_CASE("chain csv serializes one row per iteration") {
  Chain chain;
  chain.samples = {{1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 4.0}};
  chain.log_posts = {-0.5, -0.5};
  chain.accepted = {1, 0};
  chain.burn_in = 0;
  const auto text = chain_to_csv(chain);
  CHECK(text ==
        "k,theta1,theta2,theta3,sigma0,log_post,accepted\n"
        "1,1,2,3,4,-0.5,1\n"
        "2,1,2,3,4,-0.5,0\n");
}

TEST_SUITE_END();
