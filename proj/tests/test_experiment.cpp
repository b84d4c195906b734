#include <doctest.h>

#include <filesystem>

#include "binopt/csv.hpp"
#include "binopt/experiment.hpp"

using namespace binopt;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig config;
  config.name = "tiny";
  config.grid.n_y = 40;
  config.grid.n_tau = 50;
  config.noise_levels = {0.0, 0.05};
  config.noise_seed = 12;
  config.sampler.iterations = 600;
  config.sampler.burn_in = 150;
  config.sampler.seed = 4;
  config.lm.max_iters = 40;
  config.initial_guesses = {{0.0, 0.0, 0.0, 0.05}, {1.0, 0.0, 0.0, 1.0}};
  config.output_dir = out_dir;
  config.histogram_bins = 16;
  return config;
}

void clean(const std::string& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("tiny experiment writes the full artifact set") {
  const std::string dir = ".test_out/tiny";
  clean(dir);
  const auto outcome = run_experiment(tiny_config(dir), {1, true, {}, {}});
  REQUIRE(outcome.ok);
  CHECK(outcome.cells.size() == 4);  // 2 noise levels x 2 guesses

  const std::vector<std::string> expected_files{
      "manifest.json",
      "summary.txt",
      "measurements_noise0.csv",
      "measurements_noise5.csv",
      "table_init0.csv",
      "table_init1.csv",
      "drift_init0.csv",
      "drift_init1.csv",
      "trace_noise0_init0.csv",
      "trace_noise5_init1.csv",
      "hist_noise0_init0_theta1.csv",
      "hist_noise5_init1_sigma0.csv",
      "lm_noise0_init0.csv",
  };
  for (const auto& name : expected_files) {
    CHECK_MESSAGE(fs::exists(fs::path(dir) / name), name);
  }

  const auto manifest = csv::read_file(dir + "/manifest.json");
  CHECK(manifest.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(manifest.find("\"sigma_eps\"") != std::string::npos);

  // the recovery table ends with the expected row
  const auto table = csv::read_file(dir + "/table_init0.csv");
  CHECK(table.find("expected,1,0,0,1") != std::string::npos);
}

TEST_CASE("identical configs reproduce identical artifacts") {
  const std::string dir_a = ".test_out/rerun_a";
  const std::string dir_b = ".test_out/rerun_b";
  clean(dir_a);
  clean(dir_b);
  auto config = tiny_config(dir_a);
  config.noise_levels = {0.05};
  config.initial_guesses = {{0.0, 0.0, 0.0, 0.05}};
  REQUIRE(run_experiment(config, {1, true, {}, {}}).ok);
  config.output_dir = dir_b;
  REQUIRE(run_experiment(config, {1, true, {}, {}}).ok);

  for (const char* name :
       {"measurements_noise5.csv", "trace_noise5_init0.csv",
        "table_init0.csv", "drift_init0.csv", "lm_noise5_init0.csv",
        "hist_noise5_init0_theta2.csv", "summary.txt"}) {
    CHECK_MESSAGE(csv::read_file(dir_a + "/" + name) ==
                      csv::read_file(dir_b + "/" + name),
                  name);
  }
}

TEST_CASE("parallel cells produce the same results as sequential") {
  const std::string dir_a = ".test_out/jobs1";
  const std::string dir_b = ".test_out/jobs4";
  clean(dir_a);
  clean(dir_b);
  auto config = tiny_config(dir_a);
  REQUIRE(run_experiment(config, {1, true, {}, {}}).ok);
  config.output_dir = dir_b;
  REQUIRE(run_experiment(config, {4, true, {}, {}}).ok);
  for (const char* name :
       {"trace_noise0_init0.csv", "trace_noise5_init1.csv",
        "table_init0.csv", "table_init1.csv"}) {
    CHECK(csv::read_file(dir_a + "/" + name) ==
          csv::read_file(dir_b + "/" + name));
  }
}

TEST_CASE("seed override changes the chains deterministically") {
  const std::string dir_a = ".test_out/seed_a";
  const std::string dir_b = ".test_out/seed_b";
  const std::string dir_c = ".test_out/seed_c";
  for (const auto& d : {dir_a, dir_b, dir_c}) clean(d);
  auto config = tiny_config(dir_a);
  config.noise_levels = {0.0};
  config.initial_guesses = {{1.0, 0.0, 0.0, 1.0}};
  REQUIRE(run_experiment(config, {1, true, {}, {}}).ok);
  config.output_dir = dir_b;
  REQUIRE(run_experiment(config, {1, true, {}, std::uint64_t{99}}).ok);
  config.output_dir = dir_c;
  REQUIRE(run_experiment(config, {1, true, {}, std::uint64_t{99}}).ok);

  CHECK(csv::read_file(dir_a + "/trace_noise0_init0.csv") !=
        csv::read_file(dir_b + "/trace_noise0_init0.csv"));
  CHECK(csv::read_file(dir_b + "/trace_noise0_init0.csv") ==
        csv::read_file(dir_c + "/trace_noise0_init0.csv"));
}

TEST_CASE("a failing run keeps partial outputs and a FAILED manifest") {
  const std::string dir = ".test_out/failing";
  clean(dir);
  auto config = tiny_config(dir);
  config.noise_levels = {0.0};
  config.initial_guesses = {{1.0, 0.0, 0.0, 1.0}};
  // a giant frozen proposal: essentially every draw lands outside the box,
  // tripping the low-acceptance abort after 5000 steps
  config.sampler.iterations = 6000;
  config.sampler.burn_in = 5999;
  config.sampler.adapt = false;
  config.sampler.gamma = {1e8, 1e8, 1e8, 1e8};
  const auto outcome = run_experiment(config, {1, true, {}, {}});
  CHECK_FALSE(outcome.ok);
  CHECK(!outcome.error.empty());
  const auto manifest = csv::read_file(dir + "/manifest.json");
  CHECK(manifest.find("\"status\": \"FAILED\"") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "measurements_noise0.csv"));
}

TEST_CASE("run_experiment validates the config up front") {
  auto config = tiny_config(".test_out/never");
  config.sampler.burn_in = config.sampler.iterations;
  CHECK_THROWS_AS(run_experiment(config, {1, true, {}, {}}), ConfigError);
  CHECK_FALSE(fs::exists(".test_out/never"));
}

TEST_SUITE_END();
