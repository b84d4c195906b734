#include <doctest.h>

#include <cmath>

#include "binopt/csv.hpp"
#include "binopt/synthetic.hpp"
#include "oracles.hpp"

using namespace binopt;

namespace {
const GridSpec kPaperGrid{};
const ModelParams kTruth{1.0, 0.0, 0.0, 1.0, 0.05};
}  // namespace

TEST_SUITE_BEGIN("synthetic");

TEST_CASE("noiseless generation equals the forward observation") {
  const auto points = kPaperGrid.interior_nodes();
  const auto set = generate(kTruth, kPaperGrid, points, NoiseSpec{0.0, 99});
  const auto f = observe(solve_forward(kTruth, kPaperGrid), points);
  REQUIRE(set.size() == f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    CHECK(set.values[j] == f[j]);
  }
  CHECK(set.truth.has_value());
}

TEST_CASE("same seed gives identical measurement sets") {
  const auto points = kPaperGrid.interior_nodes();
  const NoiseSpec noise{0.05, 20240101};
  const auto a = generate(kTruth, kPaperGrid, points, noise);
  const auto b = generate(kTruth, kPaperGrid, points, noise);
  CHECK(a.values == b.values);
  CHECK(a.points == b.points);
}

TEST_CASE("different seeds give different noise") {
  const auto points = kPaperGrid.interior_nodes();
  const auto a = generate(kTruth, kPaperGrid, points, NoiseSpec{0.05, 1});
  const auto b = generate(kTruth, kPaperGrid, points, NoiseSpec{0.05, 2});
  CHECK(a.values != b.values);
}

TEST_CASE("relative noise level shows up in the sample deviations") {
  const auto points = kPaperGrid.interior_nodes();  // m = 98
  const auto noiseless =
      generate(kTruth, kPaperGrid, points, NoiseSpec{0.0, 0});
  const auto noisy =
      generate(kTruth, kPaperGrid, points, NoiseSpec{0.05, 737});
  std::vector<double> rel(noisy.size());
  for (std::size_t j = 0; j < noisy.size(); ++j) {
    rel[j] = noisy.values[j] / noiseless.values[j] - 1.0;
  }
  const double sd = std::sqrt(oracles::sample_variance(rel));
  CHECK(sd >= 0.03);
  CHECK(sd <= 0.07);
}

TEST_CASE("custom drift callable feeds the data generator") {
  const auto points = kPaperGrid.interior_nodes();
  const auto sine = generate(kTruth, kPaperGrid, points, NoiseSpec{0.0, 0},
                             [](double y) { return std::sin(y); });
  const auto cubic = generate(kTruth, kPaperGrid, points, NoiseSpec{0.0, 0});
  // sin(y) differs from y away from 0, so the surfaces must differ
  double max_gap = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    max_gap = std::max(max_gap, std::abs(sine.values[j] - cubic.values[j]));
  }
  CHECK(max_gap > 1e-4);
}

TEST_CASE("observations strip the truth") {
  const auto set = generate(kTruth, kPaperGrid, {-0.5, 0.0, 0.5},
                            NoiseSpec{0.0, 0});
  const Observations obs = set.observations();
  CHECK(obs.points == set.points);
  CHECK(obs.values == set.values);
  // Observations carries no truth field by construction; this is the type
  // handed to inference and LM.
  static_assert(sizeof(Observations) ==
                sizeof(std::vector<double>) * 2);
}

TEST_CASE("validation rejects non-increasing points") {
  CHECK_THROWS_AS(
      generate(kTruth, kPaperGrid, {0.5, -0.5}, NoiseSpec{0.0, 0}),
      std::invalid_argument);
  CHECK_THROWS_AS(generate(kTruth, kPaperGrid, {}, NoiseSpec{0.0, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      generate(kTruth, kPaperGrid, {-0.5, 0.5}, NoiseSpec{-0.1, 0}),
      std::invalid_argument);
}

TEST_CASE("csv round-trip preserves every bit") {
  const auto points = kPaperGrid.interior_nodes();
  const auto set = generate(kTruth, kPaperGrid, points, NoiseSpec{0.05, 41});
  const auto back = measurements_from_csv(measurements_to_csv(set));
  CHECK(back.points == set.points);
  CHECK(back.values == set.values);
}

TEST_SUITE_END();
