#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binopt/grid.hpp"
#include "binopt/model.hpp"
#include "binopt/pde.hpp"

namespace binopt {

/// Multiplicative Gaussian measurement noise: Y_j = F_j * (1 + eps_j) with
/// eps_j ~ N(0, relative_level^2), drawn from the given seed.
struct NoiseSpec {
  double relative_level = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(relative_level >= 0.0)) {
      throw std::invalid_argument("NoiseSpec: relative_level must be >= 0");
    }
  }
};

/// Measurement locations and values, stripped of any generating truth;
/// this is the only view the inference side ever receives.
struct Observations {
  std::vector<double> points;
  std::vector<double> values;

  std::size_t size() const { return points.size(); }
};

/// Synthetic data set: observations plus the generating record. The truth
/// is retained for reporting only; observations() strips it.
struct MeasurementSet {
  std::vector<double> points;
  std::vector<double> values;
  NoiseSpec noise;
  std::optional<ModelParams> truth;

  std::size_t size() const { return points.size(); }

  Observations observations() const { return {points, values}; }

  void validate() const;
};

/// Generates Y_j = U(tau*, y_j; truth) * (1 + eps_j). Deterministic for a
/// fixed seed. Pass `drift` to generate from a non-polynomial perturbation
/// f(y) (e.g. sin) while keeping `truth` as the reported expected values.
MeasurementSet generate(const ModelParams& truth, const GridSpec& grid,
                        const std::vector<double>& points,
                        const NoiseSpec& noise,
                        const DriftFn& drift = nullptr);

/// CSV with header `y,value`; doubles printed shortest round-trip.
std::string measurements_to_csv(const MeasurementSet& set);
MeasurementSet measurements_from_csv(const std::string& text);

}  // namespace binopt
