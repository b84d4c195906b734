#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "binopt/grid.hpp"
#include "binopt/inference.hpp"
#include "binopt/lm.hpp"
#include "binopt/model.hpp"

namespace binopt {

/// Drift family used to generate the synthetic data. Inference always fits
/// the cubic family; `sine` deliberately generates outside it.
enum class DriftFamily { identity, sine, cubic };

std::string to_string(DriftFamily family);

/// Ground truth of one experiment.
struct TruthSpec {
  DriftFamily family = DriftFamily::identity;
  std::array<double, 3> theta{1.0, 0.0, 0.0};  // cubic coefficients
  double sigma0 = 1.0;
  double r = 0.05;

  /// Expected recovery values: the cubic coefficients for polynomial
  /// families, the third-order Taylor coefficients (1, 0, -1/6) for sine.
  ThetaVec expected() const;

  /// The data-generating perturbation f(y).
  DriftFn perturbation() const;

  /// Model parameters used for reporting (expected values plus r).
  ModelParams reporting_params() const {
    return ModelParams::from_theta(expected(), r);
  }
};

struct SamplerSettings {
  std::size_t iterations = 100000;
  std::size_t burn_in = 30000;
  ThetaVec gamma{0.02, 0.02, 0.02, 0.01};
  std::uint64_t seed = 20200829;
  bool adapt = true;
};

/// Measurement locations: the grid's interior nodes (default) or an
/// explicit list.
struct MeasurementSpec {
  bool interior_nodes = true;
  std::vector<double> points;
};

/// Full declarative description of one experiment.
struct ExperimentConfig {
  std::string name = "experiment";
  TruthSpec truth;
  GridSpec grid;
  std::vector<double> noise_levels{0.0, 0.05};
  std::uint64_t noise_seed = 737;
  MeasurementSpec measurement;
  PriorBox prior;
  SamplerSettings sampler;
  bool lm_enabled = true;
  LmSettings lm;
  std::vector<ThetaVec> initial_guesses{{0.0, 0.0, 0.0, 0.0}};
  std::string output_dir = "out";
  double sigma_eps_floor = 0.01;
  int histogram_bins = 60;

  std::vector<double> measurement_points() const {
    return measurement.interior_nodes ? grid.interior_nodes()
                                      : measurement.points;
  }
};

/// Carries every validation problem at once, one message per field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Cross-field validation; returns one message per problem (empty = valid).
std::vector<std::string> validate_config(const ExperimentConfig& config);

/// Parses and validates a JSON experiment config. Unknown keys are
/// rejected; all errors are reported together. Initial guesses are clamped
/// into the prior box (the paper's nominal guesses sit on its boundary).
ExperimentConfig parse_config(const std::string& json_text);

/// parse_config over a file.
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON echo with every field explicit; re-parses to an
/// equivalent config.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace binopt
