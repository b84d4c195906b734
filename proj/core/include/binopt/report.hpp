#pragma once

#include <string>
#include <utility>
#include <vector>

#include "binopt/inference.hpp"
#include "binopt/lm.hpp"
#include "binopt/model.hpp"

namespace binopt {

/// One table row: a labeled 4-vector (theta1, theta2, theta3, sigma0).
struct RecoveryRow {
  std::string label;
  ThetaVec value{};
};

/// Recovery table mirroring the paper's layout: one row per run in input
/// order, with the expected-value row last.
struct RecoveryTable {
  std::vector<RecoveryRow> rows;
  RecoveryRow expected;
};

/// Builds the table; rejects empty runs and duplicate labels.
RecoveryTable build_recovery_table(const std::vector<RecoveryRow>& runs,
                                   const ThetaVec& expected_value);

std::string table_to_csv(const RecoveryTable& table);
RecoveryTable table_from_csv(const std::string& text);

/// Plain-text aligned rendering for terminal display.
std::string table_to_text(const RecoveryTable& table);

struct DriftSeries {
  std::string label;
  std::vector<double> values;
};

/// Sampled drift perturbation curves f(y) over a uniform y range, one
/// series per labeled curve (truth first by convention).
struct DriftCurve {
  std::vector<double> y;
  std::vector<DriftSeries> series;
};

using LabeledDrift = std::pair<std::string, DriftFn>;

/// Samples each drift perturbation on n_samples uniform points. Recovered
/// parameter sets enter as cubic perturbations via cubic_drift_fn.
DriftCurve build_drift_curve(const std::vector<LabeledDrift>& curves,
                             double y_min, double y_max, int n_samples);

/// f(y) = theta1*y + theta2*y^2 + theta3*y^3 from a recovered 4-vector
/// (the sigma0 slot is ignored).
DriftFn cubic_drift_fn(const ThetaVec& theta);

/// CSV with one y column followed by one column per series.
std::string drift_to_csv(const DriftCurve& curve);
DriftCurve drift_from_csv(const std::string& text);

}  // namespace binopt
