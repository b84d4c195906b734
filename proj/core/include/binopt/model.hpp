#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace binopt {

/// The four unknowns of the inverse problem, in fixed order:
/// (theta1, theta2, theta3, sigma0).
using ThetaVec = std::array<double, 4>;

/// Drift perturbation f(y) with f(0) = 0; the full drift is mu(y) = r + f(y).
using DriftFn = std::function<double(double)>;

/// Cubic drift perturbation f(y) = theta1*y + theta2*y^2 + theta3*y^3.
inline double cubic_perturbation(double theta1, double theta2, double theta3,
                                 double y) {
  return y * (theta1 + y * (theta2 + y * theta3));
}

/// Model parameters: cubic drift coefficients, constant volatility and the
/// fixed risk-free rate.
struct ModelParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double sigma0 = 1.0;  // per sqrt(year)
  double r = 0.0;       // per year

  /// Full drift mu(y) = r + theta1*y + theta2*y^2 + theta3*y^3.
  double mu(double y) const {
    return r + cubic_perturbation(theta1, theta2, theta3, y);
  }

  ThetaVec theta() const { return {theta1, theta2, theta3, sigma0}; }

  static ModelParams from_theta(const ThetaVec& t, double r) {
    return ModelParams{t[0], t[1], t[2], t[3], r};
  }

  bool is_valid() const {
    return std::isfinite(theta1) && std::isfinite(theta2) &&
           std::isfinite(theta3) && std::isfinite(sigma0) &&
           std::isfinite(r) && sigma0 > 0.0 && r >= 0.0;
  }

  /// Throws std::invalid_argument unless sigma0 > 0, r >= 0 and all fields
  /// are finite.
  void validate() const {
    if (!is_valid()) {
      throw std::invalid_argument(
          "ModelParams: requires finite fields, sigma0 > 0 and r >= 0");
    }
  }
};

/// Evaluates the drift mu(y) for finite y.
inline double drift_eval(const ModelParams& params, double y) {
  return params.mu(y);
}

}  // namespace binopt
