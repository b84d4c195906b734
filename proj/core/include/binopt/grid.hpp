#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace binopt {

/// Uniform (y, tau) lattice for the transformed Cauchy problem.
///
/// The n_y spatial nodes include both boundary points, so
/// dy = (y_max - y_min) / (n_y - 1). Time runs over n_tau equal steps from
/// tau = 0 to the observation horizon tau_star.
struct GridSpec {
  double y_min = -1.5;
  double y_max = 1.5;
  int n_y = 100;
  int n_tau = 400;
  double tau_star = 0.4;

  double dy() const { return (y_max - y_min) / (n_y - 1); }
  double dtau() const { return tau_star / n_tau; }
  double y(int i) const { return y_min + i * dy(); }
  int n_interior() const { return n_y - 2; }

  /// The interior nodes y_1 .. y_{n_y-2}; the default measurement points.
  std::vector<double> interior_nodes() const {
    std::vector<double> nodes(static_cast<std::size_t>(n_interior()));
    for (int i = 0; i < n_interior(); ++i) nodes[i] = y(i + 1);
    return nodes;
  }

  bool is_valid() const {
    return std::isfinite(y_min) && std::isfinite(y_max) &&
           std::isfinite(tau_star) && y_min < 0.0 && 0.0 < y_max &&
           n_y >= 3 && n_tau >= 1 && tau_star > 0.0;
  }

  void validate() const {
    if (!is_valid()) {
      throw std::invalid_argument(
          "GridSpec: requires y_min < 0 < y_max, n_y >= 3, n_tau >= 1 and "
          "tau_star > 0");
    }
  }
};

}  // namespace binopt
