#pragma once

#include <optional>
#include <span>
#include <vector>

#include "binopt/grid.hpp"
#include "binopt/model.hpp"
#include "binopt/tridiagonal.hpp"

namespace binopt {

/// Crank-Nicolson coefficients for the transformed problem
///
///   dU/dtau = (sigma0^2/2) U_yy + (sigma0^2/2 - mu(y)) U_y - r U,
///   U(y, 0) = H(-y),
///
/// on the interior nodes. Signs follow the coefficient definitions
///
///   a_i = -(dtau / (4 dy^2)) * (sigma0^2 + dy * (sigma0^2/2 - mu(y_i)))
///   b   =  (dtau / (2 dy^2)) * sigma0^2
///   c_i = -(dtau / (4 dy^2)) * (sigma0^2 - dy * (sigma0^2/2 - mu(y_i)))
///
/// so that a_i + c_i = -b holds identically. The implicit operator has
/// diagonal 1 + b and off-diagonals a_i (super) and c_i (sub); the explicit
/// operator has diagonal 1 - b - r dtau and the mirrored off-diagonals
/// -a_i, -c_i. The discount acts fully on the explicit side.
struct CnCoefficients {
  std::vector<double> a;  // weight of U_{i+1}, one per interior node
  std::vector<double> c;  // weight of U_{i-1}, one per interior node
  double b = 0.0;
};

/// Assembled one-step update A u_{j+1} = B u_j + boundary_vector.
///
/// boundary_vector carries the Dirichlet data into the first and last
/// interior rows for time-constant boundary values. When the boundary
/// values decay with the discount (see assemble_cn), solve_forward scales
/// the vector by the per-step mean discount factor.
struct TridiagonalSystem {
  TridiagonalMatrix matrix_a;            // implicit side
  TridiagonalMatrix matrix_b;            // explicit side
  std::vector<double> boundary_vector;   // inhomogeneous Dirichlet term
  bool diagonally_dominant = true;       // checked at assembly, warning only
};

struct CnSystem {
  CnCoefficients coefficients;
  TridiagonalSystem system;
};

/// Far-field Dirichlet values imposed at y_min and y_max. The payoff-scale
/// values decay with the discount, U(boundary, tau) = value * exp(-r tau),
/// which is the exact large-|y| limit of the equation; with r = 0 this is
/// the constant pair (1, 0).
struct BoundaryValues {
  double left = 1.0;
  double right = 0.0;
};

/// Solved price surface on the full lattice, time-major:
/// values[j * n_y + i] = U(y_i, tau_j), j = 0..n_tau.
struct PdeSolution {
  GridSpec grid;
  ModelParams params;
  std::vector<double> values;

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(j) * grid.n_y + i];
  }
  std::span<const double> level(int j) const {
    return {values.data() + static_cast<std::size_t>(j) * grid.n_y,
            static_cast<std::size_t>(grid.n_y)};
  }
  /// The observation row U(., tau_star).
  std::span<const double> terminal() const { return level(grid.n_tau); }
};

/// Builds the Crank-Nicolson coefficients and one-step operators for the
/// given parameters. The drift defaults to the cubic mu(y) of `params`;
/// pass `drift` to generate data from a non-polynomial perturbation f(y)
/// (the full drift is then r + f(y)).
///
/// Throws std::invalid_argument on invalid grid or non-finite coefficients.
/// A violation of strict diagonal dominance is recorded in the returned
/// system, not raised.
CnSystem assemble_cn(const ModelParams& params, const GridSpec& grid,
                     BoundaryValues bc = {}, const DriftFn& drift = nullptr);

/// Advances the interior values one step: solves
/// matrix_a * u_next = matrix_b * u_now + boundary_scale * boundary_vector
/// by the Thomas algorithm. Throws SolveError on a zero pivot.
std::vector<double> step(const TridiagonalSystem& system,
                         std::span<const double> u_now,
                         double boundary_scale = 1.0);

/// Solves the Cauchy problem forward over the whole lattice.
///
/// The initial condition is H(-y) with the tie-break H(0) = 1; boundary
/// rows hold the discounted Dirichlet values at every level. Deterministic
/// for fixed inputs. Throws SolveError (tagged with the failing time index)
/// if a step breaks down.
PdeSolution solve_forward(const ModelParams& params, const GridSpec& grid,
                          BoundaryValues bc = {},
                          const DriftFn& drift = nullptr);

/// Reads the observation vector F = U(tau_star, points) from a solved
/// surface. Points on grid nodes are read exactly; others by linear
/// interpolation. Throws std::invalid_argument for out-of-range points.
std::vector<double> observe(const PdeSolution& solution,
                            std::span<const double> points);

/// Fused solve + observe that keeps only the current time level; equals
/// observe(solve_forward(...), points) and is the hot path for inference.
std::vector<double> forward_observe(const ModelParams& params,
                                    const GridSpec& grid,
                                    std::span<const double> points,
                                    BoundaryValues bc = {},
                                    const DriftFn& drift = nullptr);

/// Closed-form discounted digital price for the constant-drift case
/// mu = r (theta = 0):
///   U(y, tau) = exp(-r tau) * Phi((-y + (r - sigma0^2/2) tau) / (sigma0 sqrt(tau))).
/// Used by the `oracle` CLI subcommand for quick solver diagnostics.
double analytic_digital_price(double y, double tau, double sigma0, double r);

}  // namespace binopt
