#include "binopt/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace binopt {

namespace {

// Heaviside initial condition H(-y); H(0) = 1 (the at-the-money node pays).
double initial_condition(double y) { return y <= 0.0 ? 1.0 : 0.0; }

std::vector<double> interior_initial_values(const GridSpec& grid) {
  std::vector<double> u(static_cast<std::size_t>(grid.n_interior()));
  for (int i = 0; i < grid.n_interior(); ++i) {
    u[static_cast<std::size_t>(i)] = initial_condition(grid.y(i + 1));
  }
  return u;
}

// Mean discount factor over [tau_j, tau_{j+1}] applied to the boundary
// injection: the Dirichlet rows contribute (value(tau_j) + value(tau_{j+1}))
// to the Crank-Nicolson right-hand side.
double boundary_scale(double r, double tau_now, double tau_next) {
  return 0.5 * (std::exp(-r * tau_now) + std::exp(-r * tau_next));
}

void check_finite_params(const ModelParams& params) {
  if (!std::isfinite(params.theta1) || !std::isfinite(params.theta2) ||
      !std::isfinite(params.theta3) || !std::isfinite(params.sigma0) ||
      !std::isfinite(params.r)) {
    throw std::invalid_argument("assemble_cn: non-finite model parameters");
  }
}

}  // namespace

CnSystem assemble_cn(const ModelParams& params, const GridSpec& grid,
                     BoundaryValues bc, const DriftFn& drift) {
  grid.validate();
  check_finite_params(params);

  const int n = grid.n_interior();
  const double dy = grid.dy();
  const double dtau = grid.dtau();
  const double sig2 = params.sigma0 * params.sigma0;
  const double b = dtau / (2.0 * dy * dy) * sig2;

  CnCoefficients coeffs;
  coeffs.b = b;
  coeffs.a.resize(static_cast<std::size_t>(n));
  coeffs.c.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double y = grid.y(i + 1);
    const double mu = drift ? params.r + drift(y) : params.mu(y);
    const double advect = dy * (0.5 * sig2 - mu);
    coeffs.a[static_cast<std::size_t>(i)] =
        -dtau / (4.0 * dy * dy) * (sig2 + advect);
    coeffs.c[static_cast<std::size_t>(i)] =
        -dtau / (4.0 * dy * dy) * (sig2 - advect);
    if (!std::isfinite(coeffs.a[static_cast<std::size_t>(i)]) ||
        !std::isfinite(coeffs.c[static_cast<std::size_t>(i)])) {
      throw std::invalid_argument(
          "assemble_cn: non-finite coefficient at interior node " +
          std::to_string(i));
    }
  }

  TridiagonalSystem sys;
  sys.matrix_a = TridiagonalMatrix::zero(static_cast<std::size_t>(n));
  sys.matrix_b = TridiagonalMatrix::zero(static_cast<std::size_t>(n));
  const double diag_explicit = 1.0 - b - params.r * dtau;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    sys.matrix_a.diag[k] = 1.0 + b;
    sys.matrix_b.diag[k] = diag_explicit;
    if (i + 1 < n) {
      sys.matrix_a.upper[k] = coeffs.a[k];
      sys.matrix_b.upper[k] = -coeffs.a[k];
    }
    if (i > 0) {
      sys.matrix_a.lower[k] = coeffs.c[k];
      sys.matrix_b.lower[k] = -coeffs.c[k];
    }
  }

  // Dirichlet data enters the outermost rows on both time levels; for
  // constant unit-scale values the injection is -2 c_first (left) and
  // -2 a_last (right).
  sys.boundary_vector.assign(static_cast<std::size_t>(n), 0.0);
  sys.boundary_vector.front() = -2.0 * coeffs.c.front() * bc.left;
  sys.boundary_vector.back() = -2.0 * coeffs.a.back() * bc.right;

  sys.diagonally_dominant = sys.matrix_a.diagonally_dominant();
  return {std::move(coeffs), std::move(sys)};
}

std::vector<double> step(const TridiagonalSystem& system,
                         std::span<const double> u_now,
                         double boundary_scale) {
  const std::size_t n = system.matrix_a.size();
  if (u_now.size() != n) {
    throw std::invalid_argument("step: interior vector has wrong dimension");
  }
  std::vector<double> rhs(n);
  system.matrix_b.apply(u_now, rhs);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] += boundary_scale * system.boundary_vector[i];
  }
  return solve_tridiagonal(system.matrix_a, rhs);
}

PdeSolution solve_forward(const ModelParams& params, const GridSpec& grid,
                          BoundaryValues bc, const DriftFn& drift) {
  const auto cn = assemble_cn(params, grid, bc, drift);
  const int n = grid.n_interior();
  const double dtau = grid.dtau();

  PdeSolution sol{grid, params, {}};
  sol.values.assign(static_cast<std::size_t>(grid.n_y) * (grid.n_tau + 1),
                    0.0);

  auto write_level = [&](int j, std::span<const double> interior, double tau) {
    const double disc = std::exp(-params.r * tau);
    double* row = sol.values.data() + static_cast<std::size_t>(j) * grid.n_y;
    row[0] = bc.left * disc;
    row[grid.n_y - 1] = bc.right * disc;
    std::copy(interior.begin(), interior.end(), row + 1);
  };

  std::vector<double> u = interior_initial_values(grid);
  // The tau = 0 row holds the raw initial condition, including at the
  // boundary nodes.
  {
    double* row = sol.values.data();
    for (int i = 0; i < grid.n_y; ++i) row[i] = initial_condition(grid.y(i));
  }

  const ThomasFactorization factor(cn.system.matrix_a);
  std::vector<double> rhs(static_cast<std::size_t>(n));
  std::vector<double> u_next(static_cast<std::size_t>(n));
  for (int j = 0; j < grid.n_tau; ++j) {
    const double scale = boundary_scale(params.r, j * dtau, (j + 1) * dtau);
    cn.system.matrix_b.apply(u, rhs);
    for (int i = 0; i < n; ++i) {
      rhs[static_cast<std::size_t>(i)] +=
          scale * cn.system.boundary_vector[static_cast<std::size_t>(i)];
    }
    try {
      factor.solve(rhs, u_next);
    } catch (const SolveError& e) {
      throw SolveError("solve_forward: step " + std::to_string(j + 1) + ": " +
                       e.what());
    }
    u.swap(u_next);
    write_level(j + 1, u, (j + 1) * dtau);
  }
  return sol;
}

namespace {

double interpolate_row(std::span<const double> row, const GridSpec& grid,
                       double point) {
  const double dy = grid.dy();
  const double tol = 1e-12 * std::max({1.0, std::abs(grid.y_min),
                                       std::abs(grid.y_max)});
  if (point < grid.y_min - tol || point > grid.y_max + tol) {
    throw std::invalid_argument("observe: point " + std::to_string(point) +
                                " outside [y_min, y_max]");
  }
  const double s = (point - grid.y_min) / dy;
  const int nearest = static_cast<int>(std::lround(s));
  if (nearest >= 0 && nearest < grid.n_y &&
      std::abs(point - grid.y(nearest)) <= tol) {
    return row[static_cast<std::size_t>(nearest)];
  }
  const int left = std::clamp(static_cast<int>(std::floor(s)), 0,
                              grid.n_y - 2);
  const double w = (point - grid.y(left)) / dy;
  return (1.0 - w) * row[static_cast<std::size_t>(left)] +
         w * row[static_cast<std::size_t>(left + 1)];
}

}  // namespace

std::vector<double> observe(const PdeSolution& solution,
                            std::span<const double> points) {
  std::vector<double> out(points.size());
  const auto row = solution.terminal();
  for (std::size_t j = 0; j < points.size(); ++j) {
    out[j] = interpolate_row(row, solution.grid, points[j]);
  }
  return out;
}

std::vector<double> forward_observe(const ModelParams& params,
                                    const GridSpec& grid,
                                    std::span<const double> points,
                                    BoundaryValues bc, const DriftFn& drift) {
  const auto cn = assemble_cn(params, grid, bc, drift);
  const int n = grid.n_interior();
  const double dtau = grid.dtau();

  std::vector<double> u = interior_initial_values(grid);
  const ThomasFactorization factor(cn.system.matrix_a);
  std::vector<double> rhs(static_cast<std::size_t>(n));
  std::vector<double> u_next(static_cast<std::size_t>(n));
  for (int j = 0; j < grid.n_tau; ++j) {
    const double scale = boundary_scale(params.r, j * dtau, (j + 1) * dtau);
    cn.system.matrix_b.apply(u, rhs);
    for (int i = 0; i < n; ++i) {
      rhs[static_cast<std::size_t>(i)] +=
          scale * cn.system.boundary_vector[static_cast<std::size_t>(i)];
    }
    try {
      factor.solve(rhs, u_next);
    } catch (const SolveError& e) {
      throw SolveError("forward_observe: step " + std::to_string(j + 1) +
                       ": " + e.what());
    }
    u.swap(u_next);
  }

  // Assemble the terminal row including boundary nodes, then interpolate.
  std::vector<double> row(static_cast<std::size_t>(grid.n_y));
  const double disc = std::exp(-params.r * grid.tau_star);
  row.front() = bc.left * disc;
  row.back() = bc.right * disc;
  std::copy(u.begin(), u.end(), row.begin() + 1);

  std::vector<double> out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    out[j] = interpolate_row(row, grid, points[j]);
  }
  return out;
}

double analytic_digital_price(double y, double tau, double sigma0, double r) {
  if (tau <= 0.0) return y <= 0.0 ? 1.0 : 0.0;
  const double d =
      (-y + (r - 0.5 * sigma0 * sigma0) * tau) / (sigma0 * std::sqrt(tau));
  const double phi = 0.5 * std::erfc(-d / std::sqrt(2.0));
  return std::exp(-r * tau) * phi;
}

}  // namespace binopt
