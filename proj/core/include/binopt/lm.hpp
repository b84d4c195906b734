#pragma once

#include <functional>
#include <string>
#include <vector>

#include "binopt/inference.hpp"
#include "binopt/model.hpp"

namespace binopt {

/// Damped least-squares settings. lambda is multiplied by lambda_up after a
/// rejected step and by lambda_down after an accepted one.
struct LmSettings {
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  int max_iters = 200;
  double tol_step = 1e-8;
  double tol_grad = 1e-8;
  double fd_step = 1e-5;
  /// Optional projection of iterates onto the prior box (off by default:
  /// the documented baseline is unbounded).
  bool project_to_prior = false;
  /// Concurrent model evaluations for the finite-difference Jacobian
  /// (execution policy, not part of the config schema).
  int jobs = 1;

  void validate() const;
};

enum class LmStop {
  step_tolerance,
  gradient_tolerance,
  max_iterations,
  stalled,  // damping grew past its ceiling without an acceptable step
};

std::string to_string(LmStop reason);

struct LmTraceRow {
  int iter = 0;
  ThetaVec theta{};
  double residual_norm = 0.0;
  double lambda = 0.0;
};

struct LmResult {
  ThetaVec theta_final{};
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // ||Y - F(theta)|| per accepted step
  LmStop termination_reason = LmStop::max_iterations;
  std::vector<LmTraceRow> trace;
};

/// Vector-valued model theta -> F(theta).
using VectorFn = std::function<std::vector<double>(const ThetaVec&)>;

/// m x 4 Jacobian by central finite differences with per-column step
/// h_p = fd_step * max(1, |theta_p|). The sigma0 column falls back to a
/// one-sided forward difference when theta_3 - h would leave the positive
/// half-line. Solver failures are rethrown naming the failing column.
/// With jobs > 1 the perturbed model evaluations run concurrently; the
/// result is identical to the sequential one.
std::vector<std::array<double, 4>> jacobian_fd(const VectorFn& model,
                                               const ThetaVec& theta,
                                               double fd_step, int jobs = 1);

/// Jacobian of the posterior's forward map F(theta) at fixed r.
std::vector<std::array<double, 4>> jacobian_fd(const PosteriorSpec& spec,
                                               const ThetaVec& theta,
                                               double fd_step);

/// Damped Gauss-Newton iteration on ||y - F(theta)||^2: steps solve
/// (J^T J + lambda I) delta = J^T (y - F) and are accepted only when they
/// reduce the residual norm. Non-convergence is reported, never thrown.
LmResult lm_fit(const VectorFn& model, const std::vector<double>& y,
                const ThetaVec& init, const LmSettings& settings,
                const PriorBox* box = nullptr);

/// LM on the inverse problem data. The forward map is evaluated without the
/// prior box (unbounded baseline); sigma0 enters only squared, so negative
/// excursions stay solvable.
LmResult lm_solve(const PosteriorSpec& spec, const ThetaVec& init,
                  const LmSettings& settings);

/// CSV with header `iter,theta1,theta2,theta3,sigma0,residual,lambda`.
std::string lm_to_csv(const LmResult& result);

}  // namespace binopt
