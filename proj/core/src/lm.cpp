#include "binopt/lm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binopt/csv.hpp"
#include "binopt/pde.hpp"

namespace binopt {

void LmSettings::validate() const {
  if (!(lambda0 >= 0.0) || !(lambda_up > 1.0) || !(lambda_down > 0.0) ||
      !(lambda_down < 1.0) || max_iters < 1 || !(tol_step > 0.0) ||
      !(tol_grad > 0.0) || !(fd_step > 0.0) || jobs < 1) {
    throw std::invalid_argument("LmSettings: invalid settings");
  }
}

std::string to_string(LmStop reason) {
  switch (reason) {
    case LmStop::step_tolerance: return "step_tolerance";
    case LmStop::gradient_tolerance: return "gradient_tolerance";
    case LmStop::max_iterations: return "max_iterations";
    case LmStop::stalled: return "stalled";
  }
  return "unknown";
}

std::vector<std::array<double, 4>> jacobian_fd(const VectorFn& model,
                                               const ThetaVec& theta,
                                               double fd_step, int jobs) {
  if (!(fd_step > 0.0)) {
    throw std::invalid_argument("jacobian_fd: fd_step must be > 0");
  }
  if (jobs < 1) {
    throw std::invalid_argument("jacobian_fd: jobs must be >= 1");
  }

  std::array<ThetaVec, 4> hi_points;
  std::array<ThetaVec, 4> lo_points;
  std::array<double, 4> denoms;
  for (int p = 0; p < 4; ++p) {
    const double h = fd_step * std::max(1.0, std::abs(theta[p]));
    hi_points[p] = theta;
    lo_points[p] = theta;
    hi_points[p][p] += h;
    if (p == 3 && theta[3] - h <= 0.0) {
      // keep the sigma0 evaluation on the positive half-line
      denoms[p] = h;
    } else {
      lo_points[p][p] -= h;
      denoms[p] = 2.0 * h;
    }
  }

  auto eval_column = [&model](int p, const ThetaVec& point) {
    try {
      return model(point);
    } catch (const std::exception& e) {
      throw std::runtime_error("jacobian_fd: column " + std::to_string(p) +
                               " failed: " + e.what());
    }
  };

  std::array<std::vector<double>, 4> f_hi;
  std::array<std::vector<double>, 4> f_lo;
  if (jobs == 1) {
    for (int p = 0; p < 4; ++p) {
      f_hi[p] = eval_column(p, hi_points[p]);
      f_lo[p] = eval_column(p, lo_points[p]);
    }
  } else {
    std::array<std::future<std::vector<double>>, 4> hi_futures;
    std::array<std::future<std::vector<double>>, 4> lo_futures;
    for (int p = 0; p < 4; ++p) {
      hi_futures[p] = std::async(std::launch::async, eval_column, p,
                                 hi_points[p]);
      lo_futures[p] = std::async(std::launch::async, eval_column, p,
                                 lo_points[p]);
    }
    for (int p = 0; p < 4; ++p) {
      f_hi[p] = hi_futures[p].get();
      f_lo[p] = lo_futures[p].get();
    }
  }

  std::vector<std::array<double, 4>> jac(f_hi[0].size(),
                                         {0.0, 0.0, 0.0, 0.0});
  for (int p = 0; p < 4; ++p) {
    for (std::size_t j = 0; j < jac.size(); ++j) {
      jac[j][p] = (f_hi[p][j] - f_lo[p][j]) / denoms[p];
    }
  }
  return jac;
}

namespace {

VectorFn forward_map(const PosteriorSpec& spec) {
  return [&spec](const ThetaVec& t) {
    return forward_observe(ModelParams::from_theta(t, spec.r), spec.grid,
                           spec.data.points);
  };
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> residual(const std::vector<double>& y,
                             const std::vector<double>& f) {
  std::vector<double> r(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) r[j] = y[j] - f[j];
  return r;
}

}  // namespace

std::vector<std::array<double, 4>> jacobian_fd(const PosteriorSpec& spec,
                                               const ThetaVec& theta,
                                               double fd_step) {
  return jacobian_fd(forward_map(spec), theta, fd_step);
}

LmResult lm_fit(const VectorFn& model, const std::vector<double>& y,
                const ThetaVec& init, const LmSettings& settings,
                const PriorBox* box) {
  settings.validate();
  constexpr double kLambdaCeiling = 1e14;

  LmResult result;
  ThetaVec theta = box ? box->clamp(init) : init;
  double lambda = settings.lambda0;

  auto eval_norm = [&](const ThetaVec& t) -> double {
    try {
      const auto f = model(t);
      if (f.size() != y.size()) {
        throw std::runtime_error("lm_fit: model/data size mismatch");
      }
      const double n = norm2(residual(y, f));
      return std::isfinite(n) ? n
                              : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double res_norm = eval_norm(theta);
  result.residual_history.push_back(res_norm);
  result.trace.push_back({0, theta, res_norm, lambda});
  if (!std::isfinite(res_norm)) {
    result.theta_final = theta;
    result.termination_reason = LmStop::stalled;
    return result;
  }

  for (int iter = 1; iter <= settings.max_iters; ++iter) {
    result.iterations = iter;

    Eigen::MatrixXd jac(static_cast<Eigen::Index>(y.size()), 4);
    try {
      const auto rows = jacobian_fd(model, theta, settings.fd_step);
      for (std::size_t j = 0; j < rows.size(); ++j) {
        for (int p = 0; p < 4; ++p) {
          jac(static_cast<Eigen::Index>(j), p) = rows[j][p];
        }
      }
    } catch (const std::exception&) {
      result.theta_final = theta;
      result.termination_reason = LmStop::stalled;
      return result;
    }

    const auto f = model(theta);
    Eigen::VectorXd r(static_cast<Eigen::Index>(y.size()));
    for (std::size_t j = 0; j < y.size(); ++j) {
      r(static_cast<Eigen::Index>(j)) = y[j] - f[j];
    }
    const Eigen::Vector4d grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= settings.tol_grad) {
      result.theta_final = theta;
      result.converged = true;
      result.termination_reason = LmStop::gradient_tolerance;
      return result;
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;

    // Inner damping loop: raise lambda until a step reduces the residual.
    bool accepted = false;
    while (!accepted) {
      const Eigen::Matrix4d a =
          jtj + lambda * Eigen::Matrix4d::Identity();
      const Eigen::Vector4d delta = a.ldlt().solve(grad);
      ThetaVec trial = theta;
      bool finite = true;
      for (int p = 0; p < 4; ++p) {
        trial[p] += delta(p);
        finite = finite && std::isfinite(trial[p]);
      }
      if (box) trial = box->clamp(trial);
      const double trial_norm = finite
                                    ? eval_norm(trial)
                                    : std::numeric_limits<double>::infinity();
      if (trial_norm < res_norm) {
        accepted = true;
        const double step_norm = delta.norm();
        double theta_norm = 0.0;
        for (double t : theta) theta_norm += t * t;
        theta_norm = std::sqrt(theta_norm);
        theta = trial;
        res_norm = trial_norm;
        lambda = std::max(lambda * settings.lambda_down, 1e-12);
        result.residual_history.push_back(res_norm);
        result.trace.push_back({iter, theta, res_norm, lambda});
        if (step_norm <= settings.tol_step * (theta_norm + settings.tol_step)) {
          result.theta_final = theta;
          result.converged = true;
          result.termination_reason = LmStop::step_tolerance;
          return result;
        }
      } else {
        lambda *= settings.lambda_up;
        if (lambda > kLambdaCeiling) {
          result.theta_final = theta;
          result.termination_reason = LmStop::stalled;
          return result;
        }
      }
    }
  }
  result.theta_final = theta;
  result.termination_reason = LmStop::max_iterations;
  return result;
}

LmResult lm_solve(const PosteriorSpec& spec, const ThetaVec& init,
                  const LmSettings& settings) {
  for (double t : init) {
    if (!std::isfinite(t)) {
      throw std::invalid_argument("lm_solve: init must be finite");
    }
  }
  return lm_fit(forward_map(spec), spec.data.values, init, settings,
                settings.project_to_prior ? &spec.prior : nullptr);
}

std::string lm_to_csv(const LmResult& result) {
  std::ostringstream out;
  out << "iter,theta1,theta2,theta3,sigma0,residual,lambda\n";
  for (const auto& row : result.trace) {
    out << row.iter;
    for (int p = 0; p < 4; ++p) {
      out << ',' << csv::format_double(row.theta[p]);
    }
    out << ',' << csv::format_double(row.residual_norm) << ','
        << csv::format_double(row.lambda) << '\n';
  }
  return out.str();
}

}  // namespace binopt
