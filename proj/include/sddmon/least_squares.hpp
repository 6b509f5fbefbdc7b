#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace sddmon {

struct LmOptions {
  int max_iterations = 500;
  double cost_tolerance = 1e-10;  // relative decrease of the residual sum of squares
  double initial_lambda = 1e-3;
};

struct LmResult {
  Eigen::VectorXd params;
  double cost = std::numeric_limits<double>::infinity();  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling. `model(p, r, J)`
/// fills residuals r (size m) and their Jacobian J (m x k) at p, and returns
/// false when p is outside the model's domain.
template <typename Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd p, const LmOptions& opt = {}) {
  LmResult out;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  if (!model(p, r, jac) || !r.allFinite()) return out;
  double cost = r.squaredNorm();
  double lambda = opt.initial_lambda;
  Eigen::VectorXd r_new;
  Eigen::MatrixXd jac_new;

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (cost <= 1e-30) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-300) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    while (lambda < 1e20) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index i = 0; i < damped.rows(); ++i)
        damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd trial = p + step;
      if (model(trial, r_new, jac_new) && r_new.allFinite()) {
        const double trial_cost = r_new.squaredNorm();
        if (trial_cost < cost) {
          const double decrease = cost - trial_cost;
          const bool tiny_step = step.norm() <= 1e-15 * (p.norm() + 1e-15);
          p = trial;
          r.swap(r_new);
          jac.swap(jac_new);
          const double previous = cost;
          cost = trial_cost;
          lambda = std::max(lambda / 3.0, 1e-15);
          accepted = true;
          if (decrease <= opt.cost_tolerance * previous || tiny_step) out.converged = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No downhill step at any damping: p is a stationary point.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.params = p;
  out.cost = cost;
  out.iterations = it;
  return out;
}

}  // namespace sddmon
