#pragma once

#include <Eigen/Dense>

namespace svgpmap {

/// Row-per-point 2-D inputs (map-frame x, y in meters).
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Isotropic stationary kernel hyperparameters, stored as logs.
struct KernelParams {
  double log_lengthscale = 0.0;
  double log_signal_variance = 0.0;

  static KernelParams from_values(double lengthscale, double signal_variance);
  double lengthscale() const;
  double signal_variance() const;
};

/// Matern-1/2 (exponential) covariance: s2 * exp(-|x1 - x2| / l).
double matern12(const Eigen::Vector2d& x1, const Eigen::Vector2d& x2, const KernelParams& params);

/// d k(x1, x2) / d x1. The kernel is not differentiable at x1 == x2; zero is
/// returned there.
Eigen::Vector2d matern12_grad_x1(const Eigen::Vector2d& x1, const Eigen::Vector2d& x2,
                                 const KernelParams& params);

/// Gram matrix, parallel over rows.
Eigen::MatrixXd gram(const Points2& x1, const Points2& x2, const KernelParams& params);

/// Single-threaded reference for `gram`.
Eigen::MatrixXd gram_serial(const Points2& x1, const Points2& x2, const KernelParams& params);

struct GramGradients {
  Eigen::MatrixXd d_log_lengthscale;
  Eigen::MatrixXd d_log_signal_variance;
};

GramGradients gram_grad(const Points2& x1, const Points2& x2, const KernelParams& params);

/// Row i of the result is sum_j weights(i, j) * d k(x1_i, x2_j) / d x1_i.
Points2 gram_input_grad(const Points2& x1, const Points2& x2, const Eigen::MatrixXd& weights,
                        const KernelParams& params);

/// sum_ij weights(i, j) dK_ij / d log l together with gram_input_grad, in one
/// pass reusing the precomputed `k = gram(x1, x2, params)`.
struct GramContraction {
  double d_log_lengthscale = 0.0;
  Points2 input;
};

GramContraction contract_gram_grad(const Points2& x1, const Points2& x2, const Eigen::MatrixXd& k,
                                   const Eigen::MatrixXd& weights, const KernelParams& params);

}  // namespace svgpmap
