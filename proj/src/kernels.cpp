#include "svgpmap/kernels.hpp"

#include <cmath>

namespace svgpmap {

KernelParams KernelParams::from_values(double lengthscale, double signal_variance) {
  return {std::log(lengthscale), std::log(signal_variance)};
}

double KernelParams::lengthscale() const { return std::exp(log_lengthscale); }
double KernelParams::signal_variance() const { return std::exp(log_signal_variance); }

double matern12(const Eigen::Vector2d& x1, const Eigen::Vector2d& x2, const KernelParams& params) {
  const double r = (x1 - x2).norm();
  return params.signal_variance() * std::exp(-r / params.lengthscale());
}

Eigen::Vector2d matern12_grad_x1(const Eigen::Vector2d& x1, const Eigen::Vector2d& x2,
                                 const KernelParams& params) {
  const Eigen::Vector2d d = x1 - x2;
  const double r = d.norm();
  if (r == 0.0) return Eigen::Vector2d::Zero();
  const double ell = params.lengthscale();
  const double k = params.signal_variance() * std::exp(-r / ell);
  return -k / (ell * r) * d;
}

namespace {

inline double matern12_row_entry(double dx, double dy, double inv_ell, double s2) {
  return s2 * std::exp(-std::sqrt(dx * dx + dy * dy) * inv_ell);
}

}  // namespace

Eigen::MatrixXd gram(const Points2& x1, const Points2& x2, const KernelParams& params) {
  const Eigen::Index n = x1.rows();
  const Eigen::Index m = x2.rows();
  const double inv_ell = 1.0 / params.lengthscale();
  const double s2 = params.signal_variance();
  Eigen::MatrixXd k(n, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x1(i, 0);
    const double yi = x1(i, 1);
    for (Eigen::Index j = 0; j < m; ++j) {
      k(i, j) = matern12_row_entry(xi - x2(j, 0), yi - x2(j, 1), inv_ell, s2);
    }
  }
  return k;
}

Eigen::MatrixXd gram_serial(const Points2& x1, const Points2& x2, const KernelParams& params) {
  Eigen::MatrixXd k(x1.rows(), x2.rows());
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    for (Eigen::Index j = 0; j < x2.rows(); ++j) {
      k(i, j) = matern12(x1.row(i).transpose(), x2.row(j).transpose(), params);
    }
  }
  return k;
}

GramGradients gram_grad(const Points2& x1, const Points2& x2, const KernelParams& params) {
  const double inv_ell = 1.0 / params.lengthscale();
  GramGradients g;
  g.d_log_signal_variance = gram(x1, x2, params);
  g.d_log_lengthscale.resize(x1.rows(), x2.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    for (Eigen::Index j = 0; j < x2.rows(); ++j) {
      const double r = (x1.row(i) - x2.row(j)).norm();
      // d/d log l of s2 exp(-r/l) = k * r / l
      g.d_log_lengthscale(i, j) = g.d_log_signal_variance(i, j) * r * inv_ell;
    }
  }
  return g;
}

Points2 gram_input_grad(const Points2& x1, const Points2& x2, const Eigen::MatrixXd& weights,
                        const KernelParams& params) {
  const double inv_ell = 1.0 / params.lengthscale();
  const double s2 = params.signal_variance();
  Points2 out = Points2::Zero(x1.rows(), 2);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    double gx = 0.0;
    double gy = 0.0;
    for (Eigen::Index j = 0; j < x2.rows(); ++j) {
      const double w = weights(i, j);
      if (w == 0.0) continue;
      const double dx = x1(i, 0) - x2(j, 0);
      const double dy = x1(i, 1) - x2(j, 1);
      const double r = std::sqrt(dx * dx + dy * dy);
      if (r == 0.0) continue;
      const double k = s2 * std::exp(-r * inv_ell);
      const double c = -w * k * inv_ell / r;
      gx += c * dx;
      gy += c * dy;
    }
    out(i, 0) = gx;
    out(i, 1) = gy;
  }
  return out;
}

GramContraction contract_gram_grad(const Points2& x1, const Points2& x2, const Eigen::MatrixXd& k,
                                   const Eigen::MatrixXd& weights, const KernelParams& params) {
  const double inv_ell = 1.0 / params.lengthscale();
  GramContraction out;
  out.input = Points2::Zero(x1.rows(), 2);
  double dl = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : dl)
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    double gx = 0.0;
    double gy = 0.0;
    for (Eigen::Index j = 0; j < x2.rows(); ++j) {
      const double dx = x1(i, 0) - x2(j, 0);
      const double dy = x1(i, 1) - x2(j, 1);
      const double r = std::sqrt(dx * dx + dy * dy);
      const double wk = weights(i, j) * k(i, j) * inv_ell;
      dl += wk * r;
      if (r == 0.0) continue;
      gx -= wk * dx / r;
      gy -= wk * dy / r;
    }
    out.input(i, 0) = gx;
    out.input(i, 1) = gy;
  }
  out.d_log_lengthscale = dl;
  return out;
}

}  // namespace svgpmap
