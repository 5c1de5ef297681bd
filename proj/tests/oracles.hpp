#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's kernel, ELBO or prediction code paths.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

inline double exp_kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double ell, double s2) {
  return s2 * std::exp(-std::hypot(a.x() - b.x(), a.y() - b.y()) / ell);
}

inline Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ell, double s2) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = exp_kernel(a.row(i).transpose(), b.row(j).transpose(), ell, s2);
  return k;
}

/// log N(y | 0, K + sn2 I).
inline double exact_log_marginal(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ell, double s2,
                                 double sn2) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c = gram(x, x, ell, s2);
  c.diagonal().array() += sn2;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * y.dot(ldlt.solve(y)) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

struct GpPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

inline GpPosterior exact_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& xs,
                                   double ell, double s2, double sn2) {
  Eigen::MatrixXd c = gram(x, x, ell, s2);
  c.diagonal().array() += sn2;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
  const Eigen::MatrixXd ksx = gram(xs, x, ell, s2);
  GpPosterior out;
  out.mean = ksx * ldlt.solve(y);
  out.variance = (s2 - (ksx * ldlt.solve(ksx.transpose())).diagonal().array()).matrix();
  return out;
}

/// Optimal Gaussian q(u) for a Gaussian likelihood (collapsed bound optimum).
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> optimal_variational(const Eigen::MatrixXd& x,
                                                                      const Eigen::VectorXd& y,
                                                                      const Eigen::MatrixXd& z, double ell,
                                                                      double s2, double sn2) {
  const Eigen::MatrixXd kss = gram(z, z, ell, s2);
  const Eigen::MatrixXd ksx = gram(z, x, ell, s2);
  // S* = Kss (Kss + Ksx Kxs / sn2)^-1 Kss,  m* = Kss (Kss + Ksx Kxs / sn2)^-1 Ksx y / sn2
  const Eigen::MatrixXd sigma = kss + ksx * ksx.transpose() / sn2;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  Eigen::MatrixXd cov = kss * ldlt.solve(kss);
  cov = 0.5 * (cov + cov.transpose()).eval();
  const Eigen::VectorXd mean = kss * ldlt.solve(ksx * y) / sn2;
  return {mean, cov};
}

/// exp of a 4x4 matrix by scaling and squaring a truncated Taylor series.
inline Eigen::Matrix4d taylor_expm(const Eigen::Matrix4d& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.1) {
    norm *= 0.5;
    ++squarings;
  }
  const Eigen::Matrix4d scaled = a / std::pow(2.0, squarings);
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d sum = Eigen::Matrix4d::Identity();
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

inline Eigen::Matrix4d se3_hat(const Eigen::Matrix<double, 6, 1>& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 1) = -xi(5);
  m(0, 2) = xi(4);
  m(1, 0) = xi(5);
  m(1, 2) = -xi(3);
  m(2, 0) = -xi(4);
  m(2, 1) = xi(3);
  m.topRightCorner<3, 1>() = xi.head<3>();
  return m;
}

struct Moments3 {
  Eigen::Vector3d mean;
  Eigen::Matrix3d cov;
};

/// Monte Carlo push-forward of N(0, pose_cov) x N(0, patch_cov) through
/// p = expm(xi^) (e + zeta), using Eigen's Pade matrix exponential.
inline Moments3 mc_pushforward(const Eigen::Matrix<double, 6, 6>& pose_cov, const Eigen::Matrix3d& patch_cov,
                               const Eigen::Vector3d& patch_mean, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const auto ldlt_p = Eigen::LDLT<Eigen::Matrix<double, 6, 6>>(pose_cov);
  const auto ldlt_e = Eigen::LDLT<Eigen::Matrix3d>(patch_cov);
  const Eigen::Matrix<double, 6, 6> sp =
      ldlt_p.transpositionsP().transpose() * Eigen::Matrix<double, 6, 6>(ldlt_p.matrixL()) *
      ldlt_p.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Eigen::Matrix3d se = ldlt_e.transpositionsP().transpose() * Eigen::Matrix3d(ldlt_e.matrixL()) *
                             ldlt_e.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d sum2 = Eigen::Matrix3d::Zero();
  const Eigen::Vector3d ref = patch_mean;
  for (int s = 0; s < samples; ++s) {
    Eigen::Matrix<double, 6, 1> w;
    for (int i = 0; i < 6; ++i) w(i) = n01(rng);
    Eigen::Vector3d v(n01(rng), n01(rng), n01(rng));
    const Eigen::Matrix<double, 6, 1> xi = sp * w;
    const Eigen::Vector3d e = patch_mean + se * v;
    const Eigen::Matrix4d t = se3_hat(xi).exp();
    const Eigen::Vector3d p = t.topLeftCorner<3, 3>() * e + t.topRightCorner<3, 1>();
    const Eigen::Vector3d d = p - ref;
    sum += d;
    sum2 += d * d.transpose();
  }
  Moments3 out;
  const Eigen::Vector3d md = sum / samples;
  out.mean = ref + md;
  out.cov = sum2 / samples - md * md.transpose();
  return out;
}

/// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                 Eigen::Index i, double h) {
  const double x0 = x(i);
  x(i) = x0 + h;
  const double fp = f(x);
  x(i) = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

inline Eigen::MatrixXd random_psd(int n, std::mt19937_64& rng, int rank = -1) {
  std::normal_distribution<double> n01;
  const int r = rank < 0 ? n : rank;
  Eigen::MatrixXd a(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = n01(rng);
  Eigen::MatrixXd m = a * a.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace oracle
