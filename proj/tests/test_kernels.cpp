#include "svgpmap/kernels.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace svgpmap;

namespace {

Points2 random_points(int n, std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Points2 p(n, 2);
  for (int i = 0; i < n; ++i) p.row(i) << u(rng), u(rng);
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

}  // namespace

TEST(KernelParams, LogRoundTrip) {
  const KernelParams p = KernelParams::from_values(3.7, 0.25);
  EXPECT_NEAR(p.lengthscale(), 3.7, 3.7 * 1e-14);
  EXPECT_NEAR(p.signal_variance(), 0.25, 0.25 * 1e-14);
  EXPECT_GT((KernelParams{-40.0, -40.0}.lengthscale()), 0.0);
}

TEST(Matern12, AnalyticValues) {
  const KernelParams p = KernelParams::from_values(1.0, 2.0);
  const Eigen::Vector2d x(0.3, -1.2);
  EXPECT_DOUBLE_EQ(matern12(x, x, p), 2.0);
  const KernelParams unit = KernelParams::from_values(2.5, 1.0);
  EXPECT_NEAR(matern12(Eigen::Vector2d(0, 0), Eigen::Vector2d(1.5, 2.0), unit), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::exp(-1.0), 0.367879, 1e-6);
}

TEST(Matern12, Stationarity) {
  const KernelParams p = KernelParams::from_values(1.75, 0.5);
  // Dyadic coordinates make the shifted differences exact.
  const Eigen::Vector2d a(0.5, -1.25), b(3.75, 2.0), t(16.0, -32.5);
  EXPECT_EQ(matern12(a + t, b + t, p), matern12(a, b, p));

  std::mt19937_64 rng(1);
  const Points2 x = random_points(30, rng);
  for (int i = 0; i + 1 < x.rows(); ++i) {
    const Eigen::Vector2d shift(100.0 * i, -7.0 * i);
    const double k0 = matern12(x.row(i).transpose(), x.row(i + 1).transpose(), p);
    const double k1 = matern12(x.row(i).transpose() + shift, x.row(i + 1).transpose() + shift, p);
    EXPECT_NEAR(k1, k0, 1e-12);
  }
}

TEST(Gram, DiagonalAndSinglePair) {
  std::mt19937_64 rng(2);
  const Points2 x = random_points(15, rng);
  const KernelParams p = KernelParams::from_values(2.0, 3.5);
  const Eigen::MatrixXd k = gram(x, x, p);
  for (int i = 0; i < x.rows(); ++i) EXPECT_DOUBLE_EQ(k(i, i), 3.5);
  EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const Points2 one = x.topRows(1);
  const Points2 two = x.middleRows(1, 1);
  EXPECT_NEAR(gram(one, two, p)(0, 0), matern12(x.row(0).transpose(), x.row(1).transpose(), p), 1e-15);
}

TEST(Gram, ParallelMatchesSerialReferenceAndOracle) {
  std::mt19937_64 rng(3);
  const Points2 a = random_points(123, rng, 50.0);
  const Points2 b = random_points(77, rng, 50.0);
  const KernelParams p = KernelParams::from_values(7.0, 1.3);
  const Eigen::MatrixXd k = gram(a, b, p);
  EXPECT_LT((k - gram_serial(a, b, p)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((k - oracle::gram(a, b, 7.0, 1.3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gram, PositiveSemidefinite) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Points2 x = random_points(20, rng);
    const KernelParams p = KernelParams::from_values(0.5 + trial, 2.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(x, x, p));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * 20 * 2.0);
  }
}

TEST(GramGrad, HyperparametersMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  const Points2 a = random_points(12, rng);
  const Points2 b = random_points(9, rng);
  const KernelParams p{std::log(3.0), std::log(1.7)};
  const GramGradients g = gram_grad(a, b, p);
  const double h = 1e-5;
  for (int which = 0; which < 2; ++which) {
    KernelParams up = p, down = p;
    (which == 0 ? up.log_lengthscale : up.log_signal_variance) += h;
    (which == 0 ? down.log_lengthscale : down.log_signal_variance) -= h;
    const Eigen::MatrixXd fd = (gram(a, b, up) - gram(a, b, down)) / (2 * h);
    const Eigen::MatrixXd& an = which == 0 ? g.d_log_lengthscale : g.d_log_signal_variance;
    for (int i = 0; i < fd.rows(); ++i)
      for (int j = 0; j < fd.cols(); ++j) EXPECT_LT(rel_err(an(i, j), fd(i, j)), 1e-6) << which << " " << i << "," << j;
  }
}

TEST(GramGrad, InputLocationMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const Points2 a = random_points(6, rng);
  const Points2 b = random_points(8, rng);
  const KernelParams p = KernelParams::from_values(2.5, 0.9);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd w(a.rows(), b.rows());
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) w(i, j) = n01(rng);
  const Points2 g = gram_input_grad(a, b, w, p);
  const double h = 1e-5;
  for (int i = 0; i < a.rows(); ++i) {
    for (int d = 0; d < 2; ++d) {
      Points2 up = a, down = a;
      up(i, d) += h;
      down(i, d) -= h;
      const double fd = ((gram(up, b, p) - gram(down, b, p)).cwiseProduct(w)).sum() / (2 * h);
      EXPECT_LT(rel_err(g(i, d), fd), 1e-6);
    }
    const Eigen::Vector2d single = matern12_grad_x1(a.row(i).transpose(), b.row(0).transpose(), p);
    for (int d = 0; d < 2; ++d) {
      Eigen::Vector2d up = a.row(i).transpose(), down = up;
      up(d) += h;
      down(d) -= h;
      const double fd = (matern12(up, b.row(0).transpose(), p) - matern12(down, b.row(0).transpose(), p)) / (2 * h);
      EXPECT_LT(rel_err(single(d), fd), 1e-6);
    }
  }
}

TEST(GramGrad, FusedContractionMatchesSeparatePasses) {
  std::mt19937_64 rng(7);
  const Points2 a = random_points(9, rng);
  const Points2 b = random_points(13, rng);
  const KernelParams p = KernelParams::from_values(4.0, 1.2);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd w(a.rows(), b.rows());
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) w(i, j) = n01(rng);
  const GramContraction c = contract_gram_grad(a, b, gram(a, b, p), w, p);
  EXPECT_NEAR(c.d_log_lengthscale, gram_grad(a, b, p).d_log_lengthscale.cwiseProduct(w).sum(), 1e-12);
  EXPECT_LT((c.input - gram_input_grad(a, b, w, p)).cwiseAbs().maxCoeff(), 1e-12);
}
