#include "svgpmap/errors.hpp"
#include "svgpmap/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace svgpmap;

namespace {

Dataset wavy_dataset(int n, double cov, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::normal_distribution<double> n01;
  Dataset d(n);
  for (auto& p : d) {
    p.mean_xy = Eigen::Vector2d(u(rng), u(rng));
    p.cov_xy = cov * Eigen::Matrix2d::Identity();
    p.depth = -20.0 + 2.0 * std::sin(0.4 * p.mean_xy.x()) * std::cos(0.3 * p.mean_xy.y()) + 0.05 * n01(rng);
  }
  return d;
}

OptimConfig small_config() {
  OptimConfig c;
  c.learning_rate = 0.02;
  c.minibatch_size = 64;
  c.max_steps = 150;
  c.ema_window = 20;
  c.ema_rel_tol = 0.0;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  Adam adam(3, 0.9);
  Eigen::VectorXd g(3);
  g << 2.0, -1e-3, 5e4;
  const Eigen::VectorXd step = adam.step(g);
  EXPECT_NEAR(step(0), 0.9, 1e-7);
  EXPECT_NEAR(step(1), -0.9, 1e-4);
  EXPECT_NEAR(step(2), 0.9, 1e-7);
  EXPECT_EQ(adam.iterations(), 1);
}

TEST(Adam, AscendsConcaveQuadratic) {
  Adam adam(2, 0.05);
  Eigen::Vector2d x(3.0, -4.0);
  const Eigen::Vector2d target(1.0, 2.0);
  for (int i = 0; i < 2000; ++i) x += adam.step(-(x - target));
  EXPECT_LT((x - target).norm(), 1e-2);
}

TEST(EmaStop, ConstantSeriesStopsAfterWindow) {
  const std::vector<double> flat(11, -5.0);
  EXPECT_TRUE(ema_stop(flat, 10, 1e-4));
  EXPECT_FALSE(ema_stop(std::span(flat).first(10), 10, 1e-4));
}

TEST(EmaStop, LinearRampDoesNotStop) {
  std::vector<double> ramp(500);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  EXPECT_FALSE(ema_stop(ramp, 50, 1e-4));
}

TEST(EmaStop, GeometricDecayMatchesClosedForm) {
  // x_t = c + r^t. EMA_t - c = r^t * a (1 - (b/r)^{t+1}) / (1 - b/r) + b^t (1 - a / (1 - b/r))
  // with a = alpha, b = 1 - alpha. Check the rule against that expression.
  const int window = 10;
  const double alpha = 2.0 / (window + 1.0), b = 1.0 - alpha, r = 0.9, c = 100.0;
  auto ema_closed = [&](int t) {
    const double q = b / r;
    const double forced = std::pow(r, t) * alpha * (1.0 - std::pow(q, t)) / (1.0 - q);
    return c + forced + std::pow(b, t) * 1.0;
  };
  std::vector<double> x;
  for (int t = 0; t < 200; ++t) x.push_back(c + std::pow(r, t));
  const std::vector<double> ema = ema_series(x, window);
  for (int t = 0; t < 200; ++t) EXPECT_NEAR(ema[t], ema_closed(t), 1e-12) << t;

  const double tol = 1e-4;
  int first = -1;
  for (int t = window; t < 200 && first < 0; ++t) {
    const double prev = ema_closed(t - window);
    if (std::abs(ema_closed(t) - prev) / (std::abs(prev) + 1e-12) < tol) first = t;
  }
  ASSERT_GT(first, window);
  EXPECT_FALSE(ema_stop(std::span(x).first(first), window, tol));
  EXPECT_TRUE(ema_stop(std::span(x).first(first + 1), window, tol));
}

TEST(EmaStop, RejectsTinyWindow) {
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(ema_stop(x, 1, 0.1), Error);
}

TEST(Train, FlatTerrainConvergesToConstant) {
  Dataset d = wavy_dataset(200, 0.0, 1);
  for (auto& p : d) p.depth = -15.0;
  SvgpModel m = init_model(d, 10, InducingInit::Grid, 1);
  OptimConfig c = small_config();
  c.max_steps = 300;
  const TrainResult r = train(m, d, c, TrainingMode::DI);
  Points2 q(3, 2);
  q << 5, 5, 10, 12, 18, 1;
  const Prediction p = predict(r.model, q);
  EXPECT_LT((p.mean.array() + 15.0).abs().maxCoeff(), 0.05);
  EXPECT_TRUE(p.variance.allFinite());
}

TEST(Train, UiWithZeroCovarianceEqualsDiBitForBit) {
  const Dataset d = wavy_dataset(300, 0.0, 2);
  const SvgpModel m = init_model(d, 12, InducingInit::KMeans, 2);
  const OptimConfig c = small_config();
  const TrainResult ui = train(m, d, c, TrainingMode::UI);
  const TrainResult di = train(m, d, c, TrainingMode::DI);
  EXPECT_EQ(ui.trace.elbo, di.trace.elbo);
  EXPECT_EQ(pack_parameters(ui.model), pack_parameters(di.model));
}

TEST(Train, SameSeedIsDeterministic) {
  const Dataset d = wavy_dataset(300, 0.2, 3);
  const SvgpModel m = init_model(d, 12, InducingInit::KMeans, 3);
  const OptimConfig c = small_config();
  const TrainResult a = train(m, d, c, TrainingMode::UI);
  const TrainResult b = train(m, d, c, TrainingMode::UI);
  EXPECT_EQ(a.trace.elbo, b.trace.elbo);
  EXPECT_EQ(pack_parameters(a.model), pack_parameters(b.model));
  OptimConfig other = c;
  other.seed = c.seed + 1;
  EXPECT_NE(train(m, d, other, TrainingMode::UI).trace.elbo, a.trace.elbo);
}

TEST(Train, FullBatchDiIsNearlyMonotone) {
  const Dataset d = wavy_dataset(150, 0.0, 4);
  const SvgpModel m = init_model(d, 10, InducingInit::Grid, 4);
  OptimConfig c = small_config();
  c.minibatch_size = d.size();
  c.learning_rate = 0.01;
  c.max_steps = 400;
  const TrainResult r = train(m, d, c, TrainingMode::DI);
  const std::vector<double>& e = r.trace.elbo;
  ASSERT_EQ(e.size(), 400u);
  const int window = 10;
  std::vector<double> means;
  for (std::size_t s = 0; s + window <= e.size(); s += window) {
    means.push_back(std::accumulate(e.begin() + s, e.begin() + s + window, 0.0) / window);
  }
  int violations = 0;
  for (std::size_t i = 1; i < means.size(); ++i) violations += means[i] < means[i - 1];
  EXPECT_LE(violations, static_cast<int>(0.05 * (means.size() - 1)));
  EXPECT_GT(e.back(), e.front());
}

TEST(Train, UiMinibatchElboHasPositiveVariance) {
  const Dataset d = wavy_dataset(100, 0.5, 5);
  const SvgpModel m = init_model(d, 8, InducingInit::Grid, 5);
  OptimConfig c = small_config();
  c.minibatch_size = d.size();
  c.learning_rate = 1e-12;
  c.max_steps = 30;
  const TrainResult r = train(m, d, c, TrainingMode::UI);
  const std::vector<double>& e = r.trace.elbo;
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
  double var = 0.0;
  for (double v : e) var += (v - mean) * (v - mean);
  EXPECT_GT(var / e.size(), 0.0);
}

TEST(Train, FrozenGroupsStayFixed) {
  const Dataset d = wavy_dataset(200, 0.1, 6);
  const SvgpModel m = init_model(d, 9, InducingInit::Grid, 6);
  OptimConfig c = small_config();
  c.max_steps = 20;
  c.train_inducing = false;
  c.train_hyperparameters = false;
  const TrainResult r = train(m, d, c, TrainingMode::UI);
  EXPECT_EQ(r.model.inducing.z, m.inducing.z);
  EXPECT_EQ(r.model.kernel.log_lengthscale, m.kernel.log_lengthscale);
  EXPECT_EQ(r.model.log_noise_variance, m.log_noise_variance);
  EXPECT_NE(r.model.variational.mean, m.variational.mean);
}

TEST(Train, NonFiniteTargetsRaiseDivergedTraining) {
  Dataset d = wavy_dataset(50, 0.0, 7);
  const SvgpModel m = init_model(d, 5, InducingInit::Grid, 7);
  d[3].depth = std::nan("");
  OptimConfig c = small_config();
  c.minibatch_size = d.size();
  try {
    train(m, d, c, TrainingMode::DI);
    FAIL();
  } catch (const DivergedTraining& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergedTraining);
    EXPECT_EQ(e.trace().steps, 0u);
  }
}

TEST(Train, EmptyDatasetRejected) {
  const SvgpModel m = init_model(wavy_dataset(10, 0.0, 8), 3, InducingInit::Grid);
  try {
    train(m, Dataset{}, small_config(), TrainingMode::DI);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}
