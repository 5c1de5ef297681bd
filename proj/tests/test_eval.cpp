#include "svgpmap/errors.hpp"
#include "svgpmap/eval.hpp"
#include "svgpmap/survey.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace svgpmap;

namespace {

Terrain flat(double depth) {
  TerrainParams p;
  p.n_bumps = 0;
  p.n_waves = 0;
  p.base_depth = depth;
  return generate_terrain(0, p);
}

// A model whose posterior mean is exactly the constant prior mean: q(u) at
// the prior with zero mean.
SvgpModel constant_model(double depth, const Box& box) {
  SvgpModel m;
  m.kernel.log_lengthscale = std::log(30.0);
  m.kernel.log_signal_variance = std::log(2.0);
  m.prior_mean = depth;
  const Points2 z = grid_centers(box, 5);
  m.inducing.z = z;
  m.variational.mean = Eigen::VectorXd::Zero(z.rows());
  m.variational.chol_cov = factor_inducing(z, m.kernel).llt.matrixL();
  m.n_total = 100;
  return m;
}

}  // namespace

TEST(Grid, HundredSquaredCells) {
  const Box box;
  const Points2 c = grid_centers(box, 100);
  EXPECT_EQ(c.rows(), 10000);
  EXPECT_DOUBLE_EQ(c(0, 0), -148.5);
  EXPECT_DOUBLE_EQ(c(0, 1), -148.5);
  EXPECT_DOUBLE_EQ(c(1, 0), -145.5);
  EXPECT_DOUBLE_EQ(c(100, 1), -145.5);
  const GridMasks m = grid_masks(box, 0.25, 100);
  std::size_t held = 0;
  for (std::size_t k = 0; k < m.train.size(); ++k) {
    EXPECT_NE(m.train[k], m.heldout[k]);
    held += m.heldout[k];
  }
  EXPECT_EQ(held, 2500u);
  EXPECT_THROW(grid_centers(box, 0), Error);
}

TEST(ConsistencyError, ConstantTerrainIsReproduced) {
  const Terrain t = flat(-25.0);
  const PredictiveCache cache(constant_model(-25.0, t.box()));
  const GridMasks m = grid_masks(t.box(), 0.25, 100);
  const ErrorGrid g = consistency_error(cache, t, m.train, 100);
  EXPECT_EQ(g.cell_count(), 10000u);
  EXPECT_LT(g.rmse(), 1e-6);
}

TEST(ConsistencyError, ConstantBiasGivesThatRmse) {
  const Terrain t = flat(-25.0);
  const PredictiveCache cache(constant_model(-24.0, t.box()));
  const GridMasks m = grid_masks(t.box(), 0.25, 100);
  EXPECT_NEAR(consistency_error(cache, t, m.heldout, 100).rmse(), 1.0, 1e-12);
  const PredictionErrors e = prediction_error(cache, t, 0.25, 100);
  EXPECT_NEAR(e.rmse_train, 1.0, 1e-12);
  EXPECT_NEAR(e.rmse_heldout, 1.0, 1e-12);
  EXPECT_NEAR(e.rmse_all, 1.0, 1e-12);
  EXPECT_NEAR(e.rmse_heldout_subtracted, 0.0, 1e-12);
}

TEST(ConsistencyError, RmseIsPermutationInvariant) {
  ErrorGrid g;
  g.n = 3;
  g.error.resize(9);
  g.error << 0.1, 0.5, -0.2, 2.0, 0.0, 0.3, 1.1, -0.7, 0.4;
  g.mask.assign(9, true);
  g.mask[4] = false;
  const double a = g.rmse();
  ErrorGrid h = g;
  std::reverse(h.error.data(), h.error.data() + 9);
  std::reverse(h.mask.begin(), h.mask.end());
  EXPECT_NEAR(a, h.rmse(), 1e-15);
}

TEST(ConsistencyError, EmptyRegionThrows) {
  const Terrain t = flat(-25.0);
  const PredictiveCache cache(constant_model(-25.0, t.box()));
  try {
    consistency_error(cache, t, std::vector<bool>(10000, false), 100).rmse();
    FAIL() << "expected EmptyRegion";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRegion);
  }
  // Zero held-out fraction leaves the held-out mask empty.
  EXPECT_THROW(prediction_error(cache, t, 0.0, 100), Error);
  EXPECT_THROW(consistency_error(cache, t, std::vector<bool>(5, true), 100), Error);
}

TEST(ConsistencyError, CloudModeAgreesWithAnalyticWithinBinning) {
  const Terrain t = generate_terrain(2, TerrainParams{});
  SurveyNoise quiet;
  quiet.sensor_std = 0.0;
  LawnmowerPlan dense;
  dense.line_spacing = 30.0;
  const Survey s = simulate_survey(t, dense, MbesParams{}, quiet, 2);
  const PredictiveCache cache(constant_model(t.base_depth(), t.box()));
  const int n = 50;
  const GridMasks m = grid_masks(t.box(), 0.25, n);
  const ErrorGrid analytic = consistency_error(cache, t, m.train, n);
  const ErrorGrid cloud = consistency_error(cache, s.cloud(true), t.box(), m.train, n);

  // Maximum slope over the box, sampled finely.
  double max_slope = 0.0;
  const Points2 fine = grid_centers(t.box(), 600);
  for (Eigen::Index k = 0; k < fine.rows(); ++k) max_slope = std::max(max_slope, t.gradient(fine(k, 0), fine(k, 1)).norm());
  const double bound = std::hypot(t.box().width() / n, t.box().height() / n) * max_slope;

  std::size_t compared = 0;
  for (std::size_t k = 0; k < cloud.mask.size(); ++k) {
    if (!cloud.mask[k]) continue;
    EXPECT_LE(std::abs(cloud.reference(static_cast<Eigen::Index>(k)) - analytic.reference(static_cast<Eigen::Index>(k))),
              bound);
    ++compared;
  }
  EXPECT_GT(compared, cloud.mask.size() / 2);
  EXPECT_LE(std::abs(cloud.rmse() - analytic.rmse()), bound);
}

TEST(VarianceSummary, PriorModelHasSignalVariance) {
  const Box box;
  const SvgpModel m = constant_model(-25.0, box);
  const PredictiveCache cache(m);
  const VarianceSummary v = variance_summary(cache, box, 0.25, 40);
  EXPECT_NEAR(v.mean_var_train, 2.0, 1e-9);
  EXPECT_NEAR(v.mean_var_heldout, 2.0, 1e-9);
  EXPECT_NEAR(v.trace_kss, static_cast<double>(m.num_inducing()) * 2.0, 1e-12);
}

TEST(Report, ContainsAllFields) {
  EvalReport r;
  r.errors.rmse_train = 0.5;
  r.steps = 12;
  std::string text = format_report(r);
  for (const char* key : {"rmse_train", "rmse_heldout", "rmse_all", "rmse_heldout_subtracted", "trace_kss",
                          "mean_var_train", "mean_var_heldout", "steps"}) {
    EXPECT_NE(text.find(std::string("\"") + key + "\""), std::string::npos) << key;
  }
  EXPECT_EQ(text.find("wall_time_s"), std::string::npos);
  r.wall_time_s = 1.5;
  EXPECT_NE(format_report(r).find("wall_time_s"), std::string::npos);
}
