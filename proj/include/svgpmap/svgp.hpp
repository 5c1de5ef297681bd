#pragma once

#include "svgpmap/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace svgpmap {

struct InducingSet {
  Points2 z;
};

/// q(u) = N(mean, chol_cov chol_cov^T).
struct VariationalDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol_cov;
};

struct SvgpModel {
  KernelParams kernel;
  InducingSet inducing;
  VariationalDistribution variational;
  double log_noise_variance = std::log(1e-2);
  // Constant prior mean added to every prediction. Not trained.
  double prior_mean = 0.0;
  std::size_t n_total = 0;

  Eigen::Index num_inducing() const { return inducing.z.rows(); }
  double noise_variance() const { return std::exp(log_noise_variance); }
  void validate() const;
};

/// Training point with Gaussian location uncertainty and a scalar depth target.
struct UncertainInput {
  Eigen::Vector2d mean_xy = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov_xy = Eigen::Matrix2d::Zero();
  double depth = 0.0;
};

using Dataset = std::vector<UncertainInput>;

struct Minibatch {
  Points2 x;
  Eigen::VectorXd y;
};

/// Cholesky factor of K_ss with the jitter that made it succeed.
struct InducingFactor {
  Eigen::MatrixXd kss;  // including jitter
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;  // absolute value added to the diagonal
};

/// Factor K_ss. Tries the bare matrix first, then 1e-6 s2, escalating x10
/// up to 1e-2 s2. Throws JitterExhausted past that.
InducingFactor factor_inducing(const Points2& z, const KernelParams& kernel);

/// Gradient of the ELBO with the same shapes as the model parameters. The
/// diagonal of `chol_cov` is w.r.t. the log of the diagonal entries.
struct SvgpGradient {
  double log_lengthscale = 0.0;
  double log_signal_variance = 0.0;
  double log_noise_variance = 0.0;
  Points2 z;
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol_cov;
};

struct ElboResult {
  double value = 0.0;
  double data_term = 0.0;
  double kl = 0.0;
  SvgpGradient grad;
};

/// (N/m) sum_i E_q[log N(y_i | f(x_i), s_n^2)] - KL[q(u) || p(u)].
ElboResult elbo(const SvgpModel& model, const Points2& x, const Eigen::VectorXd& y,
                bool with_gradient = true);

double kl_divergence(const SvgpModel& model);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Precomputed per-model quantities for the predictive posterior.
class PredictiveCache {
 public:
  explicit PredictiveCache(const SvgpModel& model);

  /// Mean and variance at a single query. Identical bits regardless of which
  /// batch the query came from.
  std::pair<double, double> query(const Eigen::Vector2d& x) const;

  const SvgpModel& model() const { return model_; }

 private:
  SvgpModel model_;
  Eigen::VectorXd alpha_;      // K_ss^-1 m
  Eigen::MatrixXd quad_form_;  // K_ss^-1 S K_ss^-1 - K_ss^-1
};

/// Predictive mean and marginal variance, parallel over query points.
Prediction predict(const PredictiveCache& cache, const Points2& x_star);
Prediction predict(const SvgpModel& model, const Points2& x_star);

/// Serial reference computed directly from the matrix form via solves.
Prediction predict_reference(const SvgpModel& model, const Points2& x_star);

/// Picks m distinct inputs uniformly with `select_rng` and draws
/// `samples_per_input` locations from each with `noise_rng`.
Minibatch sample_minibatch(std::span<const UncertainInput> dataset, std::size_t m,
                           std::mt19937_64& select_rng, std::mt19937_64& noise_rng,
                           int samples_per_input = 1);
Minibatch sample_minibatch(std::span<const UncertainInput> dataset, std::size_t m,
                           std::mt19937_64& rng);

/// Same selection as `sample_minibatch` but returns the input means.
Minibatch select_minibatch(std::span<const UncertainInput> dataset, std::size_t m,
                           std::mt19937_64& select_rng);

enum class InducingInit { Subset, Grid, KMeans };

InducingInit parse_inducing_init(const std::string& name);

/// Inducing locations per `strategy`, q(u) at the prior and scale-aware
/// hyperparameters: lengthscale = bbox diagonal / 10, s2 = var(depth),
/// s_n^2 = 1% of var(depth), prior mean = mean depth.
SvgpModel init_model(std::span<const UncertainInput> dataset, std::size_t num_inducing,
                     InducingInit strategy, std::uint64_t seed = 0);

/// Lloyd iterations seeded by k-means++.
Points2 kmeans_centers(const Points2& points, std::size_t k, std::mt19937_64& rng,
                       int max_iterations = 50);

/// Flattened unconstrained parameter vector:
/// [log l, log s2, log s_n^2, z (row-major), mean, lower(chol) with log diagonal].
Eigen::VectorXd pack_parameters(const SvgpModel& model);
void unpack_parameters(const Eigen::VectorXd& theta, SvgpModel& model);
Eigen::VectorXd pack_gradient(const SvgpGradient& grad);

struct ParameterLayout {
  Eigen::Index hyper_begin = 0;
  Eigen::Index z_begin = 3;
  Eigen::Index mean_begin = 0;
  Eigen::Index chol_begin = 0;
  Eigen::Index size = 0;
};
ParameterLayout parameter_layout(Eigen::Index num_inducing);

void save_model(const std::filesystem::path& path, const SvgpModel& model);
SvgpModel load_model(const std::filesystem::path& path);

}  // namespace svgpmap
