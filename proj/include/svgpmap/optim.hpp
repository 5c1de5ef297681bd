#pragma once

#include "svgpmap/errors.hpp"
#include "svgpmap/svgp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace svgpmap {

enum class TrainingMode { DI, UI };

TrainingMode parse_training_mode(const std::string& name);
std::string_view to_string(TrainingMode mode);

struct OptimConfig {
  double learning_rate = 0.1;
  std::size_t minibatch_size = 4000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int ema_window = 100;
  double ema_rel_tol = 1e-4;
  int max_steps = 10000;
  std::uint64_t seed = 0;
  int samples_per_input = 1;
  bool train_inducing = true;
  bool train_hyperparameters = true;

  void validate() const;
};

struct TrainingTrace {
  std::vector<double> elbo;
  std::vector<double> ema;
  std::vector<double> wall_ms;  // cumulative
  std::size_t steps = 0;
  double wall_time_s = 0.0;
  bool converged = false;
};

class DivergedTraining : public Error {
 public:
  DivergedTraining(const std::string& what, TrainingTrace trace)
      : Error(ErrorCode::DivergedTraining, what), trace_(std::move(trace)) {}
  const TrainingTrace& trace() const { return trace_; }

 private:
  TrainingTrace trace_;
};

/// Adam ascent on a flat parameter vector.
class Adam {
 public:
  Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Returns the increment to add to the parameters for ascent along `grad`.
  Eigen::VectorXd step(const Eigen::VectorXd& grad);
  int iterations() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

/// Exponential moving average with smoothing 2 / (window + 1), seeded by the
/// first value.
std::vector<double> ema_series(std::span<const double> series, int window);

/// True iff |EMA_t - EMA_{t-window}| / (|EMA_{t-window}| + 1e-12) < rel_tol
/// at the last element t.
bool ema_stop(std::span<const double> series, int window, double rel_tol);

struct TrainResult {
  SvgpModel model;
  TrainingTrace trace;
};

/// Adam on minibatch ELBO estimates until the EMA stopping rule fires or
/// `max_steps`. UI mode draws one location per selected input per step; DI
/// mode uses the means. Both modes share the selection stream so a dataset
/// with zero covariances trains identically in either mode.
TrainResult train(SvgpModel model, std::span<const UncertainInput> dataset, const OptimConfig& config,
                  TrainingMode mode);

/// CSV with columns step, elbo, ema, wall_ms.
void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace);

}  // namespace svgpmap
