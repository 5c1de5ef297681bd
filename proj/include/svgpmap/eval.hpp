#pragma once

#include "svgpmap/svgp.hpp"
#include "svgpmap/terrain.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace svgpmap {

/// Cell centers of an n x n grid over `box`, row index j * n + i for x index
/// i and y index j.
Points2 grid_centers(const Box& box, int n);

struct GridMasks {
  std::vector<bool> train;    // cells outside the held-out rectangle
  std::vector<bool> heldout;  // cells inside it
};

GridMasks grid_masks(const Box& box, double heldout_fraction, int n);

struct ErrorGrid {
  Box box;
  int n = 0;
  Eigen::VectorXd predicted;
  Eigen::VectorXd reference;
  Eigen::VectorXd error;     // |predicted - reference|
  std::vector<bool> mask;    // cells counted in aggregates

  std::size_t cell_count() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  /// Root mean square of `error` over masked cells; throws EmptyRegion.
  double rmse() const;
};

/// Posterior mean on the grid against the analytic terrain.
ErrorGrid consistency_error(const PredictiveCache& cache, const Terrain& terrain, const std::vector<bool>& region,
                            int n);

/// Posterior mean against the per-cell average of a reference cloud. Cells
/// without reference points are excluded.
ErrorGrid consistency_error(const PredictiveCache& cache, const Eigen::MatrixX3d& cloud, const Box& box,
                            const std::vector<bool>& region, int n);

struct PredictionErrors {
  double rmse_train = 0.0;
  double rmse_heldout = 0.0;
  double rmse_all = 0.0;
  double rmse_heldout_subtracted = 0.0;  // rmse_all - rmse_train
};

PredictionErrors prediction_error(const PredictiveCache& cache, const Terrain& terrain, double heldout_fraction,
                                  int n);

struct VarianceSummary {
  double trace_kss = 0.0;
  double mean_var_train = 0.0;
  double mean_var_heldout = 0.0;
};

/// Tr(K_ss) at the inducing locations and the mean predictive variance of
/// each region on the n x n grid.
VarianceSummary variance_summary(const PredictiveCache& cache, const Box& box, double heldout_fraction, int n);

struct EvalReport {
  PredictionErrors errors;
  VarianceSummary variance;
  std::size_t steps = 0;
  double wall_time_s = -1.0;  // omitted from the text when negative
};

EvalReport evaluate(const PredictiveCache& cache, const Terrain& terrain, double heldout_fraction, int n);

/// JSON-style text report.
std::string format_report(const EvalReport& report);
void write_report(const std::filesystem::path& path, const EvalReport& report);

/// CSV with columns cell_x, cell_y, error, mask.
void write_error_grid_csv(const std::filesystem::path& path, const ErrorGrid& grid);

}  // namespace svgpmap
