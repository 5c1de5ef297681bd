#include "svgpmap/eval.hpp"

#include "svgpmap/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace svgpmap {

Points2 grid_centers(const Box& box, int n) {
  box.validate();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be >= 1");
  const double dx = box.width() / n;
  const double dy = box.height() / n;
  Points2 out(static_cast<Eigen::Index>(n) * n, 2);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      out.row(static_cast<Eigen::Index>(j) * n + i) << box.x_min + (i + 0.5) * dx, box.y_min + (j + 0.5) * dy;
    }
  }
  return out;
}

GridMasks grid_masks(const Box& box, double heldout_fraction, int n) {
  const Points2 c = grid_centers(box, n);
  const Box inner = centered_subbox(box, heldout_fraction);
  GridMasks m;
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    const bool held = heldout_fraction > 0.0 && inner.contains(c(k, 0), c(k, 1));
    m.heldout.push_back(held);
    m.train.push_back(!held);
  }
  return m;
}

double ErrorGrid::rmse() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask[k]) continue;
    sum += error(static_cast<Eigen::Index>(k)) * error(static_cast<Eigen::Index>(k));
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyRegion, "no cells in the evaluation region");
  return std::sqrt(sum / static_cast<double>(count));
}

namespace {

ErrorGrid predict_grid(const PredictiveCache& cache, const Box& box, const std::vector<bool>& region, int n) {
  ErrorGrid g;
  g.box = box;
  g.n = n;
  if (region.size() != g.cell_count()) throw Error(ErrorCode::InvalidArgument, "region mask does not match grid");
  g.predicted = predict(cache, grid_centers(box, n)).mean;
  g.mask = region;
  return g;
}

}  // namespace

ErrorGrid consistency_error(const PredictiveCache& cache, const Terrain& terrain, const std::vector<bool>& region,
                            int n) {
  ErrorGrid g = predict_grid(cache, terrain.box(), region, n);
  const Points2 c = grid_centers(terrain.box(), n);
  g.reference.resize(c.rows());
  for (Eigen::Index k = 0; k < c.rows(); ++k) g.reference(k) = terrain.height(c(k, 0), c(k, 1));
  g.error = (g.predicted - g.reference).cwiseAbs();
  return g;
}

ErrorGrid consistency_error(const PredictiveCache& cache, const Eigen::MatrixX3d& cloud, const Box& box,
                            const std::vector<bool>& region, int n) {
  ErrorGrid g = predict_grid(cache, box, region, n);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.cell_count()));
  Eigen::VectorXi count = Eigen::VectorXi::Zero(sum.size());
  for (Eigen::Index r = 0; r < cloud.rows(); ++r) {
    if (!box.contains(cloud(r, 0), cloud(r, 1))) continue;
    const int i = std::min(n - 1, static_cast<int>((cloud(r, 0) - box.x_min) / box.width() * n));
    const int j = std::min(n - 1, static_cast<int>((cloud(r, 1) - box.y_min) / box.height() * n));
    sum(j * n + i) += cloud(r, 2);
    ++count(j * n + i);
  }
  g.reference = Eigen::VectorXd::Constant(sum.size(), std::nan(""));
  g.error = Eigen::VectorXd::Constant(sum.size(), std::nan(""));
  for (Eigen::Index k = 0; k < sum.size(); ++k) {
    if (count(k) == 0) {
      g.mask[static_cast<std::size_t>(k)] = false;
      continue;
    }
    g.reference(k) = sum(k) / count(k);
    g.error(k) = std::abs(g.predicted(k) - g.reference(k));
  }
  return g;
}

PredictionErrors prediction_error(const PredictiveCache& cache, const Terrain& terrain, double heldout_fraction,
                                  int n) {
  const GridMasks m = grid_masks(terrain.box(), heldout_fraction, n);
  ErrorGrid g = consistency_error(cache, terrain, m.train, n);
  PredictionErrors e;
  e.rmse_train = g.rmse();
  g.mask = m.heldout;
  e.rmse_heldout = g.rmse();
  g.mask.assign(g.cell_count(), true);
  e.rmse_all = g.rmse();
  e.rmse_heldout_subtracted = e.rmse_all - e.rmse_train;
  return e;
}

VarianceSummary variance_summary(const PredictiveCache& cache, const Box& box, double heldout_fraction, int n) {
  const SvgpModel& model = cache.model();
  VarianceSummary v;
  v.trace_kss = gram(model.inducing.z, model.inducing.z, model.kernel).trace();
  const GridMasks m = grid_masks(box, heldout_fraction, n);
  const Eigen::VectorXd var = predict(cache, grid_centers(box, n)).variance;
  double sum_train = 0.0, sum_held = 0.0;
  std::size_t n_train = 0, n_held = 0;
  for (std::size_t k = 0; k < m.train.size(); ++k) {
    const double x = var(static_cast<Eigen::Index>(k));
    if (m.train[k]) {
      sum_train += x;
      ++n_train;
    } else {
      sum_held += x;
      ++n_held;
    }
  }
  v.mean_var_train = n_train > 0 ? sum_train / static_cast<double>(n_train) : 0.0;
  v.mean_var_heldout = n_held > 0 ? sum_held / static_cast<double>(n_held) : 0.0;
  return v;
}

EvalReport evaluate(const PredictiveCache& cache, const Terrain& terrain, double heldout_fraction, int n) {
  EvalReport r;
  r.errors = prediction_error(cache, terrain, heldout_fraction, n);
  r.variance = variance_summary(cache, terrain.box(), heldout_fraction, n);
  return r;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "{\n";
  out << "  \"rmse_train\": " << report.errors.rmse_train << ",\n";
  out << "  \"rmse_heldout\": " << report.errors.rmse_heldout << ",\n";
  out << "  \"rmse_all\": " << report.errors.rmse_all << ",\n";
  out << "  \"rmse_heldout_subtracted\": " << report.errors.rmse_heldout_subtracted << ",\n";
  out << "  \"trace_kss\": " << report.variance.trace_kss << ",\n";
  out << "  \"mean_var_train\": " << report.variance.mean_var_train << ",\n";
  out << "  \"mean_var_heldout\": " << report.variance.mean_var_heldout << ",\n";
  if (report.wall_time_s >= 0.0) out << "  \"wall_time_s\": " << report.wall_time_s << ",\n";
  out << "  \"steps\": " << report.steps << "\n";
  out << "}\n";
  return out.str();
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write report " + path.string());
  out << format_report(report);
}

void write_error_grid_csv(const std::filesystem::path& path, const ErrorGrid& grid) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write error grid " + path.string());
  const Points2 c = grid_centers(grid.box, grid.n);
  out << "cell_x,cell_y,error,mask\n" << std::setprecision(12);
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    out << c(k, 0) << ',' << c(k, 1) << ',' << grid.error(k) << ',' << (grid.mask[static_cast<std::size_t>(k)] ? 1 : 0)
        << '\n';
  }
}

}  // namespace svgpmap
