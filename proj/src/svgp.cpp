#include "svgpmap/svgp.hpp"

#include "binary_io.hpp"

#include "svgpmap/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace svgpmap {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

std::vector<std::size_t> choose_indices(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (m >= n) return all;
  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), m, rng);
  return picked;
}

// Lower factor of a 2x2 PSD matrix; zero pivots give zero columns.
Eigen::Matrix2d chol2(const Eigen::Matrix2d& c) {
  const double a = c(0, 0);
  const double b = 0.5 * (c(0, 1) + c(1, 0));
  const double d = c(1, 1);
  const double scale = std::max({1.0, std::abs(a), std::abs(d)});
  const double tol = 1e-12 * scale;
  if (std::abs(c(0, 1) - c(1, 0)) > tol || a < -tol || d < -tol || a * d - b * b < -tol * scale) {
    throw Error(ErrorCode::InvalidCovariance, "input covariance is not symmetric PSD");
  }
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  if (a > tol) {
    l(0, 0) = std::sqrt(a);
    l(1, 0) = b / l(0, 0);
    l(1, 1) = std::sqrt(std::max(0.0, d - l(1, 0) * l(1, 0)));
  } else {
    l(1, 1) = std::sqrt(std::max(0.0, d));
  }
  return l;
}

}  // namespace

void SvgpModel::validate() const {
  const Eigen::Index s = num_inducing();
  if (s < 1 || !inducing.z.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "model needs at least one finite inducing point");
  }
  if (variational.mean.size() != s || variational.chol_cov.rows() != s || variational.chol_cov.cols() != s) {
    throw Error(ErrorCode::InvalidArgument, "variational distribution does not match inducing set");
  }
  if ((variational.chol_cov.diagonal().array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "variational Cholesky diagonal must be positive");
  }
}

InducingFactor factor_inducing(const Points2& z, const KernelParams& kernel) {
  InducingFactor f;
  const Eigen::MatrixXd k = gram(z, z, kernel);
  const double s2 = kernel.signal_variance();
  for (double rel : {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    f.jitter = rel * s2;
    f.kss = k;
    f.kss.diagonal().array() += f.jitter;
    f.llt.compute(f.kss);
    if (f.llt.info() != Eigen::Success) continue;
    const double pivot = f.llt.matrixLLT().diagonal().minCoeff();
    if (pivot * pivot > 1e-12 * s2) return f;
  }
  throw Error(ErrorCode::JitterExhausted, "K_ss Cholesky failed with jitter up to 1e-2 * signal variance");
}

double kl_divergence(const SvgpModel& model) {
  const InducingFactor f = factor_inducing(model.inducing.z, model.kernel);
  const auto lk = f.llt.matrixL();
  const Eigen::MatrixXd lq = model.variational.chol_cov.triangularView<Eigen::Lower>();
  const Eigen::VectorXd& m = model.variational.mean;
  const double trace = lk.solve(lq).squaredNorm();
  const double maha = lk.solve(m).squaredNorm();
  const double logdet_k = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  const double logdet_s = 2.0 * lq.diagonal().array().abs().log().sum();
  return 0.5 * (trace + maha - static_cast<double>(m.size()) + logdet_k - logdet_s);
}

ElboResult elbo(const SvgpModel& model, const Points2& x, const Eigen::VectorXd& y, bool with_gradient) {
  const Eigen::Index s = model.num_inducing();
  const Eigen::Index b = x.rows();
  if (b == 0 || y.size() != b) {
    throw Error(ErrorCode::InvalidArgument, "elbo needs a nonempty batch with matching targets");
  }
  const Points2& z = model.inducing.z;
  const InducingFactor f = factor_inducing(z, model.kernel);
  const auto lk = f.llt.matrixL();
  const double s2 = model.kernel.signal_variance();
  const double sn2 = model.noise_variance();
  const double scale = static_cast<double>(model.n_total > 0 ? model.n_total : static_cast<std::size_t>(b)) /
                       static_cast<double>(b);

  const Eigen::MatrixXd kzx = gram(z, x, model.kernel);
  const Eigen::MatrixXd a = f.llt.solve(kzx);
  const Eigen::MatrixXd lq = model.variational.chol_cov.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd t = lq.transpose().triangularView<Eigen::Upper>() * a;
  const Eigen::VectorXd& m = model.variational.mean;

  const Eigen::VectorXd mu = (a.transpose() * m).array() + model.prior_mean;
  const Eigen::VectorXd var = (s2 - a.cwiseProduct(kzx).colwise().sum().array() +
                               t.cwiseAbs2().colwise().sum().array())
                                  .transpose();
  const Eigen::VectorXd resid = y - mu;
  const Eigen::ArrayXd sq = resid.array().square() + var.array();

  ElboResult out;
  out.data_term = scale * (-0.5 * (kLog2Pi + model.log_noise_variance) * static_cast<double>(b) -
                           sq.sum() / (2.0 * sn2));

  const Eigen::VectorXd alpha = f.llt.solve(m);
  const double trace = lk.solve(lq).squaredNorm();
  const double logdet_k = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  const double logdet_s = 2.0 * lq.diagonal().array().abs().log().sum();
  out.kl = 0.5 * (trace + m.dot(alpha) - static_cast<double>(s) + logdet_k - logdet_s);
  out.value = out.data_term - out.kl;
  if (!with_gradient) return out;

  // Reverse-mode through mu = A^T m, var = s2 - colsum(A o Kzx) + colsum(A o S A),
  // A = K_ss^-1 Kzx, and the Gaussian KL.
  const Eigen::VectorXd g_mu = scale * resid / sn2;
  const double g_var = -scale / (2.0 * sn2);

  SvgpGradient& g = out.grad;
  g.log_noise_variance = scale * (-0.5 * static_cast<double>(b) + sq.sum() / (2.0 * sn2));

  const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(s, s));
  const Eigen::MatrixXd sq_cov = lq * lq.transpose();
  const Eigen::MatrixXd p = kinv * sq_cov;
  const Eigen::VectorXd a_gmu = a * g_mu;
  Eigen::MatrixXd aat = Eigen::MatrixXd::Zero(s, s);
  aat.selfadjointView<Eigen::Lower>().rankUpdate(a);
  aat = aat.selfadjointView<Eigen::Lower>();

  Eigen::MatrixXd d_kzx = alpha * g_mu.transpose();
  d_kzx.noalias() += (2.0 * g_var) * (p * a);
  d_kzx -= (2.0 * g_var) * a;

  Eigen::MatrixXd d_kss = -alpha * a_gmu.transpose() + g_var * aat - (2.0 * g_var) * (p * aat);
  d_kss += 0.5 * (p * kinv + alpha * alpha.transpose() - kinv);

  const Eigen::MatrixXd d_sq_cov = g_var * aat - 0.5 * kinv;
  g.mean = a_gmu - alpha;
  g.chol_cov = (2.0 * d_sq_cov * lq).triangularView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < s; ++i) {
    g.chol_cov(i, i) = g.chol_cov(i, i) * lq(i, i) + 1.0;
  }

  g.log_signal_variance = d_kss.cwiseProduct(f.kss).sum() + d_kzx.cwiseProduct(kzx).sum() +
                          static_cast<double>(b) * g_var * s2;

  // The jitter on the diagonal has zero distance, so it never enters the
  // lengthscale or location terms.
  const Eigen::MatrixXd d_kss_sym = d_kss + d_kss.transpose();
  const GramContraction c_zx = contract_gram_grad(z, x, kzx, d_kzx, model.kernel);
  const GramContraction c_ss = contract_gram_grad(z, z, f.kss, d_kss_sym, model.kernel);
  g.log_lengthscale = c_zx.d_log_lengthscale + 0.5 * c_ss.d_log_lengthscale;
  g.z = c_zx.input + c_ss.input;
  return out;
}

PredictiveCache::PredictiveCache(const SvgpModel& model) : model_(model) {
  const InducingFactor f = factor_inducing(model.inducing.z, model.kernel);
  const Eigen::Index s = model.num_inducing();
  const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(s, s));
  const Eigen::MatrixXd lq = model.variational.chol_cov.triangularView<Eigen::Lower>();
  alpha_ = f.llt.solve(model.variational.mean);
  const Eigen::MatrixXd kinv_l = kinv * lq;
  quad_form_ = kinv_l * kinv_l.transpose() - kinv;
  quad_form_ = (0.5 * (quad_form_ + quad_form_.transpose())).eval();
}

std::pair<double, double> PredictiveCache::query(const Eigen::Vector2d& x) const {
  const Points2& z = model_.inducing.z;
  const double inv_ell = 1.0 / model_.kernel.lengthscale();
  const double s2 = model_.kernel.signal_variance();
  Eigen::VectorXd k(z.rows());
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    const double dx = z(j, 0) - x.x();
    const double dy = z(j, 1) - x.y();
    k(j) = s2 * std::exp(-std::sqrt(dx * dx + dy * dy) * inv_ell);
  }
  const double mean = k.dot(alpha_) + model_.prior_mean;
  const Eigen::VectorXd qk = quad_form_ * k;
  const double var = s2 + k.dot(qk);
  return {mean, std::max(0.0, var)};
}

Prediction predict(const PredictiveCache& cache, const Points2& x_star) {
  Prediction out;
  out.mean.resize(x_star.rows());
  out.variance.resize(x_star.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < x_star.rows(); ++i) {
    const auto [mu, var] = cache.query(x_star.row(i).transpose());
    out.mean(i) = mu;
    out.variance(i) = var;
  }
  return out;
}

Prediction predict(const SvgpModel& model, const Points2& x_star) {
  return predict(PredictiveCache(model), x_star);
}

Prediction predict_reference(const SvgpModel& model, const Points2& x_star) {
  const InducingFactor f = factor_inducing(model.inducing.z, model.kernel);
  const Eigen::MatrixXd k_sz = gram_serial(x_star, model.inducing.z, model.kernel);
  const Eigen::MatrixXd a = f.llt.solve(k_sz.transpose()).transpose();  // K_*s K_ss^-1
  const Eigen::MatrixXd lq = model.variational.chol_cov.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd al = a * lq;
  Prediction out;
  out.mean = (a * model.variational.mean).array() + model.prior_mean;
  out.variance = (model.kernel.signal_variance() - a.cwiseProduct(k_sz).rowwise().sum().array() +
                  al.cwiseAbs2().rowwise().sum().array())
                     .cwiseMax(0.0);
  return out;
}

Minibatch select_minibatch(std::span<const UncertainInput> dataset, std::size_t m,
                           std::mt19937_64& select_rng) {
  if (m == 0 || m > dataset.size()) {
    throw Error(ErrorCode::InvalidArgument, "minibatch size must be in [1, dataset size]");
  }
  const auto idx = choose_indices(dataset.size(), m, select_rng);
  Minibatch batch;
  batch.x.resize(static_cast<Eigen::Index>(m), 2);
  batch.y.resize(static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& ui = dataset[idx[r]];
    batch.x.row(static_cast<Eigen::Index>(r)) = ui.mean_xy.transpose();
    batch.y(static_cast<Eigen::Index>(r)) = ui.depth;
  }
  return batch;
}

Minibatch sample_minibatch(std::span<const UncertainInput> dataset, std::size_t m,
                           std::mt19937_64& select_rng, std::mt19937_64& noise_rng,
                           int samples_per_input) {
  if (m == 0 || m > dataset.size()) {
    throw Error(ErrorCode::InvalidArgument, "minibatch size must be in [1, dataset size]");
  }
  if (samples_per_input < 1) {
    throw Error(ErrorCode::InvalidArgument, "samples_per_input must be >= 1");
  }
  const auto idx = choose_indices(dataset.size(), m, select_rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = static_cast<Eigen::Index>(m) * samples_per_input;
  Minibatch batch;
  batch.x.resize(rows, 2);
  batch.y.resize(rows);
  Eigen::Index r = 0;
  for (const std::size_t i : idx) {
    const auto& ui = dataset[i];
    const Eigen::Matrix2d l = chol2(ui.cov_xy);
    for (int k = 0; k < samples_per_input; ++k, ++r) {
      const double z0 = normal(noise_rng);
      const double z1 = normal(noise_rng);
      batch.x(r, 0) = ui.mean_xy.x() + l(0, 0) * z0;
      batch.x(r, 1) = ui.mean_xy.y() + (l(1, 0) * z0 + l(1, 1) * z1);
      batch.y(r) = ui.depth;
    }
  }
  return batch;
}

Minibatch sample_minibatch(std::span<const UncertainInput> dataset, std::size_t m, std::mt19937_64& rng) {
  return sample_minibatch(dataset, m, rng, rng, 1);
}

InducingInit parse_inducing_init(const std::string& name) {
  if (name == "subset") return InducingInit::Subset;
  if (name == "grid") return InducingInit::Grid;
  if (name == "kmeans" || name == "kmeans-like") return InducingInit::KMeans;
  throw Error(ErrorCode::InvalidArgument, "unknown inducing init strategy '" + name + "'");
}

Points2 kmeans_centers(const Points2& points, std::size_t k, std::mt19937_64& rng, int max_iterations) {
  const Eigen::Index n = points.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  if (kk < 1 || kk > n) throw Error(ErrorCode::InvalidArgument, "k must be in [1, number of points]");

  // k-means++ seeding.
  Points2 centers(kk, 2);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = points.row(first(rng));
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < kk; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target <= 0.0) break;
      }
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Points2 sums = Points2::Zero(kk, 2);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(kk);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      counts(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }
  }
  return centers;
}

SvgpModel init_model(std::span<const UncertainInput> dataset, std::size_t num_inducing,
                     InducingInit strategy, std::uint64_t seed) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot initialize a model from an empty dataset");
  if (num_inducing == 0 || num_inducing > dataset.size()) {
    throw Error(ErrorCode::InvalidArgument, "number of inducing points must be in [1, N]");
  }
  const auto n = static_cast<Eigen::Index>(dataset.size());
  Points2 means(n, 2);
  Eigen::VectorXd depths(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    means.row(i) = dataset[static_cast<std::size_t>(i)].mean_xy.transpose();
    depths(i) = dataset[static_cast<std::size_t>(i)].depth;
  }
  const Eigen::RowVector2d lo = means.colwise().minCoeff();
  const Eigen::RowVector2d hi = means.colwise().maxCoeff();

  std::mt19937_64 rng(seed);
  SvgpModel model;
  const auto s = static_cast<Eigen::Index>(num_inducing);
  switch (strategy) {
    case InducingInit::Subset: {
      const auto idx = choose_indices(dataset.size(), num_inducing, rng);
      model.inducing.z.resize(s, 2);
      for (Eigen::Index r = 0; r < s; ++r) model.inducing.z.row(r) = means.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]));
      break;
    }
    case InducingInit::Grid: {
      const double w = std::max(hi.x() - lo.x(), 1e-9);
      const double h = std::max(hi.y() - lo.y(), 1e-9);
      const auto nx = static_cast<Eigen::Index>(std::max(1.0, std::ceil(std::sqrt(static_cast<double>(s) * w / h))));
      const Eigen::Index ny = (s + nx - 1) / nx;
      model.inducing.z.resize(s, 2);
      for (Eigen::Index r = 0; r < s; ++r) {
        const Eigen::Index ix = r % nx;
        const Eigen::Index iy = r / nx;
        model.inducing.z(r, 0) = lo.x() + (static_cast<double>(ix) + 0.5) / static_cast<double>(nx) * (hi.x() - lo.x());
        model.inducing.z(r, 1) = lo.y() + (static_cast<double>(iy) + 0.5) / static_cast<double>(ny) * (hi.y() - lo.y());
      }
      break;
    }
    case InducingInit::KMeans:
      model.inducing.z = kmeans_centers(means, num_inducing, rng);
      break;
  }

  const double mean_depth = depths.mean();
  const double var_depth = (depths.array() - mean_depth).square().mean();
  const double diag = (hi - lo).norm();
  const double signal = var_depth > 1e-12 ? var_depth : 1.0;
  model.kernel = KernelParams::from_values(diag > 0.0 ? diag / 10.0 : 1.0, signal);
  model.log_noise_variance = std::log(0.01 * signal);
  model.prior_mean = mean_depth;
  model.n_total = dataset.size();

  const InducingFactor f = factor_inducing(model.inducing.z, model.kernel);
  model.variational.mean = Eigen::VectorXd::Zero(s);
  model.variational.chol_cov = f.llt.matrixL();
  return model;
}

ParameterLayout parameter_layout(Eigen::Index s) {
  ParameterLayout l;
  l.hyper_begin = 0;
  l.z_begin = 3;
  l.mean_begin = l.z_begin + 2 * s;
  l.chol_begin = l.mean_begin + s;
  l.size = l.chol_begin + s * (s + 1) / 2;
  return l;
}

Eigen::VectorXd pack_parameters(const SvgpModel& model) {
  const Eigen::Index s = model.num_inducing();
  const ParameterLayout layout = parameter_layout(s);
  Eigen::VectorXd theta(layout.size);
  theta(0) = model.kernel.log_lengthscale;
  theta(1) = model.kernel.log_signal_variance;
  theta(2) = model.log_noise_variance;
  for (Eigen::Index r = 0; r < s; ++r) {
    theta(layout.z_begin + 2 * r) = model.inducing.z(r, 0);
    theta(layout.z_begin + 2 * r + 1) = model.inducing.z(r, 1);
  }
  theta.segment(layout.mean_begin, s) = model.variational.mean;
  Eigen::Index k = layout.chol_begin;
  for (Eigen::Index j = 0; j < s; ++j) {
    theta(k++) = std::log(model.variational.chol_cov(j, j));
    for (Eigen::Index i = j + 1; i < s; ++i) theta(k++) = model.variational.chol_cov(i, j);
  }
  return theta;
}

void unpack_parameters(const Eigen::VectorXd& theta, SvgpModel& model) {
  const Eigen::Index s = model.num_inducing();
  const ParameterLayout layout = parameter_layout(s);
  if (theta.size() != layout.size) throw Error(ErrorCode::InvalidArgument, "parameter vector size mismatch");
  model.kernel.log_lengthscale = theta(0);
  model.kernel.log_signal_variance = theta(1);
  model.log_noise_variance = theta(2);
  for (Eigen::Index r = 0; r < s; ++r) {
    model.inducing.z(r, 0) = theta(layout.z_begin + 2 * r);
    model.inducing.z(r, 1) = theta(layout.z_begin + 2 * r + 1);
  }
  model.variational.mean = theta.segment(layout.mean_begin, s);
  model.variational.chol_cov.setZero(s, s);
  Eigen::Index k = layout.chol_begin;
  for (Eigen::Index j = 0; j < s; ++j) {
    model.variational.chol_cov(j, j) = std::exp(theta(k++));
    for (Eigen::Index i = j + 1; i < s; ++i) model.variational.chol_cov(i, j) = theta(k++);
  }
}

Eigen::VectorXd pack_gradient(const SvgpGradient& grad) {
  const Eigen::Index s = grad.mean.size();
  const ParameterLayout layout = parameter_layout(s);
  Eigen::VectorXd g(layout.size);
  g(0) = grad.log_lengthscale;
  g(1) = grad.log_signal_variance;
  g(2) = grad.log_noise_variance;
  for (Eigen::Index r = 0; r < s; ++r) {
    g(layout.z_begin + 2 * r) = grad.z(r, 0);
    g(layout.z_begin + 2 * r + 1) = grad.z(r, 1);
  }
  g.segment(layout.mean_begin, s) = grad.mean;
  Eigen::Index k = layout.chol_begin;
  for (Eigen::Index j = 0; j < s; ++j) {
    for (Eigen::Index i = j; i < s; ++i) g(k++) = grad.chol_cov(i, j);
  }
  return g;
}

// On-disk layout (little-endian):
//   char[8]  magic "SVGP1\0\0\0"
//   u64      S, input_dim (= 2), flags (bit 0: prior-mean/n_total block present)
//   f64      log_lengthscale, log_signal_variance, log_noise_variance
//   f64      prior_mean; u64 n_total                      (flags bit 0)
//   f64[S*2] Z row-major; f64[S] mean; f64[S*S] chol row-major
namespace {

constexpr std::array<char, 8> kModelMagic = {'S', 'V', 'G', 'P', '1', '\0', '\0', '\0'};
constexpr std::uint64_t kFlagPriorMean = 1;

}  // namespace

using detail::read_pod;
using detail::write_pod;

void save_model(const std::filesystem::path& path, const SvgpModel& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write model file " + path.string());
  const auto s = static_cast<std::uint64_t>(model.num_inducing());
  out.write(kModelMagic.data(), kModelMagic.size());
  write_pod(out, s);
  write_pod(out, std::uint64_t{2});
  write_pod(out, kFlagPriorMean);
  write_pod(out, model.kernel.log_lengthscale);
  write_pod(out, model.kernel.log_signal_variance);
  write_pod(out, model.log_noise_variance);
  write_pod(out, model.prior_mean);
  write_pod(out, static_cast<std::uint64_t>(model.n_total));
  for (Eigen::Index r = 0; r < model.num_inducing(); ++r) {
    write_pod(out, model.inducing.z(r, 0));
    write_pod(out, model.inducing.z(r, 1));
  }
  for (Eigen::Index r = 0; r < model.num_inducing(); ++r) write_pod(out, model.variational.mean(r));
  for (Eigen::Index r = 0; r < model.num_inducing(); ++r) {
    for (Eigen::Index c = 0; c < model.num_inducing(); ++c) write_pod(out, model.variational.chol_cov(r, c));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing model file " + path.string());
}

SvgpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open model file " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kModelMagic) throw Error(ErrorCode::Io, "not an SVGP1 model file: " + path.string());
  const auto s = read_pod<std::uint64_t>(in, path);
  const auto dim = read_pod<std::uint64_t>(in, path);
  const auto flags = read_pod<std::uint64_t>(in, path);
  if (dim != 2 || s == 0 || s > (1u << 20)) throw Error(ErrorCode::Io, "unsupported model header in " + path.string());
  SvgpModel model;
  model.kernel.log_lengthscale = read_pod<double>(in, path);
  model.kernel.log_signal_variance = read_pod<double>(in, path);
  model.log_noise_variance = read_pod<double>(in, path);
  if (flags & kFlagPriorMean) {
    model.prior_mean = read_pod<double>(in, path);
    model.n_total = static_cast<std::size_t>(read_pod<std::uint64_t>(in, path));
  }
  const auto n = static_cast<Eigen::Index>(s);
  model.inducing.z.resize(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    model.inducing.z(r, 0) = read_pod<double>(in, path);
    model.inducing.z(r, 1) = read_pod<double>(in, path);
  }
  model.variational.mean.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) model.variational.mean(r) = read_pod<double>(in, path);
  model.variational.chol_cov.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) model.variational.chol_cov(r, c) = read_pod<double>(in, path);
  }
  model.validate();
  return model;
}

}  // namespace svgpmap
