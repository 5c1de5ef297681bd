#include "svgpmap/optim.hpp"

#include "svgpmap/rng.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace svgpmap {

TrainingMode parse_training_mode(const std::string& name) {
  if (name == "di" || name == "DI") return TrainingMode::DI;
  if (name == "ui" || name == "UI") return TrainingMode::UI;
  throw Error(ErrorCode::InvalidArgument, "mode must be 'di' or 'ui', got '" + name + "'");
}

std::string_view to_string(TrainingMode mode) { return mode == TrainingMode::DI ? "di" : "ui"; }

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "Adam betas must lie in (0, 1)");
  }
  if (minibatch_size < 1) throw Error(ErrorCode::InvalidArgument, "minibatch_size must be >= 1");
  if (ema_window < 2) throw Error(ErrorCode::InvalidArgument, "ema_window must be >= 2");
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

Eigen::VectorXd Adam::step(const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  return (lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_)).matrix();
}

std::vector<double> ema_series(std::span<const double> series, int window) {
  std::vector<double> out;
  out.reserve(series.size());
  const double alpha = 2.0 / (window + 1.0);
  for (std::size_t t = 0; t < series.size(); ++t) {
    out.push_back(t == 0 ? series[0] : (1.0 - alpha) * out.back() + alpha * series[t]);
  }
  return out;
}

namespace {

bool ema_converged(const std::vector<double>& ema, int window, double rel_tol) {
  const auto w = static_cast<std::size_t>(window);
  if (ema.size() <= w) return false;
  const double now = ema.back();
  const double then = ema[ema.size() - 1 - w];
  return std::abs(now - then) / (std::abs(then) + 1e-12) < rel_tol;
}

}  // namespace

bool ema_stop(std::span<const double> series, int window, double rel_tol) {
  if (window < 2) throw Error(ErrorCode::InvalidArgument, "ema window must be >= 2");
  return ema_converged(ema_series(series, window), window, rel_tol);
}

TrainResult train(SvgpModel model, std::span<const UncertainInput> dataset, const OptimConfig& config,
                  TrainingMode mode) {
  config.validate();
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "training dataset is empty");
  model.validate();
  model.n_total = dataset.size();

  const std::size_t m = std::min(config.minibatch_size, dataset.size());
  std::mt19937_64 select_rng(derive_seed(config.seed, Stream::MinibatchSelect));
  std::mt19937_64 noise_rng(derive_seed(config.seed, Stream::MinibatchNoise));

  const ParameterLayout layout = parameter_layout(model.num_inducing());
  Eigen::VectorXd theta = pack_parameters(model);
  Adam adam(theta.size(), config.learning_rate, config.beta1, config.beta2, config.eps);

  TrainingTrace trace;
  const double alpha = 2.0 / (config.ema_window + 1.0);
  const auto start = std::chrono::steady_clock::now();
  for (int step = 0; step < config.max_steps; ++step) {
    const Minibatch batch = mode == TrainingMode::UI
                                ? sample_minibatch(dataset, m, select_rng, noise_rng, config.samples_per_input)
                                : select_minibatch(dataset, m, select_rng);
    ElboResult r;
    try {
      r = elbo(model, batch.x, batch.y, true);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::JitterExhausted) throw;
      throw DivergedTraining(std::string("training diverged: ") + e.what(), trace);
    }
    Eigen::VectorXd grad = pack_gradient(r.grad);
    if (!std::isfinite(r.value) || !grad.allFinite()) {
      throw DivergedTraining("non-finite ELBO at step " + std::to_string(step), trace);
    }
    if (!config.train_hyperparameters) grad.head(3).setZero();
    if (!config.train_inducing) grad.segment(layout.z_begin, 2 * model.num_inducing()).setZero();

    theta += adam.step(grad);
    unpack_parameters(theta, model);

    trace.elbo.push_back(r.value);
    trace.ema.push_back(trace.ema.empty() ? r.value : (1.0 - alpha) * trace.ema.back() + alpha * r.value);
    trace.wall_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    trace.steps = trace.elbo.size();
    if (ema_converged(trace.ema, config.ema_window, config.ema_rel_tol)) {
      trace.converged = true;
      break;
    }
  }
  trace.wall_time_s = trace.wall_ms.empty() ? 0.0 : trace.wall_ms.back() / 1000.0;
  return {std::move(model), std::move(trace)};
}

void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write trace file " + path.string());
  out << "step,elbo,ema,wall_ms\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.elbo.size(); ++i) {
    out << i + 1 << ',' << trace.elbo[i] << ',' << trace.ema[i] << ',' << std::setprecision(6)
        << trace.wall_ms[i] << std::setprecision(17) << '\n';
  }
}

}  // namespace svgpmap
