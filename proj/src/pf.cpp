#include "svgpmap/pf.hpp"

#include "svgpmap/errors.hpp"
#include "svgpmap/rng.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace svgpmap {

ParticleSet ParticleSet::uniform(std::vector<Pose6> poses) {
  if (poses.empty()) throw Error(ErrorCode::InvalidArgument, "particle set needs at least one particle");
  ParticleSet s;
  const auto j = static_cast<Eigen::Index>(poses.size());
  s.particles = std::move(poses);
  s.weights = Eigen::VectorXd::Constant(j, 1.0 / static_cast<double>(j));
  s.log_weights = s.weights.array().log();
  return s;
}

void ParticleSet::validate() const {
  const auto j = static_cast<Eigen::Index>(particles.size());
  if (j < 1 || weights.size() != j || log_weights.size() != j) {
    throw Error(ErrorCode::InvalidArgument, "particle set sizes disagree");
  }
  if (!weights.allFinite() || weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "particle weights must be nonnegative and sum to one");
  }
}

void PfConfig::validate() const {
  if (num_particles < 1) throw Error(ErrorCode::InvalidArgument, "need at least one particle");
  if (!((motion_var.array() >= 0.0).all()) || !(depth_noise_var >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise variances must be nonnegative");
  }
  if (beams_per_ping < 1) throw Error(ErrorCode::InvalidArgument, "beams_per_ping must be >= 1");
  if (!(init_position_std >= 0.0) || !(init_yaw_std >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "initial spread must be nonnegative");
  }
}

ParticleSet predict_step(const ParticleSet& set, const Control& control, double dt, const Vector6d& motion_var,
                         std::mt19937_64& rng) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  std::normal_distribution<double> n01;
  const Vector6d sd = motion_var.cwiseSqrt();
  ParticleSet out = set;
  for (Pose6& p : out.particles) {
    Control c = control;
    for (int i = 0; i < 3; ++i) {
      if (sd(i) > 0.0) c.linear(i) += sd(i) * n01(rng);
      if (sd(i + 3) > 0.0) c.angular(i) += sd(i + 3) * n01(rng);
    }
    p = integrate_control(p, c, dt);
  }
  return out;
}

std::vector<std::size_t> subsample_beams(std::size_t n, int count) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t k = std::min(n, static_cast<std::size_t>(std::max(count, 1)));
  for (std::size_t i = 0; i < k; ++i) idx.push_back(k == 1 ? n / 2 : i * (n - 1) / (k - 1));
  return idx;
}

namespace {

void normalize(ParticleSet& set) {
  const double top = set.log_weights.maxCoeff();
  if (!std::isfinite(top)) throw Error(ErrorCode::DegenerateWeights, "all particle likelihoods vanished");
  Eigen::VectorXd w = (set.log_weights.array() - top).exp();
  w /= w.sum();
  set.weights = w;
  set.log_weights = w.array().log();
}

}  // namespace

ParticleSet weight_step(const ParticleSet& set, const std::vector<Eigen::Vector3d>& beams_sensor,
                        const PredictiveCache& map, double depth_noise_var) {
  const auto j = static_cast<Eigen::Index>(set.size());
  const auto n = static_cast<Eigen::Index>(beams_sensor.size());
  ParticleSet out = set;
  if (n == 0) return out;
  Points2 query(j * n, 2);
  Eigen::VectorXd z(j * n);
  for (Eigen::Index p = 0; p < j; ++p) {
    const Pose6& pose = set.particles[static_cast<std::size_t>(p)];
    for (Eigen::Index b = 0; b < n; ++b) {
      const Eigen::Vector3d w = pose * beams_sensor[static_cast<std::size_t>(b)];
      query.row(p * n + b) << w.x(), w.y();
      z(p * n + b) = w.z();
    }
  }
  const Prediction pred = predict(map, query);
  for (Eigen::Index p = 0; p < j; ++p) {
    double ll = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const Eigen::Index k = p * n + b;
      const double var = pred.variance(k) + depth_noise_var;
      const double r = z(k) - pred.mean(k);
      ll += -0.5 * (std::log(2.0 * M_PI * var) + r * r / var);
    }
    out.log_weights(p) += std::isnan(ll) ? -std::numeric_limits<double>::infinity() : ll;
  }
  normalize(out);
  return out;
}

ParticleSet residual_resample(const ParticleSet& set, std::mt19937_64& rng) {
  set.validate();
  const std::size_t j = set.size();
  const double jd = static_cast<double>(j);
  std::vector<std::size_t> copies(j);
  Eigen::VectorXd residual(static_cast<Eigen::Index>(j));
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < j; ++i) {
    const double expected = jd * set.weights(static_cast<Eigen::Index>(i));
    copies[i] = static_cast<std::size_t>(std::floor(expected + 1e-10));
    residual(static_cast<Eigen::Index>(i)) = std::max(0.0, expected - static_cast<double>(copies[i]));
    assigned += copies[i];
  }
  // Rounding can only push the floors over J by tiny amounts; trim from the end.
  for (std::size_t i = j; assigned > j && i-- > 0;) {
    const std::size_t cut = std::min(copies[i], assigned - j);
    copies[i] -= cut;
    assigned -= cut;
  }
  const std::size_t remaining = j - assigned;
  if (remaining > 0) {
    if (!(residual.sum() > 0.0)) residual.setOnes();
    std::discrete_distribution<std::size_t> pick(residual.data(), residual.data() + residual.size());
    for (std::size_t r = 0; r < remaining; ++r) ++copies[pick(rng)];
  }
  std::vector<Pose6> poses;
  poses.reserve(j);
  for (std::size_t i = 0; i < j; ++i) poses.insert(poses.end(), copies[i], set.particles[i]);
  return ParticleSet::uniform(std::move(poses));
}

PoseEstimate estimate_pose(const ParticleSet& set) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double w = set.weights(static_cast<Eigen::Index>(i));
    mean += w * set.particles[i].translation;
    const double yaw = set.particles[i].yaw();
    s += w * std::sin(yaw);
    c += w * std::cos(yaw);
  }
  PoseEstimate e;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Eigen::Vector3d d = set.particles[i].translation - mean;
    e.position_cov += set.weights(static_cast<Eigen::Index>(i)) * d * d.transpose();
  }
  e.pose = Pose6::from_xyz_rpy(mean.x(), mean.y(), mean.z(), 0.0, 0.0, std::atan2(s, c));
  return e;
}

double LocalizationResult::rmse_pf() const {
  if (steps.empty()) throw Error(ErrorCode::EmptyRegion, "localization produced no steps");
  double sum = 0.0;
  for (const LocalizationStep& s : steps) sum += (s.estimate.pose.translation - s.gt.translation).squaredNorm();
  return std::sqrt(sum / static_cast<double>(steps.size()));
}

double LocalizationResult::rmse_dr() const {
  if (steps.empty()) throw Error(ErrorCode::EmptyRegion, "localization produced no steps");
  double sum = 0.0;
  for (const LocalizationStep& s : steps) sum += (s.dr.translation - s.gt.translation).squaredNorm();
  return std::sqrt(sum / static_cast<double>(steps.size()));
}

double LocalizationResult::final_error_pf() const {
  if (steps.empty()) throw Error(ErrorCode::EmptyRegion, "localization produced no steps");
  return (steps.back().estimate.pose.translation - steps.back().gt.translation).norm();
}

LocalizationResult run_localization(const Survey& mission, const PredictiveCache& map, const PfConfig& config) {
  config.validate();
  if (mission.pings.empty()) throw Error(ErrorCode::EmptyDataset, "mission has no pings");
  std::mt19937_64 init_rng(derive_seed(config.seed, Stream::ParticleInit));
  std::mt19937_64 motion_rng(derive_seed(config.seed, Stream::ParticleMotion));
  std::mt19937_64 resample_rng(derive_seed(config.seed, Stream::Resample));
  std::normal_distribution<double> n01;

  const TrajectoryPoint& first = mission.trajectory.at(mission.pings.front().trajectory_index);
  std::vector<Pose6> poses;
  for (int i = 0; i < config.num_particles; ++i) {
    Pose6 p = first.dr;
    p.translation.x() += config.init_position_std * n01(init_rng);
    p.translation.y() += config.init_position_std * n01(init_rng);
    p.rotation = so3_exp(Eigen::Vector3d(0, 0, config.init_yaw_std * n01(init_rng))) * p.rotation;
    poses.push_back(p);
  }
  ParticleSet set = ParticleSet::uniform(std::move(poses));

  LocalizationResult result;
  const TrajectoryPoint* prev = nullptr;
  for (const Ping& ping : mission.pings) {
    const TrajectoryPoint& tp = mission.trajectory.at(ping.trajectory_index);
    if (prev) set = predict_step(set, tp.control, tp.t - prev->t, config.motion_var, motion_rng);
    prev = &tp;

    std::vector<Eigen::Vector3d> beams;
    for (std::size_t b : subsample_beams(ping.beams_sensor.size(), config.beams_per_ping)) {
      beams.push_back(ping.beams_sensor[b]);
    }
    LocalizationStep step;
    step.t = tp.t;
    step.gt = tp.gt;
    step.dr = tp.dr;
    try {
      set = weight_step(set, beams, map, config.depth_noise_var);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateWeights) throw;
      set = ParticleSet::uniform(std::move(set.particles));
      step.degenerate = true;
      ++result.degenerate_count;
    }
    step.estimate = estimate_pose(set);
    step.ess = set.ess();
    if (config.resample_every_step || step.ess < config.ess_fraction * static_cast<double>(set.size())) {
      set = residual_resample(set, resample_rng);
      step.resampled = true;
    }
    result.steps.push_back(step);
  }
  return result;
}

Survey simulate_mission(const Terrain& terrain, const MissionPlan& plan, const MbesParams& mbes,
                        const SurveyNoise& noise, std::uint64_t seed) {
  if (!(plan.length > 0.0) || !(plan.speed > 0.0) || !(plan.dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mission needs positive length, speed and dt");
  }
  std::mt19937_64 rng(derive_seed(seed, Stream::LocalizationMission));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double y_offset = plan.lateral_range * unit(rng);
  const double angle = M_PI * unit(rng);
  const Box& box = terrain.box();
  PlannedPath path;
  path.start = Pose6::from_xyz_rpy(box.center().x() - 0.5 * plan.length, box.center().y() + y_offset, plan.vehicle_z,
                                   0, 0, 0);
  const int steps = std::max(1, static_cast<int>(std::lround(plan.length / (plan.speed * plan.dt))));
  Control c;
  c.linear.x() = plan.length / (steps * plan.dt);
  path.controls.assign(static_cast<std::size_t>(steps), c);
  Pose6 dr_start = path.start;
  dr_start.translation.x() += plan.initial_offset * std::cos(angle);
  dr_start.translation.y() += plan.initial_offset * std::sin(angle);
  return simulate_path(terrain, path, plan.dt, 1, mbes, noise, derive_seed(seed, Stream::LocalizationMission, 1),
                       dr_start);
}

namespace {

void write_pose(std::ostream& out, const Pose6& p) {
  const Eigen::Quaterniond q(p.rotation);
  out << ',' << p.translation.x() << ',' << p.translation.y() << ',' << p.translation.z() << ',' << q.w() << ','
      << q.x() << ',' << q.y() << ',' << q.z();
}

}  // namespace

void write_localization_csv(const std::filesystem::path& path, const LocalizationResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write localization trace " + path.string());
  out << "t";
  for (const char* who : {"gt", "dr", "pf"}) {
    for (const char* f : {"x", "y", "z", "qw", "qx", "qy", "qz"}) out << ',' << who << '_' << f;
  }
  out << ",pf_std,ess\n" << std::setprecision(17);
  for (const LocalizationStep& s : result.steps) {
    out << s.t;
    write_pose(out, s.gt);
    write_pose(out, s.dr);
    write_pose(out, s.estimate.pose);
    out << ',' << s.estimate.position_std() << ',' << s.ess << '\n';
  }
}

}  // namespace svgpmap
