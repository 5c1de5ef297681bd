#include "svgpmap/survey.hpp"

#include "svgpmap/errors.hpp"
#include "svgpmap/rng.hpp"

#include <cmath>
#include <random>

namespace svgpmap {

Pose6 integrate_control(const Pose6& pose, const Control& control, double dt) {
  Vector6d xi;
  xi << control.linear * dt, control.angular * dt;
  return pose * exp_se3(xi);
}

std::size_t Survey::beam_count() const {
  std::size_t n = 0;
  for (const Ping& p : pings) n += p.beams_map.size();
  return n;
}

Eigen::MatrixX3d Survey::cloud(bool ground_truth) const {
  Eigen::MatrixX3d out(static_cast<Eigen::Index>(beam_count()), 3);
  Eigen::Index row = 0;
  for (const Ping& p : pings) {
    const auto& beams = ground_truth ? p.beams_gt : p.beams_map;
    for (const Eigen::Vector3d& b : beams) out.row(row++) = b.transpose();
  }
  return out;
}

std::vector<Eigen::Vector3d> beam_directions(const MbesParams& mbes) {
  if (mbes.n_beams < 1) throw Error(ErrorCode::InvalidArgument, "MBES needs at least one beam");
  const double half = 0.5 * mbes.swath_deg * M_PI / 180.0;
  std::vector<Eigen::Vector3d> dirs;
  for (int i = 0; i < mbes.n_beams; ++i) {
    const double theta = mbes.n_beams == 1 ? 0.0 : -half + 2.0 * half * i / (mbes.n_beams - 1);
    dirs.emplace_back(0.0, std::sin(theta), -std::cos(theta));
  }
  return dirs;
}

std::optional<Eigen::Vector3d> cast_ray(const Terrain& terrain, const Eigen::Vector3d& origin,
                                        const Eigen::Vector3d& direction, const MbesParams& mbes) {
  const Box& box = terrain.box();
  auto point = [&](double s) -> Eigen::Vector3d { return origin + s * direction; };
  auto clearance = [&](double s) {
    const Eigen::Vector3d p = point(s);
    return p.z() - terrain.height(p.x(), p.y());
  };
  if (!box.contains(origin.x(), origin.y()) || clearance(0.0) <= 0.0) return std::nullopt;

  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  for (double s = mbes.march_step; s <= mbes.max_range + 0.5 * mbes.march_step; s += mbes.march_step) {
    const Eigen::Vector3d p = point(s);
    if (!box.contains(p.x(), p.y())) return std::nullopt;
    if (clearance(s) <= 0.0) {
      lo = s - mbes.march_step;
      hi = s;
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return std::nullopt;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (clearance(mid) > 0.0 ? lo : hi) = mid;
  }
  const Eigen::Vector3d hit = point(0.5 * (lo + hi));
  return Eigen::Vector3d(hit.x(), hit.y(), terrain.height(hit.x(), hit.y()));
}

PoseCovariance ekf_predict(const PoseCovariance& cov, const Pose6& dr_before, const Pose6& dr_after,
                           double dt, const Vector6d& rate_std) {
  Matrix6d f = Matrix6d::Identity();
  f.topRightCorner<3, 3>() = -hat(dr_after.translation - dr_before.translation);
  Matrix6d g = Matrix6d::Zero();
  g.topLeftCorner<3, 3>() = dr_before.rotation * dt;
  g.bottomRightCorner<3, 3>() = dr_before.rotation * dt;
  PoseCovariance out;
  out.matrix = f * cov.matrix * f.transpose() + g * rate_std.cwiseAbs2().asDiagonal() * g.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

PlannedPath lawnmower_path(const Box& box, const LawnmowerPlan& plan) {
  box.validate();
  if (!(plan.speed > 0.0) || !(plan.dt > 0.0) || !(plan.line_spacing > 0.0) || plan.ping_every < 1) {
    throw Error(ErrorCode::InvalidArgument, "lawnmower plan needs positive speed, dt, spacing and ping interval");
  }
  // Turns bulge one radius past the leg ends, so the legs stop short of the margin by that much.
  const double radius = 0.5 * plan.line_spacing;
  const double leg = box.width() - 2.0 * (plan.margin + radius);
  const double span = box.height() - 2.0 * plan.margin;
  if (!(leg > 0.0) || span < 0.0) throw Error(ErrorCode::InvalidArgument, "lawnmower margin leaves no room");
  const int lines = static_cast<int>(std::floor(span / plan.line_spacing + 1e-9)) + 1;

  PlannedPath path;
  path.start =
      Pose6::from_xyz_rpy(box.x_min + plan.margin + radius, box.y_min + plan.margin, plan.vehicle_z, 0, 0, 0);

  const int leg_steps = std::max(1, static_cast<int>(std::lround(leg / (plan.speed * plan.dt))));
  Control straight;
  straight.linear.x() = leg / (leg_steps * plan.dt);

  const int turn_steps = std::max(1, static_cast<int>(std::lround(M_PI * radius / (plan.speed * plan.dt))));
  for (int line = 0; line < lines; ++line) {
    path.controls.insert(path.controls.end(), leg_steps, straight);
    if (line + 1 == lines) break;
    Control turn;
    turn.linear.x() = M_PI * radius / (turn_steps * plan.dt);
    turn.angular.z() = (line % 2 == 0 ? 1.0 : -1.0) * M_PI / (turn_steps * plan.dt);
    path.controls.insert(path.controls.end(), turn_steps, turn);
  }
  return path;
}

Survey simulate_path(const Terrain& terrain, const PlannedPath& path, double dt, int ping_every,
                     const MbesParams& mbes, const SurveyNoise& noise, std::uint64_t seed,
                     std::optional<Pose6> dr_start) {
  if (!(dt > 0.0) || ping_every < 1) throw Error(ErrorCode::InvalidArgument, "dt and ping interval must be positive");
  std::mt19937_64 drift_rng(derive_seed(seed, Stream::SurveyNoise, 0));
  std::mt19937_64 sensor_rng(derive_seed(seed, Stream::SurveyNoise, 1));
  std::normal_distribution<double> n01;

  const std::vector<Eigen::Vector3d> dirs = beam_directions(mbes);
  Vector6d rate_std = noise.ekf_rate_std;
  rate_std(5) = std::hypot(rate_std(5), noise.yaw_drift_std);

  Survey survey;
  survey.terrain = terrain;
  Pose6 gt = path.start;
  Pose6 dr = dr_start.value_or(path.start);
  PoseCovariance cov;

  auto ping = [&](double t, const Control& control) {
    TrajectoryPoint tp{t, gt, dr, cov, control};
    survey.trajectory.push_back(tp);
    std::vector<std::optional<Eigen::Vector3d>> hits(dirs.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      hits[i] = cast_ray(terrain, gt.translation, gt.rotation * dirs[i], mbes);
    }
    Ping p;
    p.trajectory_index = survey.trajectory.size() - 1;
    for (const auto& hit : hits) {
      ++survey.stats.beams_cast;
      if (!hit) {
        ++survey.stats.beams_dropped;
        continue;
      }
      Eigen::Vector3d sensor = gt.rotation.transpose() * (*hit - gt.translation);
      sensor += noise.sensor_std * Eigen::Vector3d(n01(sensor_rng), n01(sensor_rng), n01(sensor_rng));
      p.beams_sensor.push_back(sensor);
      p.beams_map.push_back(dr * sensor);
      p.beams_gt.push_back(*hit);
    }
    if (p.beams_map.empty()) {
      survey.trajectory.pop_back();
      return;
    }
    survey.pings.push_back(std::move(p));
  };

  ping(0.0, path.controls.empty() ? Control{} : path.controls.front());
  for (std::size_t k = 0; k < path.controls.size(); ++k) {
    const Control& c = path.controls[k];
    gt = integrate_control(gt, c, dt);
    Control noisy = c;
    noisy.angular.z() += noise.yaw_drift_std * n01(drift_rng);
    const Pose6 dr_next = integrate_control(dr, noisy, dt);
    cov = ekf_predict(cov, dr, dr_next, dt, rate_std);
    dr = dr_next;
    if ((k + 1) % static_cast<std::size_t>(ping_every) == 0) ping(static_cast<double>(k + 1) * dt, c);
  }
  return survey;
}

Survey simulate_survey(const Terrain& terrain, const LawnmowerPlan& plan, const MbesParams& mbes,
                       const SurveyNoise& noise, std::uint64_t seed) {
  return simulate_path(terrain, lawnmower_path(terrain.box(), plan), plan.dt, plan.ping_every, mbes, noise, seed);
}

Dataset build_dataset(const Survey& survey, InputMode mode, double patch_std, double kappa) {
  struct Item {
    std::size_t ping;
    std::size_t beam;
  };
  std::vector<Item> items;
  for (std::size_t p = 0; p < survey.pings.size(); ++p) {
    for (std::size_t b = 0; b < survey.pings[p].beams_map.size(); ++b) items.push_back({p, b});
  }
  std::vector<PoseCovariance> pose_covs;
  for (const Ping& p : survey.pings) {
    const TrajectoryPoint& tp = survey.trajectory.at(p.trajectory_index);
    pose_covs.push_back(world_error_to_left_perturbation(tp.dr, tp.ekf_cov));
  }
  const Eigen::Matrix3d omega = patch_std * patch_std * Eigen::Matrix3d::Identity();

  Dataset out(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
  std::optional<Error> failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Item& it = items[static_cast<std::size_t>(i)];
    const Ping& p = survey.pings[it.ping];
    const Eigen::Vector3d& beam = p.beams_map[it.beam];
    UncertainInput& ui = out[static_cast<std::size_t>(i)];
    ui.depth = beam.z();
    if (mode == InputMode::DI) {
      ui.mean_xy = beam.head<2>();
      continue;
    }
    const TrajectoryPoint& tp = survey.trajectory[p.trajectory_index];
    try {
      const BeamDistribution d = propagate_beam(tp.dr, PatchDistribution{beam, omega}, pose_covs[it.ping], kappa);
      ui.mean_xy = d.mean.head<2>();
      ui.cov_xy = d.covariance.topLeftCorner<2, 2>();
    } catch (const Error& e) {
#pragma omp critical
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;
  return out;
}

SplitMasks split_survey(const Survey& survey, double heldout_fraction) {
  const Box inner = centered_subbox(survey.terrain.box(), heldout_fraction);
  SplitMasks masks;
  for (const Ping& p : survey.pings) {
    for (const Eigen::Vector3d& b : p.beams_map) {
      const bool held = heldout_fraction > 0.0 && inner.contains(b.x(), b.y());
      masks.heldout.push_back(held);
      masks.train.push_back(!held);
    }
  }
  return masks;
}

Dataset select(const Dataset& dataset, const std::vector<bool>& mask) {
  if (mask.size() != dataset.size()) throw Error(ErrorCode::InvalidArgument, "mask size does not match dataset");
  Dataset out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (mask[i]) out.push_back(dataset[i]);
  }
  return out;
}

}  // namespace svgpmap
