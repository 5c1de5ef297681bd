#pragma once

#include "svgpmap/geometry.hpp"
#include "svgpmap/svgp.hpp"
#include "svgpmap/terrain.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace svgpmap {

/// Body-frame velocities held constant over one integration step.
struct Control {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();   // m/s
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();  // rad/s
};

/// pose * exp([v dt; w dt]).
Pose6 integrate_control(const Pose6& pose, const Control& control, double dt);

struct LawnmowerPlan {
  double margin = 15.0;         // m from the box edge to the outermost lines and turns
  double line_spacing = 50.0;   // m between parallel legs
  double speed = 2.0;           // m/s
  double vehicle_z = -5.0;      // m, constant depth of the vehicle
  double dt = 0.1;              // s, motion integration step
  int ping_every = 10;          // integration steps per ping
};

struct MbesParams {
  int n_beams = 64;
  double swath_deg = 120.0;
  double max_range = 200.0;     // m
  double march_step = 0.5;      // m
};

struct SurveyNoise {
  double yaw_drift_std = 0.0;   // rad/s, iid per integration step
  double sensor_std = 0.1;      // m, isotropic MBES noise in the sensor frame
  // Extra EKF process noise on the body rates [v; w] (m/s, rad/s). The yaw
  // entry is added on top of yaw_drift_std.
  Vector6d ekf_rate_std = Vector6d::Zero();
};

struct TrajectoryPoint {
  double t = 0.0;
  Pose6 gt;
  Pose6 dr;
  // World-frame error covariance over [dp; dphi], true = (exp(dphi^) R, t + dp).
  PoseCovariance ekf_cov;
  Control control;
};

struct Ping {
  std::size_t trajectory_index = 0;
  std::vector<Eigen::Vector3d> beams_sensor;  // noisy, sensor frame
  std::vector<Eigen::Vector3d> beams_map;     // sensor beams georeferenced with the DR pose
  std::vector<Eigen::Vector3d> beams_gt;      // exact terrain hits
};

struct SurveyStats {
  std::size_t beams_cast = 0;
  std::size_t beams_dropped = 0;
};

struct Survey {
  Terrain terrain;
  std::vector<TrajectoryPoint> trajectory;  // one entry per ping epoch
  std::vector<Ping> pings;
  SurveyStats stats;

  std::size_t beam_count() const;
  /// All beams of one kind stacked in ping order, one row per beam.
  Eigen::MatrixX3d cloud(bool ground_truth) const;
};

/// Unit beam directions in the sensor frame (x forward, y port, z up), fanned
/// across the body y-z plane and pointing down.
std::vector<Eigen::Vector3d> beam_directions(const MbesParams& mbes);

/// First intersection of origin + s * direction with the terrain, found by
/// marching then bisection. Empty when the ray leaves the box or exceeds the
/// range without hitting.
std::optional<Eigen::Vector3d> cast_ray(const Terrain& terrain, const Eigen::Vector3d& origin,
                                        const Eigen::Vector3d& direction, const MbesParams& mbes);

/// One step of the pure-prediction EKF for the 6-DOF point-mass model. `dr_before` and
/// `dr_after` are the DR poses at either end of the step.
PoseCovariance ekf_predict(const PoseCovariance& cov, const Pose6& dr_before, const Pose6& dr_after,
                           double dt, const Vector6d& rate_std);

struct PlannedPath {
  Pose6 start;
  std::vector<Control> controls;
};

/// Boustrophedon legs along x, stepping in y, joined by semicircular turns.
PlannedPath lawnmower_path(const Box& box, const LawnmowerPlan& plan);

/// Runs controls on the ground truth, the noisy DR copy and the EKF, pinging
/// every `ping_every` steps. `dr_start` defaults to the GT start.
Survey simulate_path(const Terrain& terrain, const PlannedPath& path, double dt, int ping_every,
                     const MbesParams& mbes, const SurveyNoise& noise, std::uint64_t seed,
                     std::optional<Pose6> dr_start = std::nullopt);

Survey simulate_survey(const Terrain& terrain, const LawnmowerPlan& plan, const MbesParams& mbes,
                       const SurveyNoise& noise, std::uint64_t seed);

enum class InputMode { DI, UI };

/// One UncertainInput per beam in ping order. UI mode propagates the EKF
/// covariance and the isotropic patch covariance `patch_std^2 I` through the
/// sigma-point transform; DI mode keeps the DR beam with zero covariance.
Dataset build_dataset(const Survey& survey, InputMode mode, double patch_std, double kappa = kDefaultKappa);

struct SplitMasks {
  std::vector<bool> train;
  std::vector<bool> heldout;
};

/// Beams whose DR map position falls inside the centered rectangle covering
/// `heldout_fraction` of the box are held out.
SplitMasks split_survey(const Survey& survey, double heldout_fraction);

Dataset select(const Dataset& dataset, const std::vector<bool>& mask);

}  // namespace svgpmap
