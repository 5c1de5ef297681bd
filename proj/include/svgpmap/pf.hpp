#pragma once

#include "svgpmap/geometry.hpp"
#include "svgpmap/survey.hpp"
#include "svgpmap/svgp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace svgpmap {

struct ParticleSet {
  std::vector<Pose6> particles;
  Eigen::VectorXd weights;
  Eigen::VectorXd log_weights;

  std::size_t size() const { return particles.size(); }
  double ess() const { return 1.0 / weights.squaredNorm(); }
  /// J copies of the given poses with weight 1/J.
  static ParticleSet uniform(std::vector<Pose6> poses);
  void validate() const;
};

struct PfConfig {
  int num_particles = 60;
  // Per-step noise variances on the body rates [v; w], (m/s)^2 and (rad/s)^2.
  Vector6d motion_var = (Vector6d() << 0, 0, 0, 0, 0, 1e-4).finished();
  double depth_noise_var = 0.01;  // Q_z, m^2
  int beams_per_ping = 16;
  double ess_fraction = 0.5;      // resample when ESS < fraction * J
  bool resample_every_step = false;
  double init_position_std = 20.0;  // m, horizontal spread around the start estimate
  double init_yaw_std = 0.0;        // rad
  std::uint64_t seed = 0;

  void validate() const;
};

/// Moves every particle by the control with independent rate noise draws.
ParticleSet predict_step(const ParticleSet& set, const Control& control, double dt, const Vector6d& motion_var,
                         std::mt19937_64& rng);

/// Evenly spread subset of `count` beam indices out of `n`.
std::vector<std::size_t> subsample_beams(std::size_t n, int count);

/// Adds the factorized beam log-likelihood under each particle to the
/// log-weights and renormalizes. `beams_sensor` are sensor-frame points. All
/// J x n queries go through one batched predict. Throws DegenerateWeights
/// when no particle has a finite likelihood.
ParticleSet weight_step(const ParticleSet& set, const std::vector<Eigen::Vector3d>& beams_sensor,
                        const PredictiveCache& map, double depth_noise_var);

/// floor(J w_j) deterministic copies plus a multinomial draw over the
/// residual mass. Output weights are uniform.
ParticleSet residual_resample(const ParticleSet& set, std::mt19937_64& rng);

struct PoseEstimate {
  Pose6 pose;                       // weighted mean translation, circular mean yaw
  Eigen::Matrix3d position_cov = Eigen::Matrix3d::Zero();
  double position_std() const { return std::sqrt(position_cov.trace()); }
};

PoseEstimate estimate_pose(const ParticleSet& set);

struct LocalizationStep {
  double t = 0.0;
  Pose6 gt;
  Pose6 dr;
  PoseEstimate estimate;
  double ess = 0.0;
  bool resampled = false;
  bool degenerate = false;
};

struct LocalizationResult {
  std::vector<LocalizationStep> steps;
  std::size_t degenerate_count = 0;

  /// Position RMSE over all steps of the filter mean or of DR against GT.
  double rmse_pf() const;
  double rmse_dr() const;
  double final_error_pf() const;
};

/// Runs the filter along `mission`, starting the particles around the
/// mission's initial DR pose and weighting with each ping.
LocalizationResult run_localization(const Survey& mission, const PredictiveCache& map, const PfConfig& config);

struct MissionPlan {
  double length = 140.0;         // m, straight line along x
  double speed = 2.0;            // m/s
  double dt = 1.0;               // s per step, one ping per step
  double lateral_range = 40.0;   // m, |y offset| of the line from the box center
  double initial_offset = 20.0;  // m, DR start error in a random horizontal direction
  double vehicle_z = -5.0;
};

/// Straight-line mission centered in the box with the DR start displaced by
/// `initial_offset`. Line placement and offset direction come from `seed`.
Survey simulate_mission(const Terrain& terrain, const MissionPlan& plan, const MbesParams& mbes,
                        const SurveyNoise& noise, std::uint64_t seed);

/// CSV: t, gt pose, dr pose, pf pose (x y z qw qx qy qz each), pf_std, ess.
void write_localization_csv(const std::filesystem::path& path, const LocalizationResult& result);

}  // namespace svgpmap
