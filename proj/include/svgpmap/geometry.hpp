#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace svgpmap {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector9d = Eigen::Matrix<double, 9, 1>;
using Matrix9d = Eigen::Matrix<double, 9, 9>;

/// Rigid transform in SE(3). Tangent vectors are ordered [translation; rotation].
struct Pose6 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose6 identity() { return {}; }
  static Pose6 from_xyz_rpy(double x, double y, double z, double roll, double pitch, double yaw);

  Pose6 operator*(const Pose6& rhs) const;
  Pose6 inverse() const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const;
  Eigen::Matrix4d matrix() const;
  double yaw() const;
  bool is_valid(double tol = 1e-9) const;
};

struct PoseCovariance {
  Matrix6d matrix = Matrix6d::Zero();
};

/// Seabed patch e ~ N(mean, covariance) in the map frame.
struct PatchDistribution {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

/// 9x9 joint covariance of pose perturbation and patch perturbation.
struct CompoundCovariance {
  Matrix9d matrix = Matrix9d::Zero();
};

struct SigmaSample {
  Vector6d xi = Vector6d::Zero();
  Eigen::Vector3d zeta = Eigen::Vector3d::Zero();
};

struct BeamDistribution {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

inline constexpr int kSigmaDim = 9;
inline constexpr double kDefaultKappa = 0.0;

Eigen::Matrix3d hat(const Eigen::Vector3d& v);
Eigen::Matrix4d se3_hat(const Vector6d& xi);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& phi);
Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation);
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi);
Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& phi);

Pose6 exp_se3(const Vector6d& xi);
Vector6d log_se3(const Pose6& pose);

/// Throws InvalidCovariance unless `m` is symmetric and PSD within `tol`
/// (scaled by the largest absolute entry when that exceeds one).
void validate_covariance(const Eigen::MatrixXd& m, double tol = 1e-12);

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

/// Lower-triangular C with C C^T = m for positive semi-definite `m`.
/// Zero pivots (within a relative 1e-12 of the largest diagonal) yield zero
/// columns. Returns false when a pivot is clearly negative.
bool semidefinite_cholesky(const Eigen::MatrixXd& m, Eigen::MatrixXd& lower);

CompoundCovariance compound_covariance(const PoseCovariance& pose_cov,
                                       const Eigen::Matrix3d& patch_cov);

/// 2L+1 samples: zero, +sqrt(L+kappa) col_l C, -sqrt(L+kappa) col_l C.
std::vector<SigmaSample> sigma_points(const CompoundCovariance& xi_cov, double kappa = kDefaultKappa);

/// Weights (center, others) for the sigma-point mean and covariance.
std::pair<double, double> sigma_weights(double kappa = kDefaultKappa);

using SigmaMeasurement =
    std::function<Eigen::Vector3d(const Vector6d& xi, const Eigen::Vector3d& zeta)>;

/// Unscented push-forward of the joint perturbation through `h`.
BeamDistribution propagate_sigma(const CompoundCovariance& xi_cov, double kappa,
                                 const SigmaMeasurement& h);

/// Propagates pose and patch uncertainty to a map-frame beam point using the
/// reprojection h(r_l, e_l) = T(r_l) T(r_mean)^-1 e_l with r_l = exp(xi^) r_mean.
BeamDistribution propagate_beam(const Pose6& pose_mean, const PatchDistribution& patch,
                                const PoseCovariance& pose_cov, double kappa = kDefaultKappa);

/// Maps a covariance over world-frame errors [dp; dphi] (position and
/// rotation about the vehicle) to the equivalent left-perturbation covariance
/// about the map origin: rho = dp + t^ dphi.
PoseCovariance world_error_to_left_perturbation(const Pose6& pose, const PoseCovariance& cov);

}  // namespace svgpmap
