#include "svgpmap/geometry.hpp"

#include "svgpmap/errors.hpp"

#include <cmath>

namespace svgpmap {

namespace {

constexpr double kSmallAngle = 1e-8;

}  // namespace

Pose6 Pose6::from_xyz_rpy(double x, double y, double z, double roll, double pitch, double yaw) {
  Pose6 pose;
  pose.rotation = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                   Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                   Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
                      .toRotationMatrix();
  pose.translation = Eigen::Vector3d(x, y, z);
  return pose;
}

Pose6 Pose6::operator*(const Pose6& rhs) const {
  Pose6 out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

Pose6 Pose6::inverse() const {
  Pose6 out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Eigen::Vector3d Pose6::operator*(const Eigen::Vector3d& point) const {
  return rotation * point + translation;
}

Eigen::Matrix4d Pose6::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

double Pose6::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

bool Pose6::is_valid(double tol) const {
  const double ortho = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho < tol && std::abs(rotation.determinant() - 1.0) < tol && translation.allFinite();
}

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix4d se3_hat(const Vector6d& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = hat(xi.tail<3>());
  m.topRightCorner<3, 1>() = xi.head<3>();
  return m;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d phi_hat = hat(phi);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + phi_hat + 0.5 * phi_hat * phi_hat;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * phi_hat + b * phi_hat * phi_hat;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d phi_hat = hat(phi);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + 0.5 * phi_hat + phi_hat * phi_hat / 6.0;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Eigen::Matrix3d::Identity() + a * phi_hat + b * phi_hat * phi_hat;
}

Eigen::Matrix3d so3_left_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d phi_hat = hat(phi);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() - 0.5 * phi_hat + phi_hat * phi_hat / 12.0;
  }
  const double c = 1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Eigen::Matrix3d::Identity() - 0.5 * phi_hat + c * phi_hat * phi_hat;
}

Pose6 exp_se3(const Vector6d& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d phi = xi.tail<3>();
  Pose6 pose;
  pose.rotation = so3_exp(phi);
  pose.translation = so3_left_jacobian(phi) * rho;
  return pose;
}

Vector6d log_se3(const Pose6& pose) {
  const Eigen::Vector3d phi = so3_log(pose.rotation);
  Vector6d xi;
  xi.head<3>() = so3_left_jacobian_inverse(phi) * pose.translation;
  xi.tail<3>() = phi;
  return xi;
}

void validate_covariance(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || !m.allFinite()) {
    throw Error(ErrorCode::InvalidCovariance, "covariance must be a finite square matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw Error(ErrorCode::InvalidCovariance, "covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol * scale) {
    throw Error(ErrorCode::InvalidCovariance, "covariance is indefinite");
  }
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

bool semidefinite_cholesky(const Eigen::MatrixXd& m, Eigen::MatrixXd& lower) {
  const Eigen::Index n = m.rows();
  lower.setZero(n, n);
  const double max_diag = n > 0 ? m.diagonal().cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-12 * max_diag;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (d < -tol) return false;
    if (d <= tol) continue;  // zero column
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return true;
}

CompoundCovariance compound_covariance(const PoseCovariance& pose_cov,
                                       const Eigen::Matrix3d& patch_cov) {
  validate_covariance(pose_cov.matrix);
  validate_covariance(patch_cov);
  CompoundCovariance out;
  out.matrix.topLeftCorner<6, 6>() = pose_cov.matrix;
  out.matrix.bottomRightCorner<3, 3>() = patch_cov;
  return out;
}

std::pair<double, double> sigma_weights(double kappa) {
  const double denom = kSigmaDim + kappa;
  return {kappa / denom, 1.0 / (2.0 * denom)};
}

std::vector<SigmaSample> sigma_points(const CompoundCovariance& xi_cov, double kappa) {
  if (kappa < 0.0 || kSigmaDim + kappa <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "sigma_points requires kappa >= 0");
  }
  Eigen::MatrixXd chol;
  if (!semidefinite_cholesky(xi_cov.matrix, chol)) {
    // One jittered retry before giving up.
    const double jitter = 1e-9 * xi_cov.matrix.trace() / kSigmaDim;
    const Eigen::MatrixXd jittered = xi_cov.matrix + jitter * Matrix9d::Identity();
    if (jitter <= 0.0 || !semidefinite_cholesky(jittered, chol)) {
      throw Error(ErrorCode::InvalidCovariance, "Cholesky of compound covariance failed");
    }
  }
  const double scale = std::sqrt(kSigmaDim + kappa);
  std::vector<SigmaSample> samples(2 * kSigmaDim + 1);
  for (int l = 0; l < kSigmaDim; ++l) {
    const Vector9d col = scale * chol.col(l);
    samples[1 + l].xi = col.head<6>();
    samples[1 + l].zeta = col.tail<3>();
    samples[1 + kSigmaDim + l].xi = -col.head<6>();
    samples[1 + kSigmaDim + l].zeta = -col.tail<3>();
  }
  return samples;
}

BeamDistribution propagate_sigma(const CompoundCovariance& xi_cov, double kappa,
                                 const SigmaMeasurement& h) {
  const auto samples = sigma_points(xi_cov, kappa);
  const auto [w0, wi] = sigma_weights(kappa);

  std::vector<Eigen::Vector3d> points;
  points.reserve(samples.size());
  for (const auto& s : samples) points.push_back(h(s.xi, s.zeta));

  // Mean accumulated as offsets from the center sample so coincident samples
  // reproduce it exactly.
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  for (std::size_t l = 1; l < points.size(); ++l) offset += wi * (points[l] - points[0]);
  BeamDistribution out;
  out.mean = points[0] + offset;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t l = 0; l < points.size(); ++l) {
    const Eigen::Vector3d d = points[l] - out.mean;
    cov += (l == 0 ? w0 : wi) * d * d.transpose();
  }
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

BeamDistribution propagate_beam(const Pose6& pose_mean, const PatchDistribution& patch,
                                const PoseCovariance& pose_cov, double kappa) {
  (void)pose_mean;  // h reduces to exp(xi^) e under the left perturbation
  const CompoundCovariance xi_cov = compound_covariance(pose_cov, patch.covariance);
  const Eigen::Vector3d patch_mean = patch.mean;
  return propagate_sigma(xi_cov, kappa, [&](const Vector6d& xi, const Eigen::Vector3d& zeta) {
    // T(r_l) T(r_mean)^-1 = exp(xi^) for r_l = exp(xi^) r_mean.
    return exp_se3(xi) * (patch_mean + zeta);
  });
}

PoseCovariance world_error_to_left_perturbation(const Pose6& pose, const PoseCovariance& cov) {
  Matrix6d a = Matrix6d::Identity();
  a.topRightCorner<3, 3>() = hat(pose.translation);
  PoseCovariance out;
  out.matrix = a * cov.matrix * a.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

}  // namespace svgpmap
