#include "svgpmap/survey_io.hpp"

#include "binary_io.hpp"
#include "svgpmap/errors.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace svgpmap {

using detail::read_pod;
using detail::write_pod;

namespace {

constexpr std::array<char, 8> kDatasetMagic = {'U', 'I', 'D', 'S', '1', '\0', '\0', '\0'};
constexpr std::array<char, 8> kSurveyMagic = {'S', 'U', 'R', 'V', 'E', 'Y', '1', '\0'};

void check_magic(std::ifstream& in, const std::array<char, 8>& magic, const std::filesystem::path& path) {
  std::array<char, 8> got{};
  in.read(got.data(), got.size());
  if (!in || got != magic) {
    throw Error(ErrorCode::Io, "bad magic in " + path.string() + " (expected " + std::string(magic.data()) + ")");
  }
}

void write_vec3(std::ofstream& out, const Eigen::Vector3d& v) {
  for (int i = 0; i < 3; ++i) write_pod(out, v(i));
}

Eigen::Vector3d read_vec3(std::ifstream& in, const std::filesystem::path& path) {
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) v(i) = read_pod<double>(in, path);
  return v;
}

void write_pose(std::ofstream& out, const Pose6& p) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) write_pod(out, p.rotation(r, c));
  write_vec3(out, p.translation);
}

Pose6 read_pose(std::ifstream& in, const std::filesystem::path& path) {
  Pose6 p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = read_pod<double>(in, path);
  p.translation = read_vec3(in, path);
  return p;
}

void write_pose_csv(std::ostream& out, const Pose6& p) {
  const Eigen::Quaterniond q(p.rotation);
  out << ',' << p.translation.x() << ',' << p.translation.y() << ',' << p.translation.z() << ',' << q.w() << ','
      << q.x() << ',' << q.y() << ',' << q.z();
}

}  // namespace

void save_point_cloud(const std::filesystem::path& path, const Eigen::MatrixX3d& cloud) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write point cloud " + path.string());
  out << "# x y z\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    out << cloud(i, 0) << ' ' << cloud(i, 1) << ' ' << cloud(i, 2) << '\n';
  }
}

Eigen::MatrixX3d load_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open point cloud " + path.string());
  std::vector<Eigen::Vector3d> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Eigen::Vector3d p;
    if (!(ss >> p.x() >> p.y() >> p.z())) {
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    }
    pts.push_back(p);
  }
  Eigen::MatrixX3d cloud(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) cloud.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return cloud;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write dataset " + path.string());
  out.write(kDatasetMagic.data(), kDatasetMagic.size());
  write_pod(out, static_cast<std::uint64_t>(dataset.size()));
  for (const UncertainInput& u : dataset) {
    write_pod(out, u.mean_xy.x());
    write_pod(out, u.mean_xy.y());
    write_pod(out, u.cov_xy(0, 0));
    write_pod(out, u.cov_xy(0, 1));
    write_pod(out, u.cov_xy(1, 1));
    write_pod(out, u.depth);
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing dataset " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + path.string());
  check_magic(in, kDatasetMagic, path);
  const auto n = read_pod<std::uint64_t>(in, path);
  Dataset d;
  d.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 26)));
  for (std::uint64_t i = 0; i < n; ++i) {
    UncertainInput u;
    u.mean_xy.x() = read_pod<double>(in, path);
    u.mean_xy.y() = read_pod<double>(in, path);
    u.cov_xy(0, 0) = read_pod<double>(in, path);
    u.cov_xy(0, 1) = u.cov_xy(1, 0) = read_pod<double>(in, path);
    u.cov_xy(1, 1) = read_pod<double>(in, path);
    u.depth = read_pod<double>(in, path);
    d.push_back(u);
  }
  return d;
}

void write_trajectory_csv(const std::filesystem::path& path, const Survey& survey) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write trajectory " + path.string());
  out << "t,gt_x,gt_y,gt_z,gt_qw,gt_qx,gt_qy,gt_qz,dr_x,dr_y,dr_z,dr_qw,dr_qx,dr_qy,dr_qz";
  for (int r = 0; r < 6; ++r)
    for (int c = r; c < 6; ++c) out << ",cov_" << r << c;
  out << '\n' << std::setprecision(17);
  for (const TrajectoryPoint& tp : survey.trajectory) {
    out << tp.t;
    write_pose_csv(out, tp.gt);
    write_pose_csv(out, tp.dr);
    for (int r = 0; r < 6; ++r)
      for (int c = r; c < 6; ++c) out << ',' << tp.ekf_cov.matrix(r, c);
    out << '\n';
  }
}

void save_survey_binary(const std::filesystem::path& path, const Survey& survey) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write survey " + path.string());
  out.write(kSurveyMagic.data(), kSurveyMagic.size());
  write_pod(out, static_cast<std::uint64_t>(survey.stats.beams_cast));
  write_pod(out, static_cast<std::uint64_t>(survey.stats.beams_dropped));
  write_pod(out, static_cast<std::uint64_t>(survey.trajectory.size()));
  for (const TrajectoryPoint& tp : survey.trajectory) {
    write_pod(out, tp.t);
    write_pose(out, tp.gt);
    write_pose(out, tp.dr);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) write_pod(out, tp.ekf_cov.matrix(r, c));
    write_vec3(out, tp.control.linear);
    write_vec3(out, tp.control.angular);
  }
  write_pod(out, static_cast<std::uint64_t>(survey.pings.size()));
  for (const Ping& p : survey.pings) {
    write_pod(out, static_cast<std::uint64_t>(p.trajectory_index));
    write_pod(out, static_cast<std::uint64_t>(p.beams_map.size()));
    for (std::size_t i = 0; i < p.beams_map.size(); ++i) {
      write_vec3(out, p.beams_sensor[i]);
      write_vec3(out, p.beams_map[i]);
      write_vec3(out, p.beams_gt[i]);
    }
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing survey " + path.string());
}

Survey load_survey_binary(const std::filesystem::path& path, const Terrain& terrain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open survey " + path.string());
  check_magic(in, kSurveyMagic, path);
  Survey s;
  s.terrain = terrain;
  s.stats.beams_cast = read_pod<std::uint64_t>(in, path);
  s.stats.beams_dropped = read_pod<std::uint64_t>(in, path);
  const auto n_traj = read_pod<std::uint64_t>(in, path);
  for (std::uint64_t k = 0; k < n_traj; ++k) {
    TrajectoryPoint tp;
    tp.t = read_pod<double>(in, path);
    tp.gt = read_pose(in, path);
    tp.dr = read_pose(in, path);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) tp.ekf_cov.matrix(r, c) = read_pod<double>(in, path);
    tp.control.linear = read_vec3(in, path);
    tp.control.angular = read_vec3(in, path);
    s.trajectory.push_back(tp);
  }
  const auto n_pings = read_pod<std::uint64_t>(in, path);
  for (std::uint64_t k = 0; k < n_pings; ++k) {
    Ping p;
    p.trajectory_index = read_pod<std::uint64_t>(in, path);
    if (p.trajectory_index >= s.trajectory.size()) throw Error(ErrorCode::Io, "ping index out of range in " + path.string());
    const auto n = read_pod<std::uint64_t>(in, path);
    for (std::uint64_t i = 0; i < n; ++i) {
      p.beams_sensor.push_back(read_vec3(in, path));
      p.beams_map.push_back(read_vec3(in, path));
      p.beams_gt.push_back(read_vec3(in, path));
    }
    s.pings.push_back(std::move(p));
  }
  return s;
}

}  // namespace svgpmap
