#pragma once

#include "svgpmap/survey.hpp"

#include <filesystem>

namespace svgpmap {

/// "x y z" per line, 17 significant digits; '#' starts a comment line.
void save_point_cloud(const std::filesystem::path& path, const Eigen::MatrixX3d& cloud);
Eigen::MatrixX3d load_point_cloud(const std::filesystem::path& path);

/// Binary: magic "UIDS1\0\0\0", u64 count, then per record mean_xy (2 f64),
/// cov_xy upper triangle xx, xy, yy (3 f64) and depth (f64), little-endian.
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

/// t, GT pose (x y z qw qx qy qz), DR pose, 21 upper-triangle EKF entries.
void write_trajectory_csv(const std::filesystem::path& path, const Survey& survey);

/// Binary trajectory and pings (everything except the terrain), magic "SURVEY1".
void save_survey_binary(const std::filesystem::path& path, const Survey& survey);
Survey load_survey_binary(const std::filesystem::path& path, const Terrain& terrain);

}  // namespace svgpmap
