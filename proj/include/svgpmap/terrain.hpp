#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace svgpmap {

struct Box {
  double x_min = -150.0;
  double x_max = 150.0;
  double y_min = -150.0;
  double y_max = 150.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double diagonal() const { return std::hypot(width(), height()); }
  Eigen::Vector2d center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  void validate() const;
  bool operator==(const Box&) const = default;
};

/// Centered sub-rectangle covering `area_fraction` of `box`.
Box centered_subbox(const Box& box, double area_fraction);

struct Bump {
  double cx = 0.0, cy = 0.0;
  double amplitude = 0.0;  // m, signed
  double sigma = 1.0;      // m
  bool operator==(const Bump&) const = default;
};

struct Wave {
  double amplitude = 0.0;  // m
  double kx = 0.0, ky = 0.0;  // rad/m
  double phase = 0.0;
  bool operator==(const Wave&) const = default;
};

struct TerrainParams {
  Box box;
  double base_depth = -25.0;
  int n_bumps = 14;
  double bump_amplitude_min = 1.0;
  double bump_amplitude_max = 4.0;
  double bump_sigma_min = 12.0;
  double bump_sigma_max = 40.0;
  int n_waves = 3;
  double wave_amplitude = 1.0;
  double wavelength_min = 80.0;
  double wavelength_max = 250.0;
};

/// z = base + sum of Gaussian bumps + sum of plane waves.
class Terrain {
 public:
  Terrain() = default;
  Terrain(Box box, double base_depth, std::vector<Bump> bumps, std::vector<Wave> waves);

  double height(double x, double y) const;
  Eigen::Vector2d gradient(double x, double y) const;

  const Box& box() const { return box_; }
  double base_depth() const { return base_depth_; }
  const std::vector<Bump>& bumps() const { return bumps_; }
  const std::vector<Wave>& waves() const { return waves_; }

  /// Largest possible |z - base| given the coefficients.
  double amplitude_bound() const;

  bool operator==(const Terrain&) const = default;

 private:
  Box box_;
  double base_depth_ = 0.0;
  std::vector<Bump> bumps_;
  std::vector<Wave> waves_;
};

Terrain generate_terrain(std::uint64_t seed, const TerrainParams& params);

/// Text format with hexadecimal floats, so coefficients round-trip exactly.
void save_terrain(const std::filesystem::path& path, const Terrain& terrain);
Terrain load_terrain(const std::filesystem::path& path);

}  // namespace svgpmap
