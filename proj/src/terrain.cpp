#include "svgpmap/terrain.hpp"

#include "svgpmap/errors.hpp"
#include "svgpmap/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace svgpmap {

void Box::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min)) throw Error(ErrorCode::InvalidArgument, "degenerate bounding box");
}

Box centered_subbox(const Box& box, double area_fraction) {
  if (area_fraction < 0.0 || area_fraction > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "held-out area fraction must lie in [0, 1]");
  }
  const double s = std::sqrt(area_fraction);
  const Eigen::Vector2d c = box.center();
  return {c.x() - 0.5 * s * box.width(), c.x() + 0.5 * s * box.width(), c.y() - 0.5 * s * box.height(),
          c.y() + 0.5 * s * box.height()};
}

Terrain::Terrain(Box box, double base_depth, std::vector<Bump> bumps, std::vector<Wave> waves)
    : box_(box), base_depth_(base_depth), bumps_(std::move(bumps)), waves_(std::move(waves)) {}

double Terrain::height(double x, double y) const {
  double z = base_depth_;
  for (const Bump& b : bumps_) {
    const double dx = x - b.cx, dy = y - b.cy;
    z += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
  }
  for (const Wave& w : waves_) z += w.amplitude * std::sin(w.kx * x + w.ky * y + w.phase);
  return z;
}

Eigen::Vector2d Terrain::gradient(double x, double y) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const Bump& b : bumps_) {
    const double dx = x - b.cx, dy = y - b.cy;
    const double s2 = b.sigma * b.sigma;
    const double e = b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
    g += -e / s2 * Eigen::Vector2d(dx, dy);
  }
  for (const Wave& w : waves_) {
    const double c = w.amplitude * std::cos(w.kx * x + w.ky * y + w.phase);
    g += c * Eigen::Vector2d(w.kx, w.ky);
  }
  return g;
}

double Terrain::amplitude_bound() const {
  double a = 0.0;
  for (const Bump& b : bumps_) a += std::abs(b.amplitude);
  for (const Wave& w : waves_) a += std::abs(w.amplitude);
  return a;
}

Terrain generate_terrain(std::uint64_t seed, const TerrainParams& params) {
  params.box.validate();
  if (params.n_bumps < 0 || params.n_waves < 0) throw Error(ErrorCode::InvalidArgument, "negative feature count");
  std::mt19937_64 rng(derive_seed(seed, Stream::Terrain));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto lerp = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  const Box& box = params.box;
  std::vector<Bump> bumps;
  for (int i = 0; i < params.n_bumps; ++i) {
    Bump b;
    b.cx = lerp(box.x_min, box.x_max);
    b.cy = lerp(box.y_min, box.y_max);
    b.amplitude = lerp(params.bump_amplitude_min, params.bump_amplitude_max) * (u01(rng) < 0.5 ? -1.0 : 1.0);
    b.sigma = lerp(params.bump_sigma_min, params.bump_sigma_max);
    bumps.push_back(b);
  }
  std::vector<Wave> waves;
  for (int i = 0; i < params.n_waves; ++i) {
    Wave w;
    const double k = 2.0 * M_PI / lerp(params.wavelength_min, params.wavelength_max);
    const double dir = lerp(0.0, 2.0 * M_PI);
    w.amplitude = params.wave_amplitude;
    w.kx = k * std::cos(dir);
    w.ky = k * std::sin(dir);
    w.phase = lerp(0.0, 2.0 * M_PI);
    if (w.amplitude != 0.0) waves.push_back(w);
  }
  return Terrain(box, params.base_depth, std::move(bumps), std::move(waves));
}

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  if (!(in >> token)) throw Error(ErrorCode::Io, "truncated terrain file " + path.string());
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "bad number '" + token + "' in terrain file " + path.string());
  }
}

}  // namespace

void save_terrain(const std::filesystem::path& path, const Terrain& terrain) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write terrain file " + path.string());
  const Box& b = terrain.box();
  out << "TERRAIN1\n";
  out << "box " << hex(b.x_min) << ' ' << hex(b.x_max) << ' ' << hex(b.y_min) << ' ' << hex(b.y_max) << '\n';
  out << "base " << hex(terrain.base_depth()) << '\n';
  out << "bumps " << terrain.bumps().size() << '\n';
  for (const Bump& k : terrain.bumps()) {
    out << hex(k.cx) << ' ' << hex(k.cy) << ' ' << hex(k.amplitude) << ' ' << hex(k.sigma) << '\n';
  }
  out << "waves " << terrain.waves().size() << '\n';
  for (const Wave& w : terrain.waves()) {
    out << hex(w.amplitude) << ' ' << hex(w.kx) << ' ' << hex(w.ky) << ' ' << hex(w.phase) << '\n';
  }
}

Terrain load_terrain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open terrain file " + path.string());
  std::string word;
  auto expect = [&](const char* w) {
    if (!(in >> word) || word != w) {
      throw Error(ErrorCode::Io, std::string("expected '") + w + "' in terrain file " + path.string());
    }
  };
  expect("TERRAIN1");
  expect("box");
  Box box;
  box.x_min = parse_hex(in, path);
  box.x_max = parse_hex(in, path);
  box.y_min = parse_hex(in, path);
  box.y_max = parse_hex(in, path);
  expect("base");
  const double base = parse_hex(in, path);
  std::size_t n = 0;
  expect("bumps");
  if (!(in >> n)) throw Error(ErrorCode::Io, "bad bump count in " + path.string());
  std::vector<Bump> bumps(n);
  for (Bump& k : bumps) {
    k.cx = parse_hex(in, path);
    k.cy = parse_hex(in, path);
    k.amplitude = parse_hex(in, path);
    k.sigma = parse_hex(in, path);
  }
  expect("waves");
  if (!(in >> n)) throw Error(ErrorCode::Io, "bad wave count in " + path.string());
  std::vector<Wave> waves(n);
  for (Wave& w : waves) {
    w.amplitude = parse_hex(in, path);
    w.kx = parse_hex(in, path);
    w.ky = parse_hex(in, path);
    w.phase = parse_hex(in, path);
  }
  return Terrain(box, base, std::move(bumps), std::move(waves));
}

}  // namespace svgpmap
