#include "svgpmap/errors.hpp"
#include "svgpmap/terrain.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace svgpmap;

TEST(Terrain, FlatWithoutFeatures) {
  TerrainParams p;
  p.n_bumps = 0;
  p.n_waves = 0;
  const Terrain t = generate_terrain(3, p);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-150.0, 150.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng), y = u(rng);
    EXPECT_EQ(t.height(x, y), p.base_depth);
    EXPECT_EQ(t.gradient(x, y).norm(), 0.0);
  }
}

TEST(Terrain, SameSeedSameCoefficients) {
  const Terrain a = generate_terrain(42, TerrainParams{});
  const Terrain b = generate_terrain(42, TerrainParams{});
  const Terrain c = generate_terrain(43, TerrainParams{});
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(a.bumps().size(), 14u);
  EXPECT_EQ(a.waves().size(), 3u);
}

TEST(Terrain, HeightWithinAmplitudeBound) {
  const Terrain t = generate_terrain(5, TerrainParams{});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-150.0, 150.0);
  for (int i = 0; i < 2000; ++i) {
    EXPECT_LE(std::abs(t.height(u(rng), u(rng)) - t.base_depth()), t.amplitude_bound() + 1e-12);
  }
}

TEST(Terrain, GradientMatchesFiniteDifferences) {
  const Terrain t = generate_terrain(7, TerrainParams{});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-140.0, 140.0);
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), y = u(rng);
    const Eigen::Vector2d g = t.gradient(x, y);
    const double gx = (t.height(x + h, y) - t.height(x - h, y)) / (2 * h);
    const double gy = (t.height(x, y + h) - t.height(x, y - h)) / (2 * h);
    EXPECT_NEAR(g.x(), gx, 1e-6);
    EXPECT_NEAR(g.y(), gy, 1e-6);
  }
}

TEST(Terrain, SaveLoadIsExact) {
  const Terrain t = generate_terrain(11, TerrainParams{});
  const auto path = std::filesystem::temp_directory_path() / "svgpmap_terrain_roundtrip.txt";
  save_terrain(path, t);
  const Terrain back = load_terrain(path);
  EXPECT_TRUE(t == back);
  EXPECT_EQ(t.height(12.3, -45.6), back.height(12.3, -45.6));
  std::filesystem::remove(path);
}

TEST(Terrain, LoadRejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "svgpmap_terrain_bad.txt";
  {
    std::ofstream out(path);
    out << "not a terrain\n";
  }
  try {
    load_terrain(path);
    FAIL() << "expected an Io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_terrain(path), Error);
}

TEST(Box, CenteredSubboxArea) {
  const Box b;
  const Box inner = centered_subbox(b, 0.25);
  EXPECT_NEAR(inner.width() * inner.height(), 0.25 * b.width() * b.height(), 1e-9);
  EXPECT_NEAR(inner.center().x(), 0.0, 1e-12);
  EXPECT_THROW(centered_subbox(b, 1.5), Error);
  EXPECT_THROW(centered_subbox(b, -0.1), Error);
  Box bad;
  bad.x_max = bad.x_min;
  EXPECT_THROW(bad.validate(), Error);
}
