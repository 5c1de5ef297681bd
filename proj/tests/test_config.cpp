#include "svgpmap/config.hpp"
#include "svgpmap/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace svgpmap;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "test.ini");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const Config c = parse_config("");
  EXPECT_EQ(format_config(c), format_config(Config{}));
}

TEST(Config, FormatParseRoundTrip) {
  Config c;
  c.seed = 17;
  c.out_dir = "runs/a";
  c.terrain.box.x_min = -80.25;
  c.noise.yaw_drift_std = 2e-3;
  c.noise.ekf_rate_std << 0.01, 0.02, 0.03, 1.0 / 3.0, 1e-5, 0.1;
  c.patch_std = 0.3;
  c.inducing_init = InducingInit::Grid;
  c.optim.learning_rate = 0.05;
  c.optim.max_steps = 1234;
  c.pf.resample_every_step = false;
  c.pf.motion_var(5) = 2e-4;
  c.noise_levels = {0.0, 1e-3, 2e-3};
  c.experiment_seeds = 5;
  const std::string text = format_config(c);
  const Config back = parse_config(text);
  EXPECT_EQ(format_config(back), text);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_EQ(back.out_dir, std::filesystem::path("runs/a"));
  EXPECT_EQ(back.noise.ekf_rate_std(3), 1.0 / 3.0);
  EXPECT_EQ(back.inducing_init, InducingInit::Grid);
  EXPECT_FALSE(back.pf.resample_every_step);
  EXPECT_EQ(back.noise_levels, c.noise_levels);
}

TEST(Config, PartialOverrideKeepsOtherDefaults) {
  const Config c = parse_config("[svgp]\nnum_inducing = 64\n\n[optim]\nlearning_rate = 0.2\n");
  EXPECT_EQ(c.num_inducing, 64u);
  EXPECT_EQ(c.optim.learning_rate, 0.2);
  EXPECT_EQ(c.optim.minibatch_size, Config{}.optim.minibatch_size);
  EXPECT_EQ(c.grid_n, Config{}.grid_n);
}

TEST(Config, CommentsAreIgnored) {
  const Config c = parse_config("; top\n[run]\n# seed below\nseed = 9\n");
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, UnknownKeyNamesLine) {
  const std::string msg = config_error("[run]\nseed = 1\n\n[survey]\nspeed = 2\nsped = 3\n");
  EXPECT_NE(msg.find("test.ini:6:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("sped"), std::string::npos) << msg;
}

TEST(Config, UnknownSectionNamesLine) {
  const std::string msg = config_error("[run]\nseed = 1\n[bogus]\nx = 1\n");
  EXPECT_NE(msg.find("test.ini:3:"), std::string::npos) << msg;
}

TEST(Config, BadValueNamesLine) {
  const std::string msg = config_error("[optim]\nbeta1 = 0.9\nmax_steps = lots\n");
  EXPECT_NE(msg.find("test.ini:3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("max_steps"), std::string::npos) << msg;
}

TEST(Config, WrongListLength) {
  const std::string msg = config_error("[survey]\nekf_rate_std = 1 2 3\n");
  EXPECT_NE(msg.find("test.ini:2:"), std::string::npos) << msg;
}

TEST(Config, SyntaxErrorNamesLine) {
  const std::string msg = config_error("[run]\nseed = 1\nthis line has no equals sign\n");
  EXPECT_NE(msg.find("test.ini:3:"), std::string::npos) << msg;
}

TEST(Config, InvalidValuesRejected) {
  config_error("[survey]\nheldout_fraction = 1.5\n");
  config_error("[svgp]\nnum_inducing = 0\n");
  config_error("[optim]\nlearning_rate = -1\n");
  config_error("[pf]\nnum_particles = 0\n");
  config_error("[terrain]\nx_min = 10\nx_max = -10\n");
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "svgpmap_test_config.ini";
  std::ofstream(path) << "[run]\nseed = 42\n";
  EXPECT_EQ(load_config(path).seed, 42u);
  std::filesystem::remove(path);
  try {
    load_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
    EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos);
  }
}
