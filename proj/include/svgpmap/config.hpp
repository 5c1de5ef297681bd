#pragma once

#include "svgpmap/optim.hpp"
#include "svgpmap/pf.hpp"
#include "svgpmap/survey.hpp"
#include "svgpmap/terrain.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace svgpmap {

/// Every tunable of the pipeline. Defaults are the desk-scale setup.
struct Config {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  TerrainParams terrain;
  LawnmowerPlan plan;
  MbesParams mbes;
  SurveyNoise noise = [] {
    SurveyNoise n;
    n.yaw_drift_std = 1e-3;
    return n;
  }();
  double heldout_fraction = 0.25;

  double patch_std = 0.1;  // m, isotropic seabed patch std
  double kappa = kDefaultKappa;

  std::size_t num_inducing = 200;
  InducingInit inducing_init = InducingInit::KMeans;
  OptimConfig optim = [] {
    OptimConfig o;
    o.minibatch_size = 1000;
    o.ema_rel_tol = 1e-3;
    o.max_steps = 3000;
    return o;
  }();

  int grid_n = 100;
  double sanity_rmse = 0.1;  // m, noiseless-run bound on rmse_train

  PfConfig pf = [] {
    PfConfig p;
    p.resample_every_step = true;
    return p;
  }();
  MissionPlan mission;

  std::vector<double> noise_levels = {1e-3, 2e-3};
  int experiment_seeds = 10;

  void validate() const;
};

/// Parses the INI-style `key = value` text. Unknown sections or keys and bad
/// values raise a Config error naming the line.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::filesystem::path& path);

/// Full INI text of `config`; parse_config(format_config(c)) == c.
std::string format_config(const Config& config);

}  // namespace svgpmap
