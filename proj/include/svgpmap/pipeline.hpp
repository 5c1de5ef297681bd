#pragma once

#include "svgpmap/config.hpp"
#include "svgpmap/eval.hpp"
#include "svgpmap/optim.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace svgpmap {

inline constexpr const char* kVersion = "0.3.0";

struct RunManifest {
  std::string command;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, double> stage_seconds;
  Config config;

  bool operator==(const RunManifest& other) const;
};

/// INI text: [manifest] and [stage_seconds] sections followed by the config.
std::string format_manifest(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text);

struct RunOptions {
  Config config;
  std::optional<TrainingMode> mode;  // both modes when empty
  std::ostream* log = nullptr;       // progress lines, none when null
};

/// File names inside the output directory.
namespace files {
inline const char* terrain = "terrain.txt";
inline const char* survey = "survey.bin";
inline const char* trajectory = "trajectory.csv";
inline const char* cloud_dr = "cloud_dr.xyz";
inline const char* cloud_gt = "cloud_gt.xyz";
inline const char* mission = "mission.bin";
std::string dataset(TrainingMode mode);
std::string model(TrainingMode mode);
std::string trace(TrainingMode mode);
std::string grid(TrainingMode mode);
std::string report(TrainingMode mode);
std::string error_grid(TrainingMode mode);
std::string localization(TrainingMode mode);
std::string localization_summary(TrainingMode mode);
std::string manifest(const std::string& command);
}  // namespace files

/// Each command reads its inputs from and writes into config.out_dir, writes
/// manifest_<command>.txt and returns the manifest. Missing inputs raise an
/// Io error naming the path.
RunManifest cmd_simulate(const RunOptions& options);
RunManifest cmd_propagate(const RunOptions& options);
RunManifest cmd_train(const RunOptions& options);
RunManifest cmd_predict(const RunOptions& options);
RunManifest cmd_localize(const RunOptions& options);
RunManifest cmd_evaluate(const RunOptions& options);
RunManifest cmd_experiment(const RunOptions& options);

/// One trained model of the experiment matrix.
struct CellResult {
  double noise = 0.0;
  std::uint64_t seed = 0;
  TrainingMode mode = TrainingMode::DI;
  EvalReport report;
  bool converged = false;
  double train_seconds = 0.0;
  double pf_rmse = 0.0;
  double dr_rmse = 0.0;
  double pf_final_error = 0.0;
  std::size_t pf_degenerate = 0;
  double pf_seconds = 0.0;
};

/// Simulates one survey and mission for (noise, seed), then trains,
/// evaluates and localizes with both input modes from a shared
/// initialization.
std::vector<CellResult> run_cell_pair(const Config& config, double noise, std::uint64_t seed,
                                      std::ostream* log = nullptr);

/// All noise levels x seeds x modes. Seeds are config.seed + k.
std::vector<CellResult> run_experiment(const Config& config, std::ostream* log = nullptr);

struct Quartiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quartiles; throws on an empty sample.
Quartiles quartiles(std::vector<double> values);

void write_experiment_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells);
/// Median and IQR per (noise, mode) for every metric.
void write_experiment_summary_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells);
std::string format_experiment_summary(const std::vector<CellResult>& cells);

}  // namespace svgpmap
