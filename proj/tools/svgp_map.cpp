// svgp_map: simulate, propagate, train, predict, evaluate and localize.
//
// Exit codes: 0 ok, 1 internal, 2 usage, 3 config, 4 io,
// 5 numerical failure, 6 empty data.
#include "svgpmap/errors.hpp"
#include "svgpmap/pipeline.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

namespace {

using svgpmap::ErrorCode;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
      return 3;
    case ErrorCode::Io:
      return 4;
    case ErrorCode::InvalidCovariance:
    case ErrorCode::JitterExhausted:
    case ErrorCode::DivergedTraining:
    case ErrorCode::DegenerateWeights:
      return 5;
    case ErrorCode::EmptyDataset:
    case ErrorCode::EmptyRegion:
      return 6;
    case ErrorCode::InvalidArgument:
      return 2;
  }
  return 1;
}

void fail_line(std::string_view code, const std::string& message) {
  std::string one_line = message;
  for (char& c : one_line) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "ERROR[" << code << "]: " << one_line << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terrain maps from SVGPs trained on uncertain inputs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode_name;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;

  using Command = std::function<svgpmap::RunManifest(const svgpmap::RunOptions&)>;
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"simulate", "Generate terrain, survey and localization mission", svgpmap::cmd_simulate},
      {"propagate", "Build the DI and UI datasets from the survey", svgpmap::cmd_propagate},
      {"train", "Train SVGP maps", svgpmap::cmd_train},
      {"predict", "Predict mean and variance on the evaluation grid", svgpmap::cmd_predict},
      {"evaluate", "Score trained maps against the true terrain", svgpmap::cmd_evaluate},
      {"localize", "Run the particle filter on the mission", svgpmap::cmd_localize},
      {"experiment", "Run the noise x seed x mode matrix", svgpmap::cmd_experiment},
  };

  std::map<const CLI::App*, Command> handlers;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--mode", mode_name, "di or ui (default both)")->check(CLI::IsMember({"di", "ui"}));
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out_dir, "output directory, overrides the config");
    sub->add_flag("--quiet", quiet, "no progress output");
    handlers[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_line("E_USAGE", e.what());
    return 2;
  }

  try {
    svgpmap::RunOptions options;
    if (!config_path.empty()) options.config = svgpmap::load_config(config_path);
    if (seed) options.config.seed = *seed;
    if (!out_dir.empty()) options.config.out_dir = out_dir;
    if (mode_name == "di") options.mode = svgpmap::TrainingMode::DI;
    if (mode_name == "ui") options.mode = svgpmap::TrainingMode::UI;
    if (!quiet) options.log = &std::cout;
    for (const CLI::App* sub : app.get_subcommands()) handlers.at(sub)(options);
  } catch (const svgpmap::Error& e) {
    fail_line(svgpmap::to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    fail_line("E_INTERNAL", e.what());
    return 1;
  }
  return 0;
}
