#include "svgpmap/pipeline.hpp"

#include "svgpmap/errors.hpp"
#include "svgpmap/rng.hpp"
#include "svgpmap/survey_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace svgpmap {

namespace files {
namespace {
std::string tagged(const char* stem, TrainingMode mode, const char* ext) {
  return std::string(stem) + "_" + std::string(to_string(mode)) + ext;
}
}  // namespace
std::string dataset(TrainingMode mode) { return tagged("dataset", mode, ".bin"); }
std::string model(TrainingMode mode) { return tagged("model", mode, ".bin"); }
std::string trace(TrainingMode mode) { return tagged("trace", mode, ".csv"); }
std::string grid(TrainingMode mode) { return tagged("grid", mode, ".csv"); }
std::string report(TrainingMode mode) { return tagged("report", mode, ".txt"); }
std::string error_grid(TrainingMode mode) { return tagged("error_grid", mode, ".csv"); }
std::string localization(TrainingMode mode) { return tagged("localization", mode, ".csv"); }
std::string localization_summary(TrainingMode mode) { return tagged("localization", mode, ".txt"); }
std::string manifest(const std::string& command) { return "manifest_" + command + ".txt"; }
}  // namespace files

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << std::endl;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& s : items) out += (out.empty() ? "" : " ") + s;
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<TrainingMode> modes_of(const RunOptions& o) {
  if (o.mode) return {*o.mode};
  return {TrainingMode::DI, TrainingMode::UI};
}

class Stage {
 public:
  Stage(const RunOptions& options, std::string command) : options_(options) {
    options_.config.validate();
    manifest_.command = std::move(command);
    manifest_.seed = options_.config.seed;
    manifest_.config = options_.config;
    std::filesystem::create_directories(dir());
  }

  const Config& config() const { return options_.config; }
  std::ostream* log() const { return options_.log; }
  std::filesystem::path dir() const { return options_.config.out_dir; }

  std::filesystem::path input(const std::string& name) {
    const std::filesystem::path p = dir() / name;
    if (!std::filesystem::exists(p)) {
      throw Error(ErrorCode::Io, "missing input " + p.string() + " (run the upstream command first)");
    }
    manifest_.inputs.push_back(p.string());
    return p;
  }

  std::filesystem::path output(const std::string& name) {
    const std::filesystem::path p = dir() / name;
    manifest_.outputs.push_back(p.string());
    return p;
  }

  template <typename F>
  auto timed(const std::string& name, F&& f) {
    const auto start = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      manifest_.stage_seconds[name] = seconds_since(start);
    } else {
      auto r = f();
      manifest_.stage_seconds[name] = seconds_since(start);
      return r;
    }
  }

  RunManifest finish() {
    const std::filesystem::path p = dir() / files::manifest(manifest_.command);
    manifest_.outputs.push_back(p.string());
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write manifest " + p.string());
    out << format_manifest(manifest_);
    out.close();
    for (const std::string& o : manifest_.outputs) {
      if (!std::filesystem::exists(o)) throw Error(ErrorCode::Io, "expected output missing: " + o);
    }
    say(log(), manifest_.command + ": wrote " + std::to_string(manifest_.outputs.size()) + " files to " +
                   dir().string());
    return manifest_;
  }

 private:
  RunOptions options_;
  RunManifest manifest_;
};

SurveyNoise noise_at(const Config& c, double yaw) {
  SurveyNoise n = c.noise;
  n.yaw_drift_std = yaw;
  return n;
}

Survey load_survey(Stage& s, Terrain& terrain) {
  terrain = load_terrain(s.input(files::terrain));
  return load_survey_binary(s.input(files::survey), terrain);
}

Dataset training_split(Stage& s, const Survey& survey, TrainingMode mode) {
  const SplitMasks masks = split_survey(survey, s.config().heldout_fraction);
  return select(load_dataset(s.input(files::dataset(mode))), masks.train);
}

// Both modes start from the model initialized on the DI training split.
SvgpModel initial_model(const Config& c, const Dataset& di_train) {
  return init_model(di_train, c.num_inducing, c.inducing_init, derive_seed(c.seed, Stream::InducingInit));
}

std::size_t count_trace_steps(const std::filesystem::path& trace) {
  std::ifstream in(trace);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  return rows > 0 ? rows - 1 : 0;
}

std::string format_localization(const LocalizationResult& r) {
  std::ostringstream out;
  out << std::setprecision(10) << "{\n"
      << "  \"rmse_pf\": " << r.rmse_pf() << ",\n"
      << "  \"rmse_dr\": " << r.rmse_dr() << ",\n"
      << "  \"final_error_pf\": " << r.final_error_pf() << ",\n"
      << "  \"steps\": " << r.steps.size() << ",\n"
      << "  \"degenerate\": " << r.degenerate_count << "\n}\n";
  return out.str();
}

}  // namespace

bool RunManifest::operator==(const RunManifest& other) const {
  return command == other.command && version == other.version && seed == other.seed && inputs == other.inputs &&
         outputs == other.outputs && stage_seconds == other.stage_seconds &&
         format_config(config) == format_config(other.config);
}

std::string format_manifest(const RunManifest& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "[manifest]\n"
      << "command = " << m.command << '\n'
      << "version = " << m.version << '\n'
      << "seed = " << m.seed << '\n'
      << "inputs = " << join(m.inputs) << '\n'
      << "outputs = " << join(m.outputs) << "\n\n[stage_seconds]\n";
  for (const auto& [stage, s] : m.stage_seconds) out << stage << " = " << s << '\n';
  out << '\n' << format_config(m.config);
  return out.str();
}

RunManifest parse_manifest(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::Io, "manifest:" + std::to_string(e.line()) + ": " + e.message());
  }
  RunManifest m;
  const auto& head = tree.get_child("manifest");
  m.command = head.get<std::string>("command");
  m.version = head.get<std::string>("version");
  m.seed = head.get<std::uint64_t>("seed");
  m.inputs = split_words(head.get<std::string>("inputs", ""));
  m.outputs = split_words(head.get<std::string>("outputs", ""));
  for (const auto& [k, v] : tree.get_child("stage_seconds")) m.stage_seconds[k] = std::stod(v.data());

  // The rest is the config snapshot.
  std::ostringstream rest;
  for (const auto& [section, keys] : tree) {
    if (section == "manifest" || section == "stage_seconds") continue;
    rest << '[' << section << "]\n";
    for (const auto& [k, v] : keys) rest << k << " = " << v.data() << '\n';
  }
  m.config = parse_config(rest.str(), "manifest");
  return m;
}

RunManifest cmd_simulate(const RunOptions& options) {
  Stage s(options, "simulate");
  const Config& c = s.config();
  const Terrain terrain = s.timed("terrain", [&] { return generate_terrain(c.seed, c.terrain); });
  const Survey survey = s.timed("survey", [&] { return simulate_survey(terrain, c.plan, c.mbes, c.noise, c.seed); });
  say(s.log(), "simulate: " + std::to_string(survey.pings.size()) + " pings, " + std::to_string(survey.beam_count()) +
                   " beams (" + std::to_string(survey.stats.beams_dropped) + " dropped)");
  const Survey mission = s.timed("mission", [&] { return simulate_mission(terrain, c.mission, c.mbes, c.noise, c.seed); });
  s.timed("write", [&] {
    save_terrain(s.output(files::terrain), terrain);
    save_survey_binary(s.output(files::survey), survey);
    write_trajectory_csv(s.output(files::trajectory), survey);
    save_point_cloud(s.output(files::cloud_dr), survey.cloud(false));
    save_point_cloud(s.output(files::cloud_gt), survey.cloud(true));
    save_survey_binary(s.output(files::mission), mission);
  });
  return s.finish();
}

RunManifest cmd_propagate(const RunOptions& options) {
  Stage s(options, "propagate");
  const Config& c = s.config();
  Terrain terrain;
  const Survey survey = load_survey(s, terrain);
  for (const TrainingMode mode : {TrainingMode::DI, TrainingMode::UI}) {
    const InputMode im = mode == TrainingMode::UI ? InputMode::UI : InputMode::DI;
    const Dataset d = s.timed(std::string("build_") + std::string(to_string(mode)),
                              [&] { return build_dataset(survey, im, c.patch_std, c.kappa); });
    save_dataset(s.output(files::dataset(mode)), d);
  }
  return s.finish();
}

RunManifest cmd_train(const RunOptions& options) {
  Stage s(options, "train");
  const Config& c = s.config();
  Terrain terrain;
  const Survey survey = load_survey(s, terrain);
  const Dataset di_train = training_split(s, survey, TrainingMode::DI);
  const SvgpModel start = s.timed("init", [&] { return initial_model(c, di_train); });
  for (const TrainingMode mode : modes_of(options)) {
    const Dataset train_set = mode == TrainingMode::DI ? di_train : training_split(s, survey, mode);
    OptimConfig oc = c.optim;
    oc.seed = c.seed;
    say(s.log(), "train " + std::string(to_string(mode)) + ": " + std::to_string(train_set.size()) + " inputs, " +
                     std::to_string(c.num_inducing) + " inducing points");
    const TrainResult r =
        s.timed(std::string("train_") + std::string(to_string(mode)), [&] { return train(start, train_set, oc, mode); });
    say(s.log(), "train " + std::string(to_string(mode)) + ": " + std::to_string(r.trace.steps) + " steps" +
                     (r.trace.converged ? " (converged)" : " (step limit)"));
    save_model(s.output(files::model(mode)), r.model);
    write_trace_csv(s.output(files::trace(mode)), r.trace);
  }
  return s.finish();
}

RunManifest cmd_predict(const RunOptions& options) {
  Stage s(options, "predict");
  const Config& c = s.config();
  const Terrain terrain = load_terrain(s.input(files::terrain));
  const Points2 centers = grid_centers(terrain.box(), c.grid_n);
  for (const TrainingMode mode : modes_of(options)) {
    const PredictiveCache cache(load_model(s.input(files::model(mode))));
    const Prediction p = s.timed(std::string("predict_") + std::string(to_string(mode)), [&] { return predict(cache, centers); });
    std::ofstream out(s.output(files::grid(mode)), std::ios::trunc);
    out << "cell_x,cell_y,mean,variance\n" << std::setprecision(17);
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      out << centers(k, 0) << ',' << centers(k, 1) << ',' << p.mean(k) << ',' << p.variance(k) << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing prediction grid");
  }
  return s.finish();
}

RunManifest cmd_evaluate(const RunOptions& options) {
  Stage s(options, "evaluate");
  const Config& c = s.config();
  const Terrain terrain = load_terrain(s.input(files::terrain));
  for (const TrainingMode mode : modes_of(options)) {
    const PredictiveCache cache(load_model(s.input(files::model(mode))));
    s.input(files::grid(mode));
    EvalReport r = s.timed(std::string("evaluate_") + std::string(to_string(mode)),
                           [&] { return evaluate(cache, terrain, c.heldout_fraction, c.grid_n); });
    r.steps = count_trace_steps(s.input(files::trace(mode)));
    write_report(s.output(files::report(mode)), r);
    const GridMasks masks = grid_masks(terrain.box(), c.heldout_fraction, c.grid_n);
    std::vector<bool> all(masks.train.size(), true);
    write_error_grid_csv(s.output(files::error_grid(mode)), consistency_error(cache, terrain, all, c.grid_n));
    say(s.log(), "evaluate " + std::string(to_string(mode)) + ": rmse_train " + std::to_string(r.errors.rmse_train) +
                     ", rmse_heldout " + std::to_string(r.errors.rmse_heldout));
  }
  return s.finish();
}

RunManifest cmd_localize(const RunOptions& options) {
  Stage s(options, "localize");
  const Config& c = s.config();
  const Terrain terrain = load_terrain(s.input(files::terrain));
  const Survey mission = load_survey_binary(s.input(files::mission), terrain);
  for (const TrainingMode mode : modes_of(options)) {
    const PredictiveCache cache(load_model(s.input(files::model(mode))));
    PfConfig pc = c.pf;
    pc.seed = c.seed;
    const LocalizationResult r =
        s.timed(std::string("localize_") + std::string(to_string(mode)), [&] { return run_localization(mission, cache, pc); });
    if (r.degenerate_count > 0) {
      say(s.log(), "localize " + std::string(to_string(mode)) + ": " + std::to_string(r.degenerate_count) +
                       " degenerate weight updates reset to uniform");
    }
    write_localization_csv(s.output(files::localization(mode)), r);
    std::ofstream out(s.output(files::localization_summary(mode)), std::ios::trunc);
    out << format_localization(r);
    say(s.log(), "localize " + std::string(to_string(mode)) + ": pf rmse " + std::to_string(r.rmse_pf()) + ", dr rmse " +
                     std::to_string(r.rmse_dr()));
  }
  return s.finish();
}

std::vector<CellResult> run_cell_pair(const Config& config, double noise, std::uint64_t seed, std::ostream* log) {
  Config c = config;
  c.seed = seed;
  c.noise = noise_at(config, noise);
  const Terrain terrain = generate_terrain(seed, c.terrain);
  const Survey survey = simulate_survey(terrain, c.plan, c.mbes, c.noise, seed);
  const SplitMasks masks = split_survey(survey, c.heldout_fraction);
  const Dataset di = select(build_dataset(survey, InputMode::DI, c.patch_std, c.kappa), masks.train);
  const Dataset ui = select(build_dataset(survey, InputMode::UI, c.patch_std, c.kappa), masks.train);
  const SvgpModel start = initial_model(c, di);
  const Survey mission = simulate_mission(terrain, c.mission, c.mbes, c.noise, seed);

  std::vector<CellResult> out;
  for (const TrainingMode mode : {TrainingMode::DI, TrainingMode::UI}) {
    OptimConfig oc = c.optim;
    oc.seed = seed;
    const TrainResult tr = train(start, mode == TrainingMode::DI ? di : ui, oc, mode);
    const PredictiveCache cache(tr.model);
    CellResult r;
    r.noise = noise;
    r.seed = seed;
    r.mode = mode;
    r.report = evaluate(cache, terrain, c.heldout_fraction, c.grid_n);
    r.report.steps = tr.trace.steps;
    r.converged = tr.trace.converged;
    r.train_seconds = tr.trace.wall_time_s;
    PfConfig pc = c.pf;
    pc.seed = seed;
    const auto pf_start = Clock::now();
    const LocalizationResult lr = run_localization(mission, cache, pc);
    r.pf_seconds = seconds_since(pf_start);
    r.pf_rmse = lr.rmse_pf();
    r.dr_rmse = lr.rmse_dr();
    r.pf_final_error = lr.final_error_pf();
    r.pf_degenerate = lr.degenerate_count;
    std::ostringstream line;
    line << std::setprecision(4) << "noise " << noise << " seed " << seed << ' ' << to_string(mode) << ": steps "
         << r.report.steps << (r.converged ? "" : "*") << ", rmse_train " << r.report.errors.rmse_train
         << ", rmse_heldout " << r.report.errors.rmse_heldout << ", var_heldout " << r.report.variance.mean_var_heldout
         << ", pf " << r.pf_rmse << " (dr " << r.dr_rmse << "), " << r.train_seconds << " s";
    say(log, line.str());
    out.push_back(r);
  }
  return out;
}

std::vector<CellResult> run_experiment(const Config& config, std::ostream* log) {
  config.validate();
  std::vector<CellResult> cells;
  for (const double noise : config.noise_levels) {
    for (int k = 0; k < config.experiment_seeds; ++k) {
      const auto pair = run_cell_pair(config, noise, config.seed + static_cast<std::uint64_t>(k), log);
      cells.insert(cells.end(), pair.begin(), pair.end());
    }
  }
  return cells;
}

Quartiles quartiles(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, "quartiles of an empty sample");
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

namespace {

struct Metric {
  const char* name;
  double (*get)(const CellResult&);
};

const std::vector<Metric>& metrics() {
  static const std::vector<Metric> m = {
      {"rmse_train", [](const CellResult& c) { return c.report.errors.rmse_train; }},
      {"rmse_heldout", [](const CellResult& c) { return c.report.errors.rmse_heldout; }},
      {"rmse_all", [](const CellResult& c) { return c.report.errors.rmse_all; }},
      {"rmse_heldout_subtracted", [](const CellResult& c) { return c.report.errors.rmse_heldout_subtracted; }},
      {"trace_kss", [](const CellResult& c) { return c.report.variance.trace_kss; }},
      {"mean_var_train", [](const CellResult& c) { return c.report.variance.mean_var_train; }},
      {"mean_var_heldout", [](const CellResult& c) { return c.report.variance.mean_var_heldout; }},
      {"steps", [](const CellResult& c) { return static_cast<double>(c.report.steps); }},
      {"pf_rmse", [](const CellResult& c) { return c.pf_rmse; }},
      {"dr_rmse", [](const CellResult& c) { return c.dr_rmse; }},
      {"pf_final_error", [](const CellResult& c) { return c.pf_final_error; }},
  };
  return m;
}

std::vector<std::pair<double, TrainingMode>> groups(const std::vector<CellResult>& cells) {
  std::vector<std::pair<double, TrainingMode>> g;
  for (const CellResult& c : cells) {
    const std::pair<double, TrainingMode> key{c.noise, c.mode};
    if (std::find(g.begin(), g.end(), key) == g.end()) g.push_back(key);
  }
  return g;
}

std::vector<double> column(const std::vector<CellResult>& cells, double noise, TrainingMode mode, const Metric& m) {
  std::vector<double> v;
  for (const CellResult& c : cells) {
    if (c.noise == noise && c.mode == mode) v.push_back(m.get(c));
  }
  return v;
}

}  // namespace

void write_experiment_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "noise,seed,mode,converged";
  for (const Metric& m : metrics()) out << ',' << m.name;
  out << ",pf_degenerate\n" << std::setprecision(12);
  for (const CellResult& c : cells) {
    out << c.noise << ',' << c.seed << ',' << to_string(c.mode) << ',' << (c.converged ? 1 : 0);
    for (const Metric& m : metrics()) out << ',' << m.get(c);
    out << ',' << c.pf_degenerate << '\n';
  }
}

void write_experiment_summary_csv(const std::filesystem::path& path, const std::vector<CellResult>& cells) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "noise,mode,runs,metric,median,iqr\n" << std::setprecision(12);
  for (const auto& [noise, mode] : groups(cells)) {
    for (const Metric& m : metrics()) {
      const std::vector<double> v = column(cells, noise, mode, m);
      const Quartiles q = quartiles(v);
      out << noise << ',' << to_string(mode) << ',' << v.size() << ',' << m.name << ',' << q.median << ',' << q.iqr()
          << '\n';
    }
  }
}

std::string format_experiment_summary(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << std::fixed;
  out << "noise     mode  runs  conv  rmse_train       rmse_heldout     var_heldout        steps          pf_rmse"
         "          dr_rmse\n";
  for (const auto& [noise, mode] : groups(cells)) {
    std::size_t runs = 0, conv = 0;
    for (const CellResult& c : cells) {
      if (c.noise == noise && c.mode == mode) {
        ++runs;
        conv += c.converged;
      }
    }
    out << std::setprecision(4) << std::setw(8) << noise << "  " << std::setw(4) << to_string(mode) << "  "
        << std::setw(4) << runs << "  " << std::setw(4) << conv;
    for (const char* name : {"rmse_train", "rmse_heldout", "mean_var_heldout", "steps", "pf_rmse", "dr_rmse"}) {
      const Metric& m = *std::find_if(metrics().begin(), metrics().end(),
                                      [&](const Metric& x) { return std::string(x.name) == name; });
      const Quartiles q = quartiles(column(cells, noise, mode, m));
      std::ostringstream cell;
      cell << std::setprecision(name == std::string("steps") ? 0 : 4) << std::fixed << q.median << " [" << q.iqr()
           << "]";
      out << "  " << std::left << std::setw(15) << cell.str() << std::right;
    }
    out << '\n';
  }
  out << "values are median [IQR] over seeds\n";
  return out.str();
}

RunManifest cmd_experiment(const RunOptions& options) {
  Stage s(options, "experiment");
  const std::vector<CellResult> cells = s.timed("matrix", [&] { return run_experiment(s.config(), s.log()); });
  write_experiment_csv(s.output("experiment.csv"), cells);
  write_experiment_summary_csv(s.output("experiment_summary.csv"), cells);
  const std::string summary = format_experiment_summary(cells);
  std::ofstream(s.output("experiment_summary.txt"), std::ios::trunc) << summary;
  say(s.log(), summary);
  return s.finish();
}

}  // namespace svgpmap
