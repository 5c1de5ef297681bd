#include "svgpmap/config.hpp"

#include "svgpmap/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace svgpmap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number");
  return v;
}

template <typename Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (in >> item) out.push_back(to_double(item));
  return out;
}

std::string format_list(const double* v, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

std::string inducing_name(InducingInit init) {
  switch (init) {
    case InducingInit::Subset: return "subset";
    case InducingInit::Grid: return "grid";
    case InducingInit::KMeans: return "kmeans";
  }
  return "kmeans";
}

struct Binding {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

using Table = std::map<std::string, std::map<std::string, Binding>>;

template <typename T>
Binding real(T Config::*group, double T::*field) {
  return {[=](const Config& c) { return format_double(c.*group.*field); },
          [=](Config& c, const std::string& v) { c.*group.*field = to_double(v); }};
}

Binding real(double Config::*field) {
  return {[=](const Config& c) { return format_double(c.*field); },
          [=](Config& c, const std::string& v) { c.*field = to_double(v); }};
}

template <typename T, typename Int>
Binding integer(T Config::*group, Int T::*field) {
  return {[=](const Config& c) { return std::to_string(c.*group.*field); },
          [=](Config& c, const std::string& v) { c.*group.*field = to_int<Int>(v); }};
}

template <typename T>
Binding flag(T Config::*group, bool T::*field) {
  return {[=](const Config& c) { return std::string(c.*group.*field ? "true" : "false"); },
          [=](Config& c, const std::string& v) { c.*group.*field = to_bool(v); }};
}

template <typename T>
Binding vec6(T Config::*group, Vector6d T::*field) {
  return {[=](const Config& c) { return format_list((c.*group.*field).data(), 6); },
          [=](Config& c, const std::string& v) {
            const std::vector<double> l = to_list(v);
            if (l.size() != 6) throw std::invalid_argument("expected 6 numbers");
            c.*group.*field = Eigen::Map<const Vector6d>(l.data());
          }};
}

Binding box_field(double Box::*field) {
  return {[=](const Config& c) { return format_double(c.terrain.box.*field); },
          [=](Config& c, const std::string& v) { c.terrain.box.*field = to_double(v); }};
}

const Table& table() {
  static const Table t = [] {
    Table t;
    t["run"]["seed"] = {[](const Config& c) { return std::to_string(c.seed); },
                        [](Config& c, const std::string& v) { c.seed = to_int<std::uint64_t>(v); }};
    t["run"]["out_dir"] = {[](const Config& c) { return c.out_dir.string(); },
                           [](Config& c, const std::string& v) { c.out_dir = v; }};

    t["terrain"]["x_min"] = box_field(&Box::x_min);
    t["terrain"]["x_max"] = box_field(&Box::x_max);
    t["terrain"]["y_min"] = box_field(&Box::y_min);
    t["terrain"]["y_max"] = box_field(&Box::y_max);
    t["terrain"]["base_depth"] = real(&Config::terrain, &TerrainParams::base_depth);
    t["terrain"]["n_bumps"] = integer(&Config::terrain, &TerrainParams::n_bumps);
    t["terrain"]["bump_amplitude_min"] = real(&Config::terrain, &TerrainParams::bump_amplitude_min);
    t["terrain"]["bump_amplitude_max"] = real(&Config::terrain, &TerrainParams::bump_amplitude_max);
    t["terrain"]["bump_sigma_min"] = real(&Config::terrain, &TerrainParams::bump_sigma_min);
    t["terrain"]["bump_sigma_max"] = real(&Config::terrain, &TerrainParams::bump_sigma_max);
    t["terrain"]["n_waves"] = integer(&Config::terrain, &TerrainParams::n_waves);
    t["terrain"]["wave_amplitude"] = real(&Config::terrain, &TerrainParams::wave_amplitude);
    t["terrain"]["wavelength_min"] = real(&Config::terrain, &TerrainParams::wavelength_min);
    t["terrain"]["wavelength_max"] = real(&Config::terrain, &TerrainParams::wavelength_max);

    t["survey"]["margin"] = real(&Config::plan, &LawnmowerPlan::margin);
    t["survey"]["line_spacing"] = real(&Config::plan, &LawnmowerPlan::line_spacing);
    t["survey"]["speed"] = real(&Config::plan, &LawnmowerPlan::speed);
    t["survey"]["vehicle_z"] = real(&Config::plan, &LawnmowerPlan::vehicle_z);
    t["survey"]["dt"] = real(&Config::plan, &LawnmowerPlan::dt);
    t["survey"]["ping_every"] = integer(&Config::plan, &LawnmowerPlan::ping_every);
    t["survey"]["yaw_drift_std"] = real(&Config::noise, &SurveyNoise::yaw_drift_std);
    t["survey"]["sensor_std"] = real(&Config::noise, &SurveyNoise::sensor_std);
    t["survey"]["ekf_rate_std"] = vec6(&Config::noise, &SurveyNoise::ekf_rate_std);
    t["survey"]["heldout_fraction"] = real(&Config::heldout_fraction);

    t["mbes"]["n_beams"] = integer(&Config::mbes, &MbesParams::n_beams);
    t["mbes"]["swath_deg"] = real(&Config::mbes, &MbesParams::swath_deg);
    t["mbes"]["max_range"] = real(&Config::mbes, &MbesParams::max_range);
    t["mbes"]["march_step"] = real(&Config::mbes, &MbesParams::march_step);

    t["propagation"]["patch_std"] = real(&Config::patch_std);
    t["propagation"]["kappa"] = real(&Config::kappa);

    t["svgp"]["num_inducing"] = {[](const Config& c) { return std::to_string(c.num_inducing); },
                                 [](Config& c, const std::string& v) { c.num_inducing = to_int<std::size_t>(v); }};
    t["svgp"]["inducing_init"] = {[](const Config& c) { return inducing_name(c.inducing_init); },
                                  [](Config& c, const std::string& v) { c.inducing_init = parse_inducing_init(v); }};

    t["optim"]["learning_rate"] = real(&Config::optim, &OptimConfig::learning_rate);
    t["optim"]["minibatch_size"] = integer(&Config::optim, &OptimConfig::minibatch_size);
    t["optim"]["beta1"] = real(&Config::optim, &OptimConfig::beta1);
    t["optim"]["beta2"] = real(&Config::optim, &OptimConfig::beta2);
    t["optim"]["eps"] = real(&Config::optim, &OptimConfig::eps);
    t["optim"]["ema_window"] = integer(&Config::optim, &OptimConfig::ema_window);
    t["optim"]["ema_rel_tol"] = real(&Config::optim, &OptimConfig::ema_rel_tol);
    t["optim"]["max_steps"] = integer(&Config::optim, &OptimConfig::max_steps);
    t["optim"]["samples_per_input"] = integer(&Config::optim, &OptimConfig::samples_per_input);

    t["eval"]["grid_n"] = {[](const Config& c) { return std::to_string(c.grid_n); },
                           [](Config& c, const std::string& v) { c.grid_n = to_int<int>(v); }};
    t["eval"]["sanity_rmse"] = real(&Config::sanity_rmse);

    t["pf"]["num_particles"] = integer(&Config::pf, &PfConfig::num_particles);
    t["pf"]["motion_var"] = vec6(&Config::pf, &PfConfig::motion_var);
    t["pf"]["depth_noise_var"] = real(&Config::pf, &PfConfig::depth_noise_var);
    t["pf"]["beams_per_ping"] = integer(&Config::pf, &PfConfig::beams_per_ping);
    t["pf"]["ess_fraction"] = real(&Config::pf, &PfConfig::ess_fraction);
    t["pf"]["resample_every_step"] = flag(&Config::pf, &PfConfig::resample_every_step);
    t["pf"]["init_position_std"] = real(&Config::pf, &PfConfig::init_position_std);
    t["pf"]["init_yaw_std"] = real(&Config::pf, &PfConfig::init_yaw_std);

    t["mission"]["length"] = real(&Config::mission, &MissionPlan::length);
    t["mission"]["speed"] = real(&Config::mission, &MissionPlan::speed);
    t["mission"]["dt"] = real(&Config::mission, &MissionPlan::dt);
    t["mission"]["lateral_range"] = real(&Config::mission, &MissionPlan::lateral_range);
    t["mission"]["initial_offset"] = real(&Config::mission, &MissionPlan::initial_offset);
    t["mission"]["vehicle_z"] = real(&Config::mission, &MissionPlan::vehicle_z);

    t["experiment"]["noise_levels"] = {
        [](const Config& c) { return format_list(c.noise_levels.data(), c.noise_levels.size()); },
        [](Config& c, const std::string& v) { c.noise_levels = to_list(v); }};
    t["experiment"]["seeds"] = {[](const Config& c) { return std::to_string(c.experiment_seeds); },
                                [](Config& c, const std::string& v) { c.experiment_seeds = to_int<int>(v); }};
    return t;
  }();
  return t;
}

// Line of `key` inside `[section]` (or of the section header when key is
// empty); 0 when not found.
std::size_t locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section) return no;
      continue;
    }
    const auto eq = t.find('=');
    if (!key.empty() && current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return no;
  }
  return 0;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Config, source + ":" + (line ? std::to_string(line) : std::string("?")) + ": " + what);
}

}  // namespace

void Config::validate() const {
  terrain.box.validate();
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) {
    throw Error(ErrorCode::Config, "survey.heldout_fraction must be in [0, 1)");
  }
  if (!(patch_std >= 0.0)) throw Error(ErrorCode::Config, "propagation.patch_std must be >= 0");
  if (!(noise.yaw_drift_std >= 0.0) || !(noise.sensor_std >= 0.0)) {
    throw Error(ErrorCode::Config, "survey noise levels must be >= 0");
  }
  if (num_inducing < 1) throw Error(ErrorCode::Config, "svgp.num_inducing must be >= 1");
  if (grid_n < 1) throw Error(ErrorCode::Config, "eval.grid_n must be >= 1");
  if (experiment_seeds < 1) throw Error(ErrorCode::Config, "experiment.seeds must be >= 1");
  for (double n : noise_levels) {
    if (!(n >= 0.0)) throw Error(ErrorCode::Config, "experiment.noise_levels must be >= 0");
  }
  optim.validate();
  pf.validate();
}

Config parse_config(const std::string& text, const std::string& source) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(source, e.line(), e.message());
  }
  Config c;
  for (const auto& [section, keys] : tree) {
    const auto sec = table().find(section);
    if (keys.empty() && !keys.data().empty()) {
      fail(source, locate(text, "", section), "key '" + section + "' must be inside a section");
    }
    if (sec == table().end()) fail(source, locate(text, section, ""), "unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const auto b = sec->second.find(key);
      if (b == sec->second.end()) fail(source, locate(text, section, key), "unknown key " + section + "." + key);
      try {
        b->second.set(c, trim(value.data()));
      } catch (const std::exception& e) {
        fail(source, locate(text, section, key),
             "bad value for " + section + "." + key + " '" + value.data() + "': " + e.what());
      }
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, source + ": " + e.what());
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const Config& config) {
  std::string out;
  for (const char* section : {"run", "terrain", "survey", "mbes", "propagation", "svgp", "optim", "eval", "pf",
                              "mission", "experiment"}) {
    if (!out.empty()) out += '\n';
    out += std::string("[") + section + "]\n";
    for (const auto& [key, b] : table().at(section)) out += key + " = " + b.get(config) + '\n';
  }
  return out;
}

}  // namespace svgpmap
