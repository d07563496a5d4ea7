#include "floqmem/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace floqmem {

using nlohmann::json;

RunConfig::RunConfig() { bath = BathSpec{0.1, 1.0, 1.0, 2}; }

std::vector<double> RunConfig::amplitudes() const {
  if (!amplitude_range) return {drive.amplitude};
  const auto [lo, hi] = *amplitude_range;
  const long n = std::lround(std::floor((hi - lo) / amplitude_step + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * amplitude_step);
  return out;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.drive = drive;
  s.amplitudes = amplitudes();
  s.step = amplitude_step;
  s.bath = bath;
  s.heom = heom;
  s.floquet = floquet;
  s.n_max = n_max;
  s.analysis = analysis;
  return s;
}

void RunConfig::validate() const {
  try {
    DriveSpec d = drive;
    d.validate();
    bath.validate();
    heom.validate();
    analysis.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (amplitude_range) {
    const auto [lo, hi] = *amplitude_range;
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || hi < lo) {
      throw ConfigError("drive.Omega_range must satisfy 0 <= lo <= hi");
    }
  }
  if (!(amplitude_step > 0.0)) throw ConfigError("drive.step must be > 0");
  if (floquet.time_samples < 4 || floquet.time_samples % 2 != 0) {
    throw ConfigError("floquet.N_t must be even and >= 4");
  }
  if (n_max < 1 || floquet.time_samples < 4 * n_max) throw ConfigError("floquet.N_t must be >= 4 n_max");
  if (!(floquet.tol > 0.0)) throw ConfigError("floquet.tol must be > 0");
  for (const auto& f : output.formats) {
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
  }
  if (output.directory.empty()) throw ConfigError("output.directory is empty");
  if (evolve.solver != "heom" && evolve.solver != "lindblad") {
    throw ConfigError("evolve.solver must be heom or lindblad");
  }
  if (evolve.model != "generic" && evolve.model != "nondegenerate" && evolve.model != "degenerate" &&
      evolve.model != "auto") {
    throw ConfigError("evolve.model must be generic, nondegenerate, degenerate or auto");
  }
  if (!(evolve.t_end > 0.0)) throw ConfigError("evolve.t_end must be > 0");
  if (evolve.c11 && !(*evolve.c11 >= 0.0)) throw ConfigError("evolve.c11 must be >= 0");
  parse_state(evolve.rho0);
}

json RunConfig::to_json() const {
  json j;
  j["drive"] = {{"omega0", drive.omega0},
                {"omega", drive.omega},
                {"Omega", drive.amplitude},
                {"Omega_range", amplitude_range ? json::array({(*amplitude_range)[0], (*amplitude_range)[1]})
                                                : json(nullptr)},
                {"step", amplitude_step}};
  j["bath"] = {{"alpha", bath.alpha}, {"omega_c", bath.omega_c}, {"beta", bath.beta}, {"pade_terms", bath.pade_terms}};
  j["heom"] = {{"tier", heom.tier},
               {"tol", heom.rtol},
               {"atol", heom.atol},
               {"correlation_scale", heom.correlation_scale},
               {"max_ados", heom.max_ados}};
  j["floquet"] = {{"N_t", floquet.time_samples}, {"n_max", n_max}, {"tol", floquet.tol}};
  j["analysis"] = {{"n_pairs", analysis.n_pairs},
                   {"seed", analysis.seed},
                   {"dt_factor", analysis.samples_per_period},
                   {"horizon_factor", analysis.horizon_factor},
                   {"nm_threshold", analysis.nm_threshold},
                   {"fit_threshold", analysis.fit_threshold},
                   {"max_periods", analysis.max_periods}};
  j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
  j["evolve"] = {{"solver", evolve.solver}, {"model", evolve.model}, {"rho0", evolve.rho0}, {"t_end", evolve.t_end},
                 {"c11", evolve.c11 ? json(*evolve.c11) : json(nullptr)}};
  return j;
}

namespace {

void check_keys(const json& given, const json& known, const std::string& prefix) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!known.contains(it.key())) throw ConfigError("unknown configuration key '" + key + "'");
    const json& k = known.at(it.key());
    if (k.is_object()) {
      if (!it.value().is_object()) throw ConfigError("configuration key '" + key + "' must be an object");
      check_keys(it.value(), k, key);
    }
  }
}

template <class T>
T get(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration key '") + section + "." + key + "': " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& given) {
  if (!given.is_object()) throw ConfigError("configuration must be a JSON object");
  const json defaults = RunConfig().to_json();
  check_keys(given, defaults, "");
  json j = defaults;
  j.merge_patch(given);
  // A single amplitude without an explicit range selects a one-point run.
  if (given.contains("drive") && given["drive"].contains("Omega") && !given["drive"].contains("Omega_range")) {
    j["drive"]["Omega_range"] = nullptr;
  }

  RunConfig c;
  c.drive.omega0 = get<double>(j, "drive", "omega0");
  c.drive.omega = get<double>(j, "drive", "omega");
  c.drive.amplitude = get<double>(j, "drive", "Omega");
  if (j["drive"]["Omega_range"].is_null()) {
    c.amplitude_range.reset();
  } else {
    const auto r = get<std::vector<double>>(j, "drive", "Omega_range");
    if (r.size() != 2) throw ConfigError("drive.Omega_range must have two entries");
    c.amplitude_range = std::array<double, 2>{r[0], r[1]};
  }
  c.amplitude_step = get<double>(j, "drive", "step");
  c.bath.alpha = get<double>(j, "bath", "alpha");
  c.bath.omega_c = get<double>(j, "bath", "omega_c");
  c.bath.beta = get<double>(j, "bath", "beta");
  c.bath.pade_terms = get<int>(j, "bath", "pade_terms");
  c.heom.tier = get<int>(j, "heom", "tier");
  c.heom.rtol = get<double>(j, "heom", "tol");
  c.heom.atol = get<double>(j, "heom", "atol");
  c.heom.correlation_scale = get<double>(j, "heom", "correlation_scale");
  c.heom.max_ados = get<std::size_t>(j, "heom", "max_ados");
  c.floquet.time_samples = get<int>(j, "floquet", "N_t");
  c.n_max = get<int>(j, "floquet", "n_max");
  c.floquet.tol = get<double>(j, "floquet", "tol");
  c.analysis.n_pairs = get<int>(j, "analysis", "n_pairs");
  c.analysis.seed = get<std::uint64_t>(j, "analysis", "seed");
  c.analysis.samples_per_period = get<int>(j, "analysis", "dt_factor");
  c.analysis.horizon_factor = get<double>(j, "analysis", "horizon_factor");
  c.analysis.nm_threshold = get<double>(j, "analysis", "nm_threshold");
  c.analysis.fit_threshold = get<double>(j, "analysis", "fit_threshold");
  c.analysis.max_periods = get<int>(j, "analysis", "max_periods");
  c.output.directory = get<std::string>(j, "output", "directory");
  c.output.formats = get<std::vector<std::string>>(j, "output", "formats");
  c.evolve.solver = get<std::string>(j, "evolve", "solver");
  c.evolve.model = get<std::string>(j, "evolve", "model");
  c.evolve.rho0 = j["evolve"]["rho0"];
  c.evolve.t_end = get<double>(j, "evolve", "t_end");
  if (!j["evolve"]["c11"].is_null()) c.evolve.c11 = get<double>(j, "evolve", "c11");
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed configuration " + path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must have the form section.key=value: " + assignment);
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  config[section][key] = value;
}

DensityMatrix parse_state(const json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "e") return DensityMatrix::from_bloch({0.0, 0.0, 1.0});
    if (s == "g") return DensityMatrix::from_bloch({0.0, 0.0, -1.0});
    if (s == "+x") return DensityMatrix::from_bloch({1.0, 0.0, 0.0});
    if (s == "-x") return DensityMatrix::from_bloch({-1.0, 0.0, 0.0});
    if (s == "+y") return DensityMatrix::from_bloch({0.0, 1.0, 0.0});
    if (s == "-y") return DensityMatrix::from_bloch({0.0, -1.0, 0.0});
    throw ConfigError("unknown state name '" + s + "'");
  }
  if (spec.is_array() && spec.size() == 3 && std::all_of(spec.begin(), spec.end(), [](const json& v) {
        return v.is_number();
      })) {
    try {
      return DensityMatrix::from_bloch({spec[0].get<double>(), spec[1].get<double>(), spec[2].get<double>()});
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("invalid initial state: ") + e.what());
    }
  }
  throw ConfigError("initial state must be a name or a Bloch vector [x, y, z]");
}

}  // namespace floqmem
