#pragma once

#include "floqmem/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace floqmem {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct OutputSettings {
  std::string directory = "floqmem-out";
  std::vector<std::string> formats{"csv", "json"};
};

struct EvolveSettings {
  std::string solver = "heom";    // heom | lindblad
  std::string model = "generic";  // generic | nondegenerate | degenerate | auto
  nlohmann::json rho0 = "e";      // named state or Bloch vector [x, y, z]
  double t_end = 100.0;
  std::optional<double> c11;      // reduced models: |c^1_11|, computed when unset
};

// Resolved run configuration. Defaults reproduce the resonant parameter set
// kT = 1, alpha = 0.1, omega_c = 1.
struct RunConfig {
  DriveSpec drive;
  std::optional<std::array<double, 2>> amplitude_range = std::array<double, 2>{0.5, 9.5};
  double amplitude_step = 0.1;
  BathSpec bath;
  HeomSettings heom;
  FloquetOptions floquet;
  int n_max = 32;
  AnalysisSettings analysis;
  OutputSettings output;
  EvolveSettings evolve;

  RunConfig();

  // Omega grid: the range sampled with the step, or the single amplitude.
  std::vector<double> amplitudes() const;
  SweepConfig sweep_config() const;
  void validate() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

RunConfig load_config(const std::filesystem::path& path);

// Applies "section.key=value" overrides; value is parsed as JSON when
// possible and kept as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Named initial states e, g, +x, -x, +y, -y or a Bloch vector.
DensityMatrix parse_state(const nlohmann::json& spec);

}  // namespace floqmem
