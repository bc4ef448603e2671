#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nudge/mesh.hpp"

namespace nudge {

enum class Experiment { converge, chi_sweep, decay, cavity, dns_export };

std::string experiment_name(Experiment e);
/// Accepts the subcommand spelling ("chi-sweep"); throws ConfigError("experiment").
Experiment parse_experiment(const std::string& name);

/// Every knob of a run. Defaults depend on the experiment; see default_config.
struct SimConfig {
  Experiment experiment = Experiment::converge;
  int n = 32;
  int coarse_n = 8;
  double dt = 0.125;
  double t_final = 2.0;
  double nu = 1.0;
  double pr = 0.71;
  double ra = 1e4;
  double omega = 1.0;
  double chi = 100.0;
  std::vector<double> chi_list;
  std::vector<double> dt_list;
  std::string boundary = "manufactured";  // manufactured | cavity
  std::string model = "nse-dns";          // dns-export only
  std::string observation_time = "midpoint";
  std::string observations;               // optional snapshot CSV for nudged runs
  double steady_tol = 1e-6;
  Index max_steps = 100000;
  double solver_tol = 1e-10;
  bool refine_check = true;               // cavity: Nusselt under n -> 2n
  std::string out_dir = "out";
  int jobs = 1;
};

SimConfig default_config(Experiment e);

/// Layers `file` and then `overrides` (both JSON objects) over the defaults
/// of the experiment. The experiment comes from `subcommand` when given,
/// else from the "experiment" key of either document. Unknown keys and
/// invalid values throw ConfigError naming the key.
SimConfig parse_config(const nlohmann::json& file, const nlohmann::json& overrides = nlohmann::json::object(),
                       std::optional<Experiment> subcommand = std::nullopt);
SimConfig parse_config_file(const std::string& path, const nlohmann::json& overrides = nlohmann::json::object(),
                            std::optional<Experiment> subcommand = std::nullopt);

/// Converts one command-line value to the JSON type of `key`
/// ("1,0.5" for list keys). Throws ConfigError for unknown keys.
nlohmann::json override_value(const std::string& key, const std::string& text);
/// All keys accepted in a config document.
const std::vector<std::string>& config_keys();

void validate(const SimConfig& c);
nlohmann::json to_json(const SimConfig& c);

}  // namespace nudge
