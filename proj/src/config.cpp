#include "nudge/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "nudge/error.hpp"

namespace nudge {

namespace {

using nlohmann::json;

enum class KeyType { integer, number, number_list, text, boolean };

const std::map<std::string, KeyType>& key_types() {
  static const std::map<std::string, KeyType> types = {
      {"experiment", KeyType::text},     {"n", KeyType::integer},
      {"coarse_n", KeyType::integer},    {"dt", KeyType::number},
      {"t_final", KeyType::number},      {"nu", KeyType::number},
      {"pr", KeyType::number},           {"ra", KeyType::number},
      {"omega", KeyType::number},        {"chi", KeyType::number},
      {"chi_list", KeyType::number_list}, {"dt_list", KeyType::number_list},
      {"boundary", KeyType::text},       {"model", KeyType::text},
      {"observation_time", KeyType::text}, {"observations", KeyType::text},
      {"steady_tol", KeyType::number},   {"max_steps", KeyType::integer},
      {"solver_tol", KeyType::number},   {"refine_check", KeyType::boolean},
      {"out_dir", KeyType::text},        {"jobs", KeyType::integer},
  };
  return types;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, fmt::format("'{}' is not a number", text));
  return v;
}

template <class T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, fmt::format("unexpected value {}", doc.dump()));
  }
}

template <class T>
T get_integer(const json& doc, const std::string& key) {
  if (doc.is_number_integer()) return doc.get<T>();
  if (doc.is_number_float() && doc.get<double>() == std::floor(doc.get<double>())) return static_cast<T>(doc.get<double>());
  throw ConfigError(key, fmt::format("expected an integer, got {}", doc.dump()));
}

void apply(SimConfig& c, const std::string& key, const json& v) {
  if (key == "experiment") {
    // Resolved before the defaults; the subcommand wins over the file.
    parse_experiment(get_as<std::string>(v, key));
  } else if (key == "n") c.n = get_integer<int>(v, key);
  else if (key == "coarse_n") c.coarse_n = get_integer<int>(v, key);
  else if (key == "dt") c.dt = get_as<double>(v, key);
  else if (key == "t_final") c.t_final = get_as<double>(v, key);
  else if (key == "nu") c.nu = get_as<double>(v, key);
  else if (key == "pr") c.pr = get_as<double>(v, key);
  else if (key == "ra") c.ra = get_as<double>(v, key);
  else if (key == "omega") c.omega = get_as<double>(v, key);
  else if (key == "chi") c.chi = get_as<double>(v, key);
  else if (key == "chi_list") c.chi_list = get_as<std::vector<double>>(v, key);
  else if (key == "dt_list") c.dt_list = get_as<std::vector<double>>(v, key);
  else if (key == "boundary") c.boundary = get_as<std::string>(v, key);
  else if (key == "model") c.model = get_as<std::string>(v, key);
  else if (key == "observation_time") c.observation_time = get_as<std::string>(v, key);
  else if (key == "observations") c.observations = get_as<std::string>(v, key);
  else if (key == "steady_tol") c.steady_tol = get_as<double>(v, key);
  else if (key == "max_steps") c.max_steps = get_integer<Index>(v, key);
  else if (key == "solver_tol") c.solver_tol = get_as<double>(v, key);
  else if (key == "refine_check") c.refine_check = get_as<bool>(v, key);
  else if (key == "out_dir") c.out_dir = get_as<std::string>(v, key);
  else if (key == "jobs") c.jobs = get_integer<int>(v, key);
  else throw ConfigError(key, "unknown key");
}

void check_object(const json& doc, const char* what) {
  if (!doc.is_object()) throw ConfigError(what, "expected a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!key_types().count(key)) throw ConfigError(key, "unknown key");
}

std::optional<Experiment> experiment_of(const json& doc) {
  if (!doc.contains("experiment")) return std::nullopt;
  return parse_experiment(get_as<std::string>(doc["experiment"], "experiment"));
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, fmt::format("must be positive, got {}", v));
}

}  // namespace

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::converge: return "converge";
    case Experiment::chi_sweep: return "chi-sweep";
    case Experiment::decay: return "decay";
    case Experiment::cavity: return "cavity";
    case Experiment::dns_export: return "dns-export";
  }
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::converge, Experiment::chi_sweep, Experiment::decay, Experiment::cavity,
                       Experiment::dns_export})
    if (experiment_name(e) == name) return e;
  throw ConfigError("experiment", fmt::format("unknown experiment '{}'", name));
}

SimConfig default_config(Experiment e) {
  SimConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::converge:
      c.dt_list = {1.0, 0.5, 0.25, 0.125, 0.0625};
      break;
    case Experiment::chi_sweep:
      c.n = 16;
      c.dt = 0.0625;
      c.chi_list = {1e1, 1e2, 1e3, 1e4, 1e5};
      break;
    case Experiment::decay:
      c.n = 16;
      c.dt = 5e-4;
      c.t_final = 0.25;
      c.omega = 0.0;
      c.chi_list = {1e1, 1e2, 1e3};
      break;
    case Experiment::cavity:
      c.dt = 1e-3;
      c.omega = 5e6;
      c.boundary = "cavity";
      c.chi_list = {1.0, 1e2, 1e4, 1e6};
      c.max_steps = 20000;
      break;
    case Experiment::dns_export:
      c.dt = 0.0625;
      break;
  }
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, t] : key_types()) out.push_back(k);
    return out;
  }();
  return keys;
}

nlohmann::json override_value(const std::string& key, const std::string& text) {
  const auto it = key_types().find(key);
  if (it == key_types().end()) throw ConfigError(key, "unknown key");
  switch (it->second) {
    case KeyType::integer: {
      const double v = parse_number(key, text);
      if (v != std::floor(v)) throw ConfigError(key, fmt::format("'{}' is not an integer", text));
      return static_cast<std::int64_t>(v);
    }
    case KeyType::number:
      return parse_number(key, text);
    case KeyType::number_list: {
      json list = json::array();
      std::size_t start = 0;
      while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        list.push_back(parse_number(key, text.substr(start, comma - start)));
        start = comma + 1;
      }
      return list;
    }
    case KeyType::boolean:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw ConfigError(key, fmt::format("'{}' is not a boolean", text));
    case KeyType::text:
      return text;
  }
  return text;
}

SimConfig parse_config(const json& file, const json& overrides, std::optional<Experiment> subcommand) {
  check_object(file, "config");
  check_object(overrides, "overrides");
  std::optional<Experiment> e = subcommand;
  if (!e) e = experiment_of(overrides);
  if (!e) e = experiment_of(file);
  if (!e) throw ConfigError("experiment", "no experiment given");
  SimConfig c = default_config(*e);
  for (const auto& [key, value] : file.items()) apply(c, key, value);
  for (const auto& [key, value] : overrides.items()) apply(c, key, value);
  validate(c);
  return c;
}

SimConfig parse_config_file(const std::string& path, const json& overrides, std::optional<Experiment> subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", fmt::format("cannot open '{}'", path));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError("config", fmt::format("'{}': {}", path, err.what()));
  }
  return parse_config(doc, overrides, subcommand);
}

void validate(const SimConfig& c) {
  if (c.n < 1) throw ConfigError("n", fmt::format("must be >= 1, got {}", c.n));
  if (c.coarse_n < 1) throw ConfigError("coarse_n", fmt::format("must be >= 1, got {}", c.coarse_n));
  if (c.coarse_n > c.n) throw ConfigError("coarse_n", "coarse mesh finer than the fine mesh");
  require_positive(c.dt, "dt");
  require_positive(c.t_final, "t_final");
  require_positive(c.nu, "nu");
  require_positive(c.pr, "pr");
  require_positive(c.ra, "ra");
  if (!(c.omega >= 0.0) || !std::isfinite(c.omega)) throw ConfigError("omega", "must be >= 0");
  if (!(c.chi >= 0.0) || !std::isfinite(c.chi)) throw ConfigError("chi", "must be >= 0");
  for (double chi : c.chi_list)
    if (!(chi > 0.0) || !std::isfinite(chi)) throw ConfigError("chi_list", fmt::format("entries must be positive, got {}", chi));
  for (double dt : c.dt_list)
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt_list", fmt::format("entries must be positive, got {}", dt));
  if (c.boundary != "manufactured" && c.boundary != "cavity")
    throw ConfigError("boundary", fmt::format("expected manufactured or cavity, got '{}'", c.boundary));
  if (c.model != "nse-dns" && c.model != "boussinesq-dns")
    throw ConfigError("model", fmt::format("expected nse-dns or boussinesq-dns, got '{}'", c.model));
  if (c.observation_time != "midpoint" && c.observation_time != "average")
    throw ConfigError("observation_time", fmt::format("expected midpoint or average, got '{}'", c.observation_time));
  require_positive(c.steady_tol, "steady_tol");
  if (c.max_steps < 1) throw ConfigError("max_steps", "must be >= 1");
  require_positive(c.solver_tol, "solver_tol");
  if (c.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (c.out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  switch (c.experiment) {
    case Experiment::converge:
      if (c.dt_list.empty()) throw ConfigError("dt_list", "must not be empty");
      break;
    case Experiment::chi_sweep:
    case Experiment::decay:
    case Experiment::cavity:
      if (c.chi_list.empty()) throw ConfigError("chi_list", "must not be empty");
      break;
    case Experiment::dns_export:
      break;
  }
}

nlohmann::json to_json(const SimConfig& c) {
  return json{{"experiment", experiment_name(c.experiment)},
              {"n", c.n},
              {"coarse_n", c.coarse_n},
              {"dt", c.dt},
              {"t_final", c.t_final},
              {"nu", c.nu},
              {"pr", c.pr},
              {"ra", c.ra},
              {"omega", c.omega},
              {"chi", c.chi},
              {"chi_list", c.chi_list},
              {"dt_list", c.dt_list},
              {"boundary", c.boundary},
              {"model", c.model},
              {"observation_time", c.observation_time},
              {"observations", c.observations},
              {"steady_tol", c.steady_tol},
              {"max_steps", c.max_steps},
              {"solver_tol", c.solver_tol},
              {"refine_check", c.refine_check},
              {"out_dir", c.out_dir},
              {"jobs", c.jobs}};
}

}  // namespace nudge
