// nudge-ns: command-line driver for the experiments.
//
//   nudge-ns <subcommand> [--config FILE] [--out DIR] [--jobs K] [--key value ...]
//
// Exit codes: 0 success, 1 an acceptance check failed, 2 runtime or usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nudge/config.hpp"
#include "nudge/error.hpp"
#include "nudge/experiments.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_failed_check = 1;
constexpr int exit_error = 2;

std::string flag_of(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

struct Outcome {
  json results;
  std::vector<nudge::Check> checks;
};

Outcome run(const nudge::SimConfig& cfg, const fs::path& out) {
  using nudge::Experiment;
  switch (cfg.experiment) {
    case Experiment::converge: {
      auto r = nudge::run_convergence(cfg, out);
      return {r.summary(), r.checks};
    }
    case Experiment::chi_sweep: {
      auto r = nudge::run_chi_sweep(cfg, out);
      return {r.summary(), r.checks};
    }
    case Experiment::decay: {
      auto r = nudge::run_decay(cfg, out);
      return {r.summary(), r.checks};
    }
    case Experiment::cavity: {
      auto r = nudge::run_double_pane(cfg, out);
      return {r.summary(), r.checks};
    }
    case Experiment::dns_export: {
      auto r = nudge::run_dns_export(cfg, out);
      return {r.scalars, {}};
    }
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nudged Navier-Stokes and Boussinesq experiments"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> values;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", values["out_dir"], "output directory");
  app.add_option("--jobs", values["jobs"], "concurrent sweep members");
  for (const std::string& key : nudge::config_keys()) {
    if (key == "experiment" || key == "out_dir" || key == "jobs") continue;
    app.add_option(flag_of(key), values[key], fmt::format("override '{}'", key));
  }
  app.add_subcommand("converge", "temporal convergence on the manufactured flow");
  app.add_subcommand("chi-sweep", "model error of the nudged run against a same-grid DNS, per chi");
  app.add_subcommand("decay", "exponential transient of the nudged run, per chi");
  app.add_subcommand("cavity", "differentially heated cavity: DNS and nudged runs to steady state");
  app.add_subcommand("dns-export", "run a DNS and write its coarse observations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return exit_error;
  }

  try {
    const auto subcommand = nudge::parse_experiment(app.get_subcommands().front()->get_name());
    json overrides = json::object();
    for (const auto& [key, text] : values) {
      const std::string flag = key == "out_dir" ? "--out" : flag_of(key);
      if (app.count(flag) > 0) overrides[key] = nudge::override_value(key, text);
    }
    const nudge::SimConfig cfg = config_path.empty()
                                     ? nudge::parse_config(json::object(), overrides, subcommand)
                                     : nudge::parse_config_file(config_path, overrides, subcommand);
    const fs::path out = cfg.out_dir;
    fs::create_directories(out);

    const Outcome outcome = run(cfg, out);
    const bool passed = nudge::all_pass(outcome.checks);
    json summary = {{"config", nudge::to_json(cfg)},
                    {"results", outcome.results},
                    {"checks", nudge::to_json(outcome.checks)},
                    {"passed", passed}};
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
    for (const nudge::Check& c : outcome.checks)
      std::cout << fmt::format("[{}] {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
    return passed ? exit_ok : exit_failed_check;
  } catch (const nudge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return exit_error;
}
