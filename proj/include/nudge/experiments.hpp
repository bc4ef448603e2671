#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nudge/config.hpp"
#include "nudge/stepping.hpp"

namespace nudge {

// ---------------------------------------------------------------------------
// Rate tables and fits

struct RateRow {
  double key = 0.0;    // dt or chi
  double error = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();  // NaN on the first row
};

struct RateTable {
  std::vector<RateRow> rows;
  /// Least-squares log-log slope over rows [fit_begin, fit_end); NaN if unset.
  double slope = std::numeric_limits<double>::quiet_NaN();
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;

  /// Writes `<key_name>,error[,rate]`.
  void write_csv(std::ostream& out, const char* key_name, bool with_rate) const;
};

/// Rows with rate_i = log(e_{i-1}/e_i) / log(k_{i-1}/k_i); log2 of the error
/// ratio when the keys halve.
RateTable rate_table(const std::vector<double>& keys, const std::vector<double>& errors);
/// Least-squares slope of log(y) against log(x) over [begin, end).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t begin, std::size_t end);
/// Least-squares slope of log(y) against t over [begin, end).
double semilog_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t begin, std::size_t end);

/// One pass/fail statement of an experiment.
struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<Check>& checks);
nlohmann::json to_json(const std::vector<Check>& checks);

/// Label used in file names: integers print without exponent.
std::string key_label(double v);

/// A finished run: configuration, per-step ledger, final state and scalars.
struct RunRecord {
  std::string label;
  ModelSpec model;
  EnergyLedger ledger;
  FlowState final_state;
  nlohmann::json scalars = nlohmann::json::object();
};

/// Largest |energy_residual| / max(1, kinetic) over a ledger (NaN entries skipped).
double max_energy_residual(const EnergyLedger& ledger);
/// Smallest stability margin over a ledger; +inf when not applicable.
double min_stability_margin(const EnergyLedger& ledger);
double max_div_residual(const EnergyLedger& ledger);

// ---------------------------------------------------------------------------
// Post-processing

enum class Wall { hot, cold };

struct NusseltProfile {
  std::vector<double> y;
  std::vector<double> nu;
  std::vector<double> weights;  // quadrature weights along the wall
  double average() const;
};

/// Local Nusselt number -dT/dx on the hot (x = 0) or cold (x = 1) wall at
/// three Gauss points per boundary edge, ordered by y. Conduction T = 1 - x
/// gives 1 on both walls.
NusseltProfile compute_nusselt(const Field& temperature, Wall wall);
/// Largest |a.nu - b.nu|; both profiles must share their sample points.
double sup_difference(const NusseltProfile& a, const NusseltProfile& b);

struct VorticityStream {
  Field vorticity;       // P1
  Field streamfunction;  // P2, zero on the boundary
};

/// Vorticity dw2/dx - dw1/dy projected onto P1, and the streamfunction with
/// -Lap psi = -vorticity, psi = 0 on the boundary (w = (-psi_y, psi_x)).
VorticityStream compute_vorticity_stream(const Field& velocity);

// ---------------------------------------------------------------------------
// Experiments. Each writes its artifacts below `out` (skipped when empty)
// and returns its checks.

struct ConvergenceResult {
  RateTable table;
  std::vector<RunRecord> runs;
  double max_energy_residual = 0.0;
  double max_div_residual = 0.0;
  std::vector<Check> checks;
  nlohmann::json summary() const;
};

struct ChiSweepResult {
  RateTable table;        // chi, E(chi); slope over the fit window
  double floor = 0.0;     // solver floor of the comparison
  double dns_norm = 0.0;  // ||u_DNS|| at the final time
  std::vector<RunRecord> runs;
  std::vector<Check> checks;
  nlohmann::json summary() const;
};

struct DecaySeries {
  double chi = 0.0;
  std::vector<double> t;
  std::vector<double> error;
  double rate = std::numeric_limits<double>::quiet_NaN();
  std::size_t window = 0;  // samples used by the fit
};

struct DecayResult {
  std::vector<DecaySeries> series;
  double floor = 0.0;
  double max_energy_residual = 0.0;
  std::vector<Check> checks;
  nlohmann::json summary() const;
};

struct CavityCase {
  std::string label;  // dns_nocoriolis, dns_coriolis, nudged_chi_<chi>
  double chi = std::numeric_limits<double>::quiet_NaN();
  RunRecord run;
  bool converged = false;
  NusseltProfile hot;
  NusseltProfile cold;
  double distance = std::numeric_limits<double>::quiet_NaN();           // D(chi)
  double nusselt_discrepancy = std::numeric_limits<double>::quiet_NaN();  // sup |Nu - Nu_DNS|
};

struct CavityResult {
  std::vector<CavityCase> cases;
  double refined_nusselt = std::numeric_limits<double>::quiet_NaN();  // DNS without Coriolis at 2n
  double refine_change = std::numeric_limits<double>::quiet_NaN();
  std::vector<Check> checks;
  nlohmann::json summary() const;
};

/// Manufactured CNLE runs over cfg.dt_list up to cfg.t_final; L2 error at the
/// final time against the exact velocity.
ConvergenceResult run_convergence(const SimConfig& cfg, const std::filesystem::path& out);

/// Same-grid DNS with Coriolis exports its coarse means; nudged runs without
/// Coriolis read them back from the CSV and are compared at the final time.
ChiSweepResult run_chi_sweep(const SimConfig& cfg, const std::filesystem::path& out);

/// omega = 0: nudged runs from the Stokes lift of the boundary data toward a
/// same-grid DNS; exponential rate of ||e(t)|| per chi.
DecayResult run_decay(const SimConfig& cfg, const std::filesystem::path& out);

/// Differentially heated cavity: DNS with and without Coriolis and nudged
/// runs without Coriolis, all to steady state.
CavityResult run_double_pane(const SimConfig& cfg, const std::filesystem::path& out);

/// Runs the DNS named by cfg.model and writes `observations.csv` and the ledger.
RunRecord run_dns_export(const SimConfig& cfg, const std::filesystem::path& out);

/// ModelSpec of the experiment's data-generating run.
ModelSpec dns_model(const SimConfig& cfg);

}  // namespace nudge
