#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bmsim/domain.hpp"

namespace bmsim {

// Revenue-side settings shared by every row of a sweep. Capacity-market and
// frequency-response prices are operator inputs; the shipped config carries
// placeholder values, not market data.
struct ValuationConfig {
  double cm_price_gbp_per_mw_year = 0.0;
  double cm_derating = 0.20;
  double dc_price_gbp_per_mw_h = 0.0;
  double dc_hours_per_year = 8760.0;
  // Yearly net BM benefit = multiplier * (base cost - with-storage cost).
  double nbb_annualization = 6.0;
};

struct SweepConfig {
  std::filesystem::path scenario_dir;
  std::vector<Tech> technologies;
  std::vector<double> sizes_mw = {1.0, 100.0};
  double duration_h = 2.0;
  // Candidate placements: explicit node ids and/or whole zones. Names that
  // match nothing in the network are skipped; an empty resolved set is an
  // error.
  std::vector<std::string> nodes;
  std::vector<std::string> zones;
  ValuationConfig valuation;
  std::filesystem::path out_dir = "out";
  int parallelism = 1;
};

// Strict JSON reader: unknown keys are rejected. A relative scenario path is
// resolved against the config file's directory; out_dir is left as written.
SweepConfig load_sweep_config(const std::filesystem::path& path);

void validate_sweep_config(const SweepConfig& config);

struct SweepRow {
  Tech tech = Tech::Lib;
  double size_mw = 0.0;
  std::string zone;
  NodeId node;
  double cost_delta_gbp = 0.0;
  double emission_rate_kgco2_per_h = 0.0;
  double kappa = 0.0;
  double nbb_per_year_gbp = 0.0;
  double cmr_gbp_per_year = 0.0;
  double dcr_gbp_per_year = 0.0;
  double npv_gbp = 0.0;
  double npv_capex70_gbp = 0.0;
  double npv_capex30_gbp = 0.0;
  // Nonempty marks a failed row; the value fields above are then unset.
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double base_cost_gbp = 0.0;
  int base_solve_count = 0;
};

// Solves the base case once, then one dispatch per (technology, size, node)
// combination, in deterministic (technology, size, zone, node) order.
// Per-row solver and validation failures land in the row's error field; the
// sweep itself only fails on config or scenario problems.
SweepResult run_sweep(const SweepConfig& config);
SweepResult run_sweep(const SweepConfig& config, const Scenario& scenario);

// Writes sweep.csv, by_zone.csv, summary.json and valuations.json.
void emit_reports(const SweepResult& result,
                  const std::filesystem::path& dir);

}  // namespace bmsim
