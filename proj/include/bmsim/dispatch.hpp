#pragma once

#include <array>
#include <iosfwd>

#include "bmsim/domain.hpp"
#include "bmsim/lp.hpp"

namespace bmsim {

// Tie-break penalty in GBP/MWh applied to charge and discharge power of
// assets whose degradation tariff is zero, so the solver never reports
// simultaneous charge and discharge among equal-cost optima. Excluded from
// all reported costs.
inline constexpr double kZeroTariffEpsilon = 1e-6;

// Redispatch LP for one scenario plus the variable index maps needed to
// read a solution back. Index convention: offer_var[u][r][t] etc.; angle
// and flow variables exist only when the network has lines.
struct DispatchProblem {
  LpProblem lp;
  std::vector<std::vector<std::vector<int>>> offer_var;
  std::vector<std::vector<std::vector<int>>> bid_var;
  std::vector<std::vector<int>> charge_var;
  std::vector<std::vector<int>> discharge_var;
  std::vector<std::vector<int>> soc_var;  // [asset][0..T], soc_var[s][0] fixed
  std::vector<std::vector<int>> angle_var;
  std::vector<std::vector<int>> flow_var;
};

DispatchProblem build_dispatch_problem(const Scenario& scenario);

struct DispatchSolution {
  // MW accepted per unit, ladder rank, period.
  std::vector<std::vector<std::vector<double>>> accepted_offer;
  std::vector<std::vector<std::vector<double>>> accepted_bid;
  // MW per asset per period.
  std::vector<std::vector<double>> charge;
  std::vector<std::vector<double>> discharge;
  // MWh per asset per period boundary (horizon + 1 entries).
  std::vector<std::vector<double>> soc;
  // Radians per node per period and MW per line per period; empty when the
  // network has no lines.
  std::vector<std::vector<double>> angle;
  std::vector<std::vector<double>> flow;
  // Pay-as-bid cost: offer costs minus bid costs plus degradation.
  double objective_cost_gbp = 0.0;
  // Raw LP objective, including the zero-tariff epsilon term; equals the
  // enumeration oracle's value on the same problem.
  double lp_objective_gbp = 0.0;
};

DispatchSolution solve_dispatch(const Scenario& scenario);

// Process-wide count of completed solve_dispatch calls; lets callers audit
// how many dispatches a sweep actually ran.
size_t dispatch_solve_count();

// Recomputes the pay-as-bid cost from accepted volumes, ladder prices and
// degradation tariffs; independent of the LP objective bookkeeping.
double bm_cost(const Scenario& scenario, const DispatchSolution& solution);

// Mean of (charge + discharge) / rated power over the horizon, in [0, 1].
double k_fraction(const Scenario& scenario, const DispatchSolution& solution,
                  size_t asset_index);

struct DispatchReport {
  double objective_cost_gbp = 0.0;
  // MWh of redispatch (offers positive, bids negative) per fuel per period.
  std::array<std::vector<double>, kFuelCount> fuel_delta_mwh;
  std::vector<double> utilisation;
};

DispatchReport make_report(const Scenario& scenario,
                           const DispatchSolution& solution);

struct StorageDeltaRun {
  DispatchSolution base;
  DispatchSolution with_storage;
  double cost_delta_gbp = 0.0;
};

// Solves the scenario twice, without and with the candidate asset, and
// reports the balancing-cost change. The input fleet must be empty.
StorageDeltaRun storage_delta_run(const Scenario& scenario_without,
                                  const StorageAsset& asset);

void write_solution_csv(const Scenario& scenario,
                        const DispatchSolution& solution, std::ostream& out);

}  // namespace bmsim
