#include "bmsim/dispatch.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>

#include "bmsim/error.hpp"
#include "bmsim/log.hpp"

namespace bmsim {

namespace {

double clamp_volume(double v) { return v > 0.0 ? v : 0.0; }

std::atomic<size_t> solve_counter{0};

}  // namespace

size_t dispatch_solve_count() { return solve_counter.load(); }

DispatchProblem build_dispatch_problem(const Scenario& scenario) {
  validate_scenario(scenario);
  const int horizon = scenario.horizon;
  const double dt = scenario.period_hours;
  const auto& network = scenario.network;
  const size_t n_nodes = network.nodes.size();
  const size_t n_lines = network.lines.size();
  const bool with_flows = n_lines > 0;

  DispatchProblem dp;
  auto& lp = dp.lp;

  auto ladder_vars = [&](const BmUnit& unit, const std::vector<LadderBand>& ladder,
                         const char* side, double cost_sign) {
    std::vector<std::vector<int>> vars(ladder.size());
    for (size_t r = 0; r < ladder.size(); ++r) {
      vars[r].resize(static_cast<size_t>(horizon));
      for (int t = 0; t < horizon; ++t)
        vars[r][static_cast<size_t>(t)] = lp.add_variable(
            fmt::format("{}[{},{},{}]", side, unit.id, r + 1, t + 1), 0.0,
            ladder[r].volume_mw, cost_sign * ladder[r].price_gbp_per_mwh * dt);
    }
    return vars;
  };

  for (const auto& unit : scenario.units) {
    dp.offer_var.push_back(ladder_vars(unit, unit.offer_ladder, "offer", 1.0));
    dp.bid_var.push_back(ladder_vars(unit, unit.bid_ladder, "bid", -1.0));
  }

  for (size_t s = 0; s < scenario.storage_fleet.size(); ++s) {
    const auto& asset = scenario.storage_fleet[s];
    double tariff = asset.degradation_tariff_gbp_per_mwh;
    if (tariff == 0.0) tariff = kZeroTariffEpsilon;
    std::vector<int> pc(static_cast<size_t>(horizon));
    std::vector<int> pd(static_cast<size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      pc[static_cast<size_t>(t)] =
          lp.add_variable(fmt::format("charge[{},{}]", s, t + 1), 0.0,
                          asset.rated_power_mw, tariff * dt);
      pd[static_cast<size_t>(t)] =
          lp.add_variable(fmt::format("discharge[{},{}]", s, t + 1), 0.0,
                          asset.rated_power_mw, tariff * dt);
    }
    std::vector<int> soc(static_cast<size_t>(horizon) + 1);
    soc[0] = lp.add_variable(fmt::format("soc[{},0]", s), asset.soc_initial_mwh,
                             asset.soc_initial_mwh, 0.0);
    for (int t = 1; t <= horizon; ++t)
      soc[static_cast<size_t>(t)] =
          lp.add_variable(fmt::format("soc[{},{}]", s, t), 0.0,
                          asset.energy_capacity_mwh, 0.0);
    dp.charge_var.push_back(std::move(pc));
    dp.discharge_var.push_back(std::move(pd));
    dp.soc_var.push_back(std::move(soc));
  }

  if (with_flows) {
    dp.angle_var.resize(n_nodes);
    for (size_t n = 0; n < n_nodes; ++n) {
      const bool is_ref = network.nodes[n].id == network.reference_node;
      const double bound = is_ref ? 0.0 : Network::kAngleBoundRad;
      dp.angle_var[n].resize(static_cast<size_t>(horizon));
      for (int t = 0; t < horizon; ++t)
        dp.angle_var[n][static_cast<size_t>(t)] =
            lp.add_variable(fmt::format("angle[{},{}]", network.nodes[n].id, t + 1),
                            -bound, bound, 0.0);
    }
    dp.flow_var.resize(n_lines);
    for (size_t l = 0; l < n_lines; ++l) {
      const auto& line = network.lines[l];
      dp.flow_var[l].resize(static_cast<size_t>(horizon));
      for (int t = 0; t < horizon; ++t)
        dp.flow_var[l][static_cast<size_t>(t)] = lp.add_variable(
            fmt::format("flow[{}-{},{}]", line.from, line.to, t + 1),
            -line.capacity_mw, line.capacity_mw, 0.0);
    }
  }

  // Node balance: offers - bids + discharge - charge + net inflow equals
  // the nodal shortfall.
  for (size_t n = 0; n < n_nodes; ++n) {
    for (int t = 0; t < horizon; ++t) {
      std::vector<LinearTerm> terms;
      for (size_t u = 0; u < scenario.units.size(); ++u) {
        if (scenario.units[u].node != network.nodes[n].id) continue;
        for (auto& rank : dp.offer_var[u])
          terms.push_back({rank[static_cast<size_t>(t)], 1.0});
        for (auto& rank : dp.bid_var[u])
          terms.push_back({rank[static_cast<size_t>(t)], -1.0});
      }
      for (size_t s = 0; s < scenario.storage_fleet.size(); ++s) {
        if (scenario.storage_fleet[s].node != network.nodes[n].id) continue;
        terms.push_back({dp.discharge_var[s][static_cast<size_t>(t)], 1.0});
        terms.push_back({dp.charge_var[s][static_cast<size_t>(t)], -1.0});
      }
      if (with_flows) {
        for (size_t l = 0; l < n_lines; ++l) {
          if (network.lines[l].from == network.nodes[n].id)
            terms.push_back({dp.flow_var[l][static_cast<size_t>(t)], -1.0});
          else if (network.lines[l].to == network.nodes[n].id)
            terms.push_back({dp.flow_var[l][static_cast<size_t>(t)], 1.0});
        }
      }
      lp.add_constraint(std::move(terms), Relation::Equal,
                        scenario.imbalance_mw[n][static_cast<size_t>(t)],
                        fmt::format("balance[{},{}]", network.nodes[n].id, t + 1));
    }
  }

  // DC flow definition: flow = susceptance_pu * base MVA * angle difference.
  if (with_flows) {
    for (size_t l = 0; l < n_lines; ++l) {
      const auto& line = network.lines[l];
      const double stiffness = line.susceptance_pu * Network::kBaseMva;
      const size_t from = static_cast<size_t>(network.node_index(line.from));
      const size_t to = static_cast<size_t>(network.node_index(line.to));
      for (int t = 0; t < horizon; ++t) {
        lp.add_constraint({{dp.flow_var[l][static_cast<size_t>(t)], 1.0},
                           {dp.angle_var[from][static_cast<size_t>(t)], -stiffness},
                           {dp.angle_var[to][static_cast<size_t>(t)], stiffness}},
                          Relation::Equal, 0.0,
                          fmt::format("flowdef[{}-{},{}]", line.from, line.to, t + 1));
      }
    }
  }

  // Ladder chaining: a band may only be used in proportion to the nearest
  // earlier band with volume; zero-volume bands are skipped over.
  auto chain = [&](const BmUnit& unit, const std::vector<LadderBand>& ladder,
                   const std::vector<std::vector<int>>& vars, const char* side) {
    int prev = -1;
    for (size_t r = 0; r < ladder.size(); ++r) {
      if (ladder[r].volume_mw <= 0.0) continue;
      if (prev >= 0) {
        const double ratio =
            ladder[r].volume_mw / ladder[static_cast<size_t>(prev)].volume_mw;
        for (int t = 0; t < horizon; ++t)
          lp.add_constraint(
              {{vars[r][static_cast<size_t>(t)], 1.0},
               {vars[static_cast<size_t>(prev)][static_cast<size_t>(t)], -ratio}},
              Relation::LessEqual, 0.0,
              fmt::format("chain_{}[{},{},{}]", side, unit.id, r + 1, t + 1));
      }
      prev = static_cast<int>(r);
    }
  };
  for (size_t u = 0; u < scenario.units.size(); ++u) {
    chain(scenario.units[u], scenario.units[u].offer_ladder, dp.offer_var[u],
          "offer");
    chain(scenario.units[u], scenario.units[u].bid_ladder, dp.bid_var[u], "bid");
  }

  // Storage dynamics plus the cyclic end condition.
  for (size_t s = 0; s < scenario.storage_fleet.size(); ++s) {
    const auto& asset = scenario.storage_fleet[s];
    for (int t = 0; t < horizon; ++t) {
      lp.add_constraint(
          {{dp.soc_var[s][static_cast<size_t>(t) + 1], 1.0},
           {dp.soc_var[s][static_cast<size_t>(t)], -1.0},
           {dp.charge_var[s][static_cast<size_t>(t)], -asset.eta_charge * dt},
           {dp.discharge_var[s][static_cast<size_t>(t)], dt / asset.eta_discharge}},
          Relation::Equal, 0.0, fmt::format("soc_dyn[{},{}]", s, t + 1));
    }
    lp.add_constraint({{dp.soc_var[s][static_cast<size_t>(horizon)], 1.0},
                       {dp.soc_var[s][0], -1.0}},
                      Relation::Equal, 0.0, fmt::format("soc_cycle[{}]", s));
  }

  return dp;
}

namespace {

// Best-effort diagnosis of an infeasible dispatch: the first period whose
// net system imbalance exceeds even the optimistic redispatch headroom.
std::string infeasibility_note(const Scenario& scenario) {
  double up = 0.0, down = 0.0, storage = 0.0;
  for (const auto& unit : scenario.units) {
    for (const auto& band : unit.offer_ladder) up += band.volume_mw;
    for (const auto& band : unit.bid_ladder) down += band.volume_mw;
  }
  for (const auto& asset : scenario.storage_fleet)
    storage += asset.rated_power_mw;
  for (int t = 0; t < scenario.horizon; ++t) {
    double net = 0.0;
    for (const auto& series : scenario.imbalance_mw)
      net += series[static_cast<size_t>(t)];
    if (net > up + storage + kFeasTol)
      return fmt::format(
          "dispatch infeasible: period {} is short {:g} MW but offers and "
          "discharge cover only {:g} MW",
          t + 1, net, up + storage);
    if (-net > down + storage + kFeasTol)
      return fmt::format(
          "dispatch infeasible: period {} is long {:g} MW but bids and "
          "charge absorb only {:g} MW",
          t + 1, -net, down + storage);
  }
  return "dispatch infeasible: no redispatch satisfies the network "
         "constraints (check line capacities and per-node headroom)";
}

}  // namespace

DispatchSolution solve_dispatch(const Scenario& scenario) {
  DispatchProblem dp = build_dispatch_problem(scenario);
  const LpSolution lps = solve_lp(dp.lp);
  if (lps.status == LpStatus::Infeasible)
    throw SolveError(infeasibility_note(scenario));
  if (lps.status == LpStatus::Unbounded)
    throw SolveError(
        "internal: dispatch LP unbounded; construction bounds every variable");

  const int horizon = scenario.horizon;
  const double dt = scenario.period_hours;
  DispatchSolution sol;
  sol.lp_objective_gbp = lps.objective_value;

  auto value = [&](int var) { return lps.values[static_cast<size_t>(var)]; };

  sol.accepted_offer.resize(scenario.units.size());
  sol.accepted_bid.resize(scenario.units.size());
  for (size_t u = 0; u < scenario.units.size(); ++u) {
    auto read_side = [&](const std::vector<std::vector<int>>& vars) {
      std::vector<std::vector<double>> out(vars.size());
      for (size_t r = 0; r < vars.size(); ++r) {
        out[r].resize(static_cast<size_t>(horizon));
        for (int t = 0; t < horizon; ++t)
          out[r][static_cast<size_t>(t)] =
              clamp_volume(value(vars[r][static_cast<size_t>(t)]));
      }
      return out;
    };
    sol.accepted_offer[u] = read_side(dp.offer_var[u]);
    sol.accepted_bid[u] = read_side(dp.bid_var[u]);
  }

  const size_t n_assets = scenario.storage_fleet.size();
  sol.charge.resize(n_assets);
  sol.discharge.resize(n_assets);
  sol.soc.resize(n_assets);
  for (size_t s = 0; s < n_assets; ++s) {
    sol.charge[s].resize(static_cast<size_t>(horizon));
    sol.discharge[s].resize(static_cast<size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      sol.charge[s][static_cast<size_t>(t)] =
          clamp_volume(value(dp.charge_var[s][static_cast<size_t>(t)]));
      sol.discharge[s][static_cast<size_t>(t)] =
          clamp_volume(value(dp.discharge_var[s][static_cast<size_t>(t)]));
    }
    sol.soc[s].resize(static_cast<size_t>(horizon) + 1);
    for (int t = 0; t <= horizon; ++t)
      sol.soc[s][static_cast<size_t>(t)] =
          clamp_volume(value(dp.soc_var[s][static_cast<size_t>(t)]));
  }

  if (!dp.flow_var.empty()) {
    sol.angle.resize(scenario.network.nodes.size());
    for (size_t n = 0; n < sol.angle.size(); ++n) {
      sol.angle[n].resize(static_cast<size_t>(horizon));
      for (int t = 0; t < horizon; ++t)
        sol.angle[n][static_cast<size_t>(t)] =
            value(dp.angle_var[n][static_cast<size_t>(t)]);
    }
    sol.flow.resize(scenario.network.lines.size());
    for (size_t l = 0; l < sol.flow.size(); ++l) {
      sol.flow[l].resize(static_cast<size_t>(horizon));
      for (int t = 0; t < horizon; ++t)
        sol.flow[l][static_cast<size_t>(t)] =
            value(dp.flow_var[l][static_cast<size_t>(t)]);
    }
  }

  // The reported cost excludes the zero-tariff epsilon: subtract the
  // epsilon throughput instead of recomputing, so the value stays tied to
  // the LP optimum and bm_cost remains an independent check.
  double epsilon_term = 0.0;
  for (size_t s = 0; s < n_assets; ++s) {
    if (scenario.storage_fleet[s].degradation_tariff_gbp_per_mwh != 0.0)
      continue;
    for (int t = 0; t < horizon; ++t)
      epsilon_term += kZeroTariffEpsilon * dt *
                      (sol.charge[s][static_cast<size_t>(t)] +
                       sol.discharge[s][static_cast<size_t>(t)]);
  }
  sol.objective_cost_gbp = lps.objective_value - epsilon_term;

  const double recomputed = bm_cost(scenario, sol);
  if (std::abs(recomputed - sol.objective_cost_gbp) > 1e-6)
    throw SolveError(fmt::format(
        "internal: pay-as-bid recomputation {} disagrees with LP objective {}",
        recomputed, sol.objective_cost_gbp));

  solve_counter.fetch_add(1);
  return sol;
}

double bm_cost(const Scenario& scenario, const DispatchSolution& solution) {
  const double dt = scenario.period_hours;
  double total = 0.0;
  for (int t = 0; t < scenario.horizon; ++t) {
    const size_t tt = static_cast<size_t>(t);
    double period = 0.0;
    for (size_t u = 0; u < scenario.units.size(); ++u) {
      const auto& unit = scenario.units[u];
      for (size_t r = 0; r < unit.offer_ladder.size(); ++r)
        period += unit.offer_ladder[r].price_gbp_per_mwh *
                  solution.accepted_offer[u][r][tt] * dt;
      for (size_t r = 0; r < unit.bid_ladder.size(); ++r)
        period -= unit.bid_ladder[r].price_gbp_per_mwh *
                  solution.accepted_bid[u][r][tt] * dt;
    }
    for (size_t s = 0; s < scenario.storage_fleet.size(); ++s)
      period += scenario.storage_fleet[s].degradation_tariff_gbp_per_mwh *
                (solution.charge[s][tt] + solution.discharge[s][tt]) * dt;
    total += period;
  }
  return total;
}

double k_fraction(const Scenario& scenario, const DispatchSolution& solution,
                  size_t asset_index) {
  if (asset_index >= scenario.storage_fleet.size())
    throw ValidationError(
        fmt::format("no storage asset at index {}", asset_index));
  const double rated = scenario.storage_fleet[asset_index].rated_power_mw;
  double acc = 0.0;
  for (int t = 0; t < scenario.horizon; ++t)
    acc += (solution.charge[asset_index][static_cast<size_t>(t)] +
            solution.discharge[asset_index][static_cast<size_t>(t)]) /
           rated;
  return std::clamp(acc / scenario.horizon, 0.0, 1.0);
}

DispatchReport make_report(const Scenario& scenario,
                           const DispatchSolution& solution) {
  DispatchReport report;
  report.objective_cost_gbp = solution.objective_cost_gbp;
  for (auto& series : report.fuel_delta_mwh)
    series.assign(static_cast<size_t>(scenario.horizon), 0.0);
  const double dt = scenario.period_hours;
  for (size_t u = 0; u < scenario.units.size(); ++u) {
    const auto& unit = scenario.units[u];
    auto& series = report.fuel_delta_mwh[static_cast<size_t>(unit.fuel)];
    for (int t = 0; t < scenario.horizon; ++t) {
      const size_t tt = static_cast<size_t>(t);
      double mw = 0.0;
      for (const auto& rank : solution.accepted_offer[u]) mw += rank[tt];
      for (const auto& rank : solution.accepted_bid[u]) mw -= rank[tt];
      series[tt] += mw * dt;
    }
  }
  for (size_t s = 0; s < scenario.storage_fleet.size(); ++s)
    report.utilisation.push_back(k_fraction(scenario, solution, s));
  return report;
}

StorageDeltaRun storage_delta_run(const Scenario& scenario_without,
                                  const StorageAsset& asset) {
  if (!scenario_without.storage_fleet.empty())
    throw ValidationError(
        "storage_delta_run expects a scenario with an empty storage fleet");
  StorageDeltaRun run;
  run.base = solve_dispatch(scenario_without);
  Scenario with = scenario_without;
  with.storage_fleet.push_back(asset);
  run.with_storage = solve_dispatch(with);
  run.cost_delta_gbp =
      bm_cost(with, run.with_storage) - bm_cost(scenario_without, run.base);
  log::debug("{}: cost delta {:+.4f} GBP", asset_label(asset),
             run.cost_delta_gbp);
  return run;
}

void write_solution_csv(const Scenario& scenario,
                        const DispatchSolution& solution, std::ostream& out) {
  out << fmt::format(
      "# flow_mw = susceptance_pu * {:g} MVA * (angle_from - angle_to), "
      "angles in rad\n",
      Network::kBaseMva);
  out << "kind,entity,period,value\n";
  auto row = [&](const char* kind, const std::string& entity, int period,
                 double value) {
    out << fmt::format("{},{},{},{:.6f}\n", kind, entity, period, value);
  };
  for (size_t u = 0; u < scenario.units.size(); ++u) {
    const auto& unit = scenario.units[u];
    for (size_t r = 0; r < solution.accepted_offer[u].size(); ++r)
      for (int t = 0; t < scenario.horizon; ++t)
        row("offer", fmt::format("{}:{}", unit.id, r + 1), t + 1,
            solution.accepted_offer[u][r][static_cast<size_t>(t)]);
    for (size_t r = 0; r < solution.accepted_bid[u].size(); ++r)
      for (int t = 0; t < scenario.horizon; ++t)
        row("bid", fmt::format("{}:{}", unit.id, r + 1), t + 1,
            solution.accepted_bid[u][r][static_cast<size_t>(t)]);
  }
  for (size_t s = 0; s < scenario.storage_fleet.size(); ++s) {
    const std::string entity = fmt::format("storage[{}]", s);
    for (int t = 0; t < scenario.horizon; ++t) {
      row("charge", entity, t + 1, solution.charge[s][static_cast<size_t>(t)]);
      row("discharge", entity, t + 1,
          solution.discharge[s][static_cast<size_t>(t)]);
    }
    for (int t = 0; t <= scenario.horizon; ++t)
      row("soc", entity, t, solution.soc[s][static_cast<size_t>(t)]);
  }
  if (!solution.flow.empty()) {
    for (size_t l = 0; l < scenario.network.lines.size(); ++l) {
      const auto& line = scenario.network.lines[l];
      for (int t = 0; t < scenario.horizon; ++t)
        row("flow", fmt::format("{}-{}", line.from, line.to), t + 1,
            solution.flow[l][static_cast<size_t>(t)]);
    }
    for (size_t n = 0; n < scenario.network.nodes.size(); ++n)
      for (int t = 0; t < scenario.horizon; ++t)
        row("angle", scenario.network.nodes[n].id, t + 1,
            solution.angle[n][static_cast<size_t>(t)]);
  }
}

}  // namespace bmsim
