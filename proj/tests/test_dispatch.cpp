#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bmsim/carbon.hpp"
#include "bmsim/dispatch.hpp"
#include "bmsim/error.hpp"
#include "oracle.hpp"
#include "testutil.hpp"

using namespace bmsim;
using testutil::conservation_residuals;
using testutil::ladder_order_residual;

namespace {

// Residuals, ladder order and box invariants every optimal dispatch must
// satisfy.
void check_solution_invariants(const Scenario& s, const DispatchSolution& sol) {
  const auto res = conservation_residuals(s, sol);
  CHECK(res.balance < 1e-7);
  CHECK(res.flow_law < 1e-7);
  CHECK(res.soc < 1e-7);
  CHECK(res.overlap < 1e-7);
  CHECK(ladder_order_residual(s, sol) < 1e-7);

  for (size_t u = 0; u < s.units.size(); ++u) {
    for (size_t r = 0; r < s.units[u].offer_ladder.size(); ++r)
      for (double v : sol.accepted_offer[u][r]) {
        CHECK(v >= 0.0);
        CHECK(v <= s.units[u].offer_ladder[r].volume_mw + 1e-7);
      }
    for (size_t r = 0; r < s.units[u].bid_ladder.size(); ++r)
      for (double v : sol.accepted_bid[u][r]) {
        CHECK(v >= 0.0);
        CHECK(v <= s.units[u].bid_ladder[r].volume_mw + 1e-7);
      }
  }
  for (size_t a = 0; a < s.storage_fleet.size(); ++a) {
    const auto& asset = s.storage_fleet[a];
    for (double v : sol.soc[a]) {
      CHECK(v >= -1e-9);
      CHECK(v <= asset.energy_capacity_mwh + 1e-9);
    }
    for (double v : sol.charge[a]) CHECK(v <= asset.rated_power_mw + 1e-9);
    for (double v : sol.discharge[a]) CHECK(v <= asset.rated_power_mw + 1e-9);
  }
  for (size_t l = 0; l < sol.flow.size(); ++l)
    for (double v : sol.flow[l])
      CHECK(std::abs(v) <= s.network.lines[l].capacity_mw + 1e-6);
}

void check_against_oracle(const Scenario& s) {
  DispatchProblem dp = build_dispatch_problem(s);
  const oracle::Result want = oracle::solve_by_enumeration(dp.lp);
  REQUIRE(want.status == LpStatus::Optimal);
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(std::abs(sol.lp_objective_gbp - want.objective) <= 1e-6);
  check_solution_invariants(s, sol);
}

}  // namespace

TEST_SUITE("dispatch") {

TEST_CASE("merit order single unit") {
  const Scenario s = testutil::merit_single();
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(sol.objective_cost_gbp == 250.0);
  CHECK(sol.accepted_offer[0][0][0] == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(bm_cost(s, sol) == 250.0);
}

TEST_CASE("merit order two units") {
  const Scenario s = testutil::merit_pair();
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(sol.objective_cost_gbp == 350.0);
  CHECK(sol.accepted_offer[0][0][0] == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(sol.accepted_offer[1][0][0] == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("zero imbalance does nothing") {
  Scenario s = testutil::merit_single();
  s.imbalance_mw = {{0.0}};
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(sol.objective_cost_gbp == 0.0);
  CHECK(sol.accepted_offer[0][0][0] == 0.0);
}

TEST_CASE("bid sign convention") {
  Scenario s = testutil::one_node();
  s.units = {{"w", "n1", FuelType::Wind, 0, 50, {20.0}, {}, {{10, 10}}}};
  s.imbalance_mw = {{-4.0}};
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(sol.objective_cost_gbp == -20.0);
  CHECK(sol.accepted_bid[0][0][0] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("degradation term in recomputed cost") {
  Scenario s = testutil::one_node();
  s.storage_fleet.push_back(make_storage(Tech::Lib, "n1", 2.0, 2.0));

  DispatchSolution sol;
  sol.accepted_offer.resize(0);
  sol.accepted_bid.resize(0);
  sol.charge = {{1.0}};
  sol.discharge = {{0.0}};
  sol.soc = {{2.0, 2.4609772228646444}};
  CHECK(bm_cost(s, sol) == 6.585);
}

TEST_CASE("problem size of smallest instance") {
  Scenario s = testutil::one_node();
  s.units = {{"g", "n1", FuelType::Ccgt, 0, 50, {10.0}, {{50, 10}}, {{5, 10}}}};
  const DispatchProblem dp = build_dispatch_problem(s);
  CHECK(dp.lp.num_variables() == 2);
  CHECK(dp.lp.num_constraints() == 1);
}

TEST_CASE("problem size delta from one storage asset") {
  Scenario s = testutil::arbitrage();
  const DispatchProblem before = build_dispatch_problem(s);
  s.storage_fleet.push_back(make_storage(Tech::Lib, "n1", 1.0, 2.0));
  const DispatchProblem after = build_dispatch_problem(s);
  const int T = s.horizon;
  CHECK(after.lp.num_variables() ==
        before.lp.num_variables() + 2 * T + (T + 1));
  CHECK(after.lp.num_constraints() == before.lp.num_constraints() + T + 1);
}

TEST_CASE("congested line ships exactly the cap") {
  const Scenario s = testutil::congested_pair();
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(sol.objective_cost_gbp == 250.0);
  CHECK(sol.flow[0][0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(sol.accepted_offer[0][0][0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(sol.accepted_offer[1][0][0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(sol.angle[0][0] == 0.0);
  CHECK(sol.angle[1][0] == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("arbitrage with LIB") {
  const Scenario s = testutil::arbitrage();
  const auto run = storage_delta_run(s, make_storage(Tech::Lib, "n1", 1.0, 2.0));
  CHECK(bm_cost(s, run.base) == 450.0);
  CHECK(run.with_storage.objective_cost_gbp ==
        doctest::Approx(424.68225).epsilon(1e-12));
  CHECK(run.cost_delta_gbp == doctest::Approx(-25.31775).epsilon(1e-12));
}

TEST_CASE("idle asset at flat prices") {
  Scenario s = testutil::one_node(2);
  s.units = {{"g", "n1", FuelType::Ccgt, 0, 100, {0.0, 0.0}, {{50, 20}}, {}}};
  s.imbalance_mw = {{5.0, 5.0}};
  const auto run = storage_delta_run(s, make_storage(Tech::Lib, "n1", 1.0, 2.0));
  CHECK(run.cost_delta_gbp == 0.0);
}

TEST_CASE("efficiency gate across technologies") {
  const Scenario s = testutil::efficiency_gate();
  const auto lib = storage_delta_run(s, make_storage(Tech::Lib, "n1", 1.0, 2.0));
  const auto hes = storage_delta_run(s, make_storage(Tech::Hes, "n1", 1.0, 2.0));
  const auto psh = storage_delta_run(s, make_storage(Tech::Psh, "n1", 1.0, 2.0));
  const auto vrfb =
      storage_delta_run(s, make_storage(Tech::Vrfb, "n1", 1.0, 2.0));

  CHECK(lib.cost_delta_gbp == doctest::Approx(-10.31775).epsilon(1e-12));
  CHECK(hes.cost_delta_gbp == 0.0);
  Scenario with_hes = s;
  with_hes.storage_fleet.push_back(make_storage(Tech::Hes, "n1", 1.0, 2.0));
  CHECK(k_fraction(with_hes, hes.with_storage, 0) == 0.0);
  CHECK(psh.cost_delta_gbp == doctest::Approx(-19.5).epsilon(1e-12));
  CHECK(vrfb.cost_delta_gbp == doctest::Approx(-11.3604).epsilon(1e-12));
}

TEST_CASE("zero tariff epsilon excluded from reported cost") {
  Scenario s = testutil::efficiency_gate();
  s.storage_fleet.push_back(make_storage(Tech::Psh, "n1", 1.0, 2.0));
  const DispatchSolution sol = solve_dispatch(s);
  CHECK(sol.lp_objective_gbp - sol.objective_cost_gbp ==
        doctest::Approx(8.95e-7).epsilon(1e-6));
  CHECK(bm_cost(s, sol) == doctest::Approx(sol.objective_cost_gbp).epsilon(1e-12));
  CHECK(conservation_residuals(s, sol).overlap < 1e-7);
}

TEST_CASE("kappa definition") {
  Scenario s = testutil::one_node(4);
  s.imbalance_mw = {{0, 0, 0, 0}};
  s.storage_fleet.push_back(make_storage(Tech::Lib, "n1", 1.0, 2.0));

  DispatchSolution sol;
  sol.charge = {{0.5, 0.0, 0.5, 0.0}};
  sol.discharge = {{0.0, 0.0, 0.0, 0.0}};
  CHECK(k_fraction(s, sol, 0) == 0.25);

  sol.charge = {{1.0, 0.0, 1.0, 0.0}};
  sol.discharge = {{0.0, 1.0, 0.0, 1.0}};
  CHECK(k_fraction(s, sol, 0) == 1.0);

  sol.charge = {{0.0, 0.0, 0.0, 0.0}};
  sol.discharge = {{0.0, 0.0, 0.0, 0.0}};
  CHECK(k_fraction(s, sol, 0) == 0.0);

  CHECK_THROWS_AS(k_fraction(s, sol, 3), ValidationError);
}

TEST_CASE("infeasibility diagnosis") {
  Scenario s = testutil::one_node();
  s.units = {{"g", "n1", FuelType::Ccgt, 0, 100, {0.0}, {{50, 1}}, {}}};
  s.imbalance_mw = {{10.0}};
  CHECK_THROWS_WITH_AS(solve_dispatch(s),
                       "dispatch infeasible: period 1 is short 10 MW but "
                       "offers and discharge cover only 1 MW",
                       SolveError);
}

TEST_CASE("report aggregates per fuel") {
  const Scenario s = testutil::merit_pair();
  const DispatchSolution sol = solve_dispatch(s);
  const DispatchReport report = make_report(s, sol);
  CHECK(report.objective_cost_gbp == 350.0);
  CHECK(report.fuel_delta_mwh[static_cast<size_t>(FuelType::Ccgt)][0] ==
        doctest::Approx(7.5).epsilon(1e-9));
  CHECK(report.utilisation.empty());

  Scenario a = testutil::arbitrage();
  a.storage_fleet.push_back(make_storage(Tech::Lib, "n1", 1.0, 2.0));
  const DispatchSolution asol = solve_dispatch(a);
  const DispatchReport areport = make_report(a, asol);
  REQUIRE(areport.utilisation.size() == 1);
  CHECK(areport.utilisation[0] == doctest::Approx(k_fraction(a, asol, 0)));
}

TEST_CASE("solution csv layout") {
  Scenario s = testutil::arbitrage();
  s.storage_fleet.push_back(make_storage(Tech::Lib, "n1", 1.0, 2.0));
  const DispatchSolution sol = solve_dispatch(s);
  std::ostringstream out;
  write_solution_csv(s, sol, out);
  const std::string text = out.str();
  CHECK(text.find("100 MVA") != std::string::npos);
  CHECK(text.find("kind,entity,period,value") != std::string::npos);
  CHECK(text.find("soc,storage[0],0,") != std::string::npos);
  CHECK(text.find("soc,storage[0],2,") != std::string::npos);
}

TEST_CASE("hand-built scenarios match the enumeration oracle") {
  const std::vector<Scenario> suite = testutil::hand_suite();
  REQUIRE(suite.size() >= 20);
  for (size_t i = 0; i < suite.size(); ++i) {
    CAPTURE(i);
    check_against_oracle(suite[i]);
  }
}

TEST_CASE("storage never hurts on random scenarios") {
  std::mt19937 rng(777001);
  std::uniform_real_distribution<double> power(1.0, 20.0);
  std::uniform_int_distribution<int> duration_pick(0, 2);
  const double durations[] = {1.0, 2.0, 4.0};

  int instances = 0;
  double worst_delta = -1e300;
  for (int trial = 0; trial < 30; ++trial) {
    CAPTURE(trial);
    const Scenario base = testutil::random_feasible_scenario(rng);
    const DispatchSolution base_sol = solve_dispatch(base);
    check_solution_invariants(base, base_sol);
    const double base_cost = bm_cost(base, base_sol);

    std::uniform_int_distribution<int> node_pick(
        0, static_cast<int>(base.network.nodes.size()) - 1);
    const NodeId node =
        base.network.nodes[static_cast<size_t>(node_pick(rng))].id;
    const double p = power(rng);
    const double d = durations[duration_pick(rng)];
    for (Tech tech : {Tech::Lib, Tech::Vrfb, Tech::Psh, Tech::Hes}) {
      Scenario with = base;
      with.storage_fleet.push_back(make_storage(tech, node, p, d));
      const DispatchSolution sol = solve_dispatch(with);
      check_solution_invariants(with, sol);
      const double delta = bm_cost(with, sol) - base_cost;
      worst_delta = std::max(worst_delta, delta);
      CHECK(delta <= 1e-6);
      ++instances;
    }
  }
  CHECK(instances == 120);
  MESSAGE("worst cost delta: ", worst_delta);
}

}  // TEST_SUITE
