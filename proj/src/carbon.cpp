#include "bmsim/carbon.hpp"

#include <fmt/core.h>

#include <ostream>

#include "bmsim/error.hpp"

namespace bmsim {

IntensityTable default_intensities() {
  IntensityTable table;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Coal)] = 937.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Ocgt)] = 651.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Ccgt)] = 394.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Other)] = 300.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Biomass)] = 120.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Nuclear)] = 0.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Npshyd)] = 0.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Wind)] = 0.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::Psh)] = 0.0;
  table.kgco2_per_mwh[static_cast<size_t>(FuelType::ZeroRated)] = 0.0;
  return table;
}

namespace {

// Net redispatch energy of one unit over the horizon, offers positive.
double net_mwh(const Scenario& scenario, const DispatchSolution& solution,
               size_t unit) {
  double acc = 0.0;
  for (int t = 0; t < scenario.horizon; ++t) {
    const size_t tt = static_cast<size_t>(t);
    for (const auto& rank : solution.accepted_offer[unit])
      acc += rank[tt] * scenario.period_hours;
    for (const auto& rank : solution.accepted_bid[unit])
      acc -= rank[tt] * scenario.period_hours;
  }
  return acc;
}

}  // namespace

EmissionDelta emission_delta(const Scenario& base_scenario,
                             const DispatchSolution& base,
                             const Scenario& test_scenario,
                             const DispatchSolution& test,
                             const IntensityTable& intensities) {
  if (base_scenario.horizon != test_scenario.horizon ||
      base_scenario.period_hours != test_scenario.period_hours)
    throw ValidationError("emission delta requires matching horizons");
  if (base_scenario.units.size() != test_scenario.units.size())
    throw ValidationError("emission delta requires matching unit lists");
  for (size_t u = 0; u < base_scenario.units.size(); ++u)
    if (base_scenario.units[u].id != test_scenario.units[u].id ||
        base_scenario.units[u].fuel != test_scenario.units[u].fuel)
      throw ValidationError("emission delta requires matching unit lists");

  EmissionDelta delta;
  for (size_t u = 0; u < base_scenario.units.size(); ++u) {
    const auto fuel = static_cast<size_t>(base_scenario.units[u].fuel);
    delta.per_fuel_mwh[fuel] += net_mwh(test_scenario, test, u) -
                                net_mwh(base_scenario, base, u);
  }
  for (size_t f = 0; f < kFuelCount; ++f) {
    delta.per_fuel_kgco2[f] =
        intensities.kgco2_per_mwh[f] * delta.per_fuel_mwh[f];
    delta.total_kgco2 += delta.per_fuel_kgco2[f];
  }
  delta.rate_kgco2_per_h =
      delta.total_kgco2 /
      (base_scenario.horizon * base_scenario.period_hours);
  return delta;
}

void write_emission_csv(const EmissionDelta& delta, std::ostream& out) {
  out << "fuel,delta_mwh,delta_kgco2\n";
  for (size_t f = 0; f < kFuelCount; ++f)
    out << fmt::format("{},{:.6f},{:.6f}\n", to_string(static_cast<FuelType>(f)),
                       delta.per_fuel_mwh[f], delta.per_fuel_kgco2[f]);
  double total_mwh = 0.0;
  for (double v : delta.per_fuel_mwh) total_mwh += v;
  out << fmt::format("total,{:.6f},{:.6f}\n", total_mwh, delta.total_kgco2);
}

}  // namespace bmsim
