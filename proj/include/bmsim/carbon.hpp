#pragma once

#include <array>
#include <iosfwd>

#include "bmsim/dispatch.hpp"
#include "bmsim/domain.hpp"

namespace bmsim {

// Operational carbon intensity per fuel, kgCO2/MWh.
struct IntensityTable {
  std::array<double, kFuelCount> kgco2_per_mwh{};
  double operator[](FuelType fuel) const {
    return kgco2_per_mwh[static_cast<size_t>(fuel)];
  }
};

// Coal 937, OCGT 651, CCGT 394, Other 300, Biomass 120; nuclear, hydro,
// wind, pumped storage and zero-rated embedded resources count as zero.
IntensityTable default_intensities();

struct EmissionDelta {
  double total_kgco2 = 0.0;
  double rate_kgco2_per_h = 0.0;
  std::array<double, kFuelCount> per_fuel_kgco2{};
  std::array<double, kFuelCount> per_fuel_mwh{};
};

// Emission change of a test dispatch against a base dispatch over the same
// horizon: per-unit net generation deltas (offers positive, bids negative)
// weighted by fuel intensity. Exactly antisymmetric under swapping the two
// dispatches.
EmissionDelta emission_delta(const Scenario& base_scenario,
                             const DispatchSolution& base,
                             const Scenario& test_scenario,
                             const DispatchSolution& test,
                             const IntensityTable& intensities);

// `fuel,delta_mwh,delta_kgco2` rows plus a totals row.
void write_emission_csv(const EmissionDelta& delta, std::ostream& out);

}  // namespace bmsim
