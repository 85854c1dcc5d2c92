#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bmsim {

// Fuel categories used for carbon accounting. Matches the registered fuel
// type strings used in unit data.
enum class FuelType {
  Coal,
  Ocgt,
  Ccgt,
  Other,
  Biomass,
  Nuclear,
  Npshyd,
  Wind,
  Psh,
  ZeroRated,
};
inline constexpr int kFuelCount = 10;

std::string_view to_string(FuelType fuel);
std::optional<FuelType> fuel_from_string(std::string_view name);

enum class Tech { Lib, Vrfb, Psh, Hes };
inline constexpr int kTechCount = 4;

std::string_view to_string(Tech tech);
std::optional<Tech> tech_from_string(std::string_view name);

// Round-trip efficiency of the whole charge/discharge cycle.
double round_trip_efficiency(Tech tech);

// Throughput cost in GBP per MWh, charged on both charge and discharge
// energy at the grid side.
double default_degradation_tariff(Tech tech);

using NodeId = std::string;

struct Node {
  NodeId id;
  std::string zone;
};

struct Line {
  NodeId from;
  NodeId to;
  double susceptance_pu = 0.0;
  double capacity_mw = 0.0;
};

struct Network {
  // MW per rad for a line of 1 pu susceptance.
  static constexpr double kBaseMva = 100.0;
  // Voltage angle box in radians, reference node pinned at zero.
  static constexpr double kAngleBoundRad = 0.5;

  std::vector<Node> nodes;
  std::vector<Line> lines;
  // Angle reference; by convention the first node listed.
  NodeId reference_node;

  int node_index(const NodeId& id) const;
  const std::string& zone_of(const NodeId& id) const;
};

struct LadderBand {
  double price_gbp_per_mwh = 0.0;
  double volume_mw = 0.0;
};

struct BmUnit {
  std::string id;
  NodeId node;
  FuelType fuel = FuelType::Other;
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
  // Scheduled output per settlement period, MW.
  std::vector<double> fpn_mw;
  // Offers raise output above FPN, prices nondecreasing by rank.
  std::vector<LadderBand> offer_ladder;
  // Bids lower output below FPN, prices nonincreasing by rank.
  std::vector<LadderBand> bid_ladder;
};

struct StorageAsset {
  Tech technology = Tech::Lib;
  NodeId node;
  double rated_power_mw = 0.0;
  double duration_h = 0.0;
  double energy_capacity_mwh = 0.0;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double degradation_tariff_gbp_per_mwh = 0.0;
  double soc_initial_mwh = 0.0;
};

// Optional per-asset overrides applied on top of technology defaults.
struct StorageOverrides {
  std::optional<double> eta_charge;
  std::optional<double> eta_discharge;
  std::optional<double> degradation_tariff_gbp_per_mwh;
  std::optional<double> soc_initial_mwh;
};

struct Scenario {
  Network network;
  std::vector<BmUnit> units;
  std::vector<StorageAsset> storage_fleet;
  // Residual imbalance in MW, indexed [node][period]. Positive means the
  // node is short and needs upward action.
  std::vector<std::vector<double>> imbalance_mw;
  // Number of settlement periods.
  int horizon = 0;
  double period_hours = 0.5;
};

// Builds an asset from technology defaults: split efficiencies as
// sqrt(round trip), default tariff, soc_initial at half capacity.
StorageAsset make_storage(Tech tech, NodeId node, double rated_power_mw,
                          double duration_h,
                          const StorageOverrides& overrides = {});

std::string asset_label(const StorageAsset& asset);

void validate_network(const Network& network);
void validate_unit(const BmUnit& unit, const Network& network, int horizon);
void validate_asset(const StorageAsset& asset, const Network& network);
void validate_scenario(const Scenario& scenario);

}  // namespace bmsim
