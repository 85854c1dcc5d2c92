#include "bmsim/domain.hpp"

#include <fmt/core.h>

#include <cmath>
#include <set>

#include "bmsim/error.hpp"

namespace bmsim {

namespace {

struct FuelName {
  FuelType fuel;
  std::string_view name;
};

constexpr FuelName kFuelNames[] = {
    {FuelType::Coal, "Coal"},       {FuelType::Ocgt, "OCGT"},
    {FuelType::Ccgt, "CCGT"},       {FuelType::Other, "Other"},
    {FuelType::Biomass, "Biomass"}, {FuelType::Nuclear, "Nuclear"},
    {FuelType::Npshyd, "NPSHYD"},   {FuelType::Wind, "Wind"},
    {FuelType::Psh, "PSH"},         {FuelType::ZeroRated, "ZeroRated"},
};

struct TechName {
  Tech tech;
  std::string_view name;
};

constexpr TechName kTechNames[] = {
    {Tech::Lib, "LIB"},
    {Tech::Vrfb, "VRFB"},
    {Tech::Psh, "PSH"},
    {Tech::Hes, "HES"},
};

}  // namespace

std::string_view to_string(FuelType fuel) {
  for (const auto& entry : kFuelNames)
    if (entry.fuel == fuel) return entry.name;
  return "?";
}

std::optional<FuelType> fuel_from_string(std::string_view name) {
  for (const auto& entry : kFuelNames)
    if (entry.name == name) return entry.fuel;
  return std::nullopt;
}

std::string_view to_string(Tech tech) {
  for (const auto& entry : kTechNames)
    if (entry.tech == tech) return entry.name;
  return "?";
}

std::optional<Tech> tech_from_string(std::string_view name) {
  for (const auto& entry : kTechNames)
    if (entry.name == name) return entry.tech;
  return std::nullopt;
}

double round_trip_efficiency(Tech tech) {
  switch (tech) {
    case Tech::Lib: return 0.85;
    case Tech::Vrfb: return 0.64;
    case Tech::Psh: return 0.79;
    case Tech::Hes: return 0.30;
  }
  return 0.0;
}

double default_degradation_tariff(Tech tech) {
  switch (tech) {
    case Tech::Lib: return 13.17;
    case Tech::Vrfb: return 0.78;
    case Tech::Psh: return 0.00;
    case Tech::Hes: return 0.23;
  }
  return 0.0;
}

int Network::node_index(const NodeId& id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

const std::string& Network::zone_of(const NodeId& id) const {
  int i = node_index(id);
  if (i < 0) throw ValidationError(fmt::format("unknown node '{}'", id));
  return nodes[static_cast<size_t>(i)].zone;
}

StorageAsset make_storage(Tech tech, NodeId node, double rated_power_mw,
                          double duration_h, const StorageOverrides& overrides) {
  if (!(rated_power_mw > 0.0))
    throw ValidationError(
        fmt::format("storage rated power must be positive, got {}", rated_power_mw));
  if (!(duration_h > 0.0))
    throw ValidationError(
        fmt::format("storage duration must be positive, got {}", duration_h));

  StorageAsset asset;
  asset.technology = tech;
  asset.node = std::move(node);
  asset.rated_power_mw = rated_power_mw;
  asset.duration_h = duration_h;
  asset.energy_capacity_mwh = rated_power_mw * duration_h;

  const double rt = round_trip_efficiency(tech);
  if (overrides.eta_charge && overrides.eta_discharge) {
    asset.eta_charge = *overrides.eta_charge;
    asset.eta_discharge = *overrides.eta_discharge;
  } else if (overrides.eta_charge) {
    asset.eta_charge = *overrides.eta_charge;
    asset.eta_discharge = rt / asset.eta_charge;
  } else if (overrides.eta_discharge) {
    asset.eta_discharge = *overrides.eta_discharge;
    asset.eta_charge = rt / asset.eta_discharge;
  } else {
    asset.eta_charge = std::sqrt(rt);
    asset.eta_discharge = std::sqrt(rt);
  }

  asset.degradation_tariff_gbp_per_mwh =
      overrides.degradation_tariff_gbp_per_mwh.value_or(
          default_degradation_tariff(tech));
  asset.soc_initial_mwh =
      overrides.soc_initial_mwh.value_or(0.5 * asset.energy_capacity_mwh);
  return asset;
}

std::string asset_label(const StorageAsset& asset) {
  return fmt::format("{} {:g}MW/{:g}h at {}", to_string(asset.technology),
                     asset.rated_power_mw, asset.duration_h, asset.node);
}

void validate_network(const Network& network) {
  if (network.nodes.empty()) throw ValidationError("network has no nodes");
  std::set<NodeId> seen;
  for (const auto& node : network.nodes) {
    if (node.id.empty()) throw ValidationError("node id must not be empty");
    if (!seen.insert(node.id).second)
      throw ValidationError(fmt::format("duplicate node id '{}'", node.id));
    if (node.zone.empty())
      throw ValidationError(fmt::format("node '{}' has empty zone", node.id));
  }
  if (network.node_index(network.reference_node) < 0)
    throw ValidationError(
        fmt::format("reference node '{}' is not in the node list",
                    network.reference_node));
  for (const auto& line : network.lines) {
    if (network.node_index(line.from) < 0 || network.node_index(line.to) < 0)
      throw ValidationError(fmt::format(
          "line {}-{} references an unknown node", line.from, line.to));
    if (line.from == line.to)
      throw ValidationError(
          fmt::format("line {}-{} connects a node to itself", line.from, line.to));
    if (!(line.susceptance_pu > 0.0))
      throw ValidationError(
          fmt::format("line {}-{}: susceptance must be positive", line.from,
                      line.to));
    if (!(line.capacity_mw > 0.0))
      throw ValidationError(fmt::format(
          "line {}-{}: capacity must be positive", line.from, line.to));
  }
}

void validate_unit(const BmUnit& unit, const Network& network, int horizon) {
  if (unit.id.empty()) throw ValidationError("unit id must not be empty");
  if (network.node_index(unit.node) < 0)
    throw ValidationError(
        fmt::format("unit '{}': unknown node '{}'", unit.id, unit.node));
  if (unit.p_min_mw > unit.p_max_mw)
    throw ValidationError(fmt::format("unit '{}': p_min exceeds p_max", unit.id));
  if (static_cast<int>(unit.fpn_mw.size()) != horizon)
    throw ValidationError(
        fmt::format("unit '{}': fpn series has {} periods, scenario has {}",
                    unit.id, unit.fpn_mw.size(), horizon));

  double offer_volume = 0.0;
  for (size_t r = 0; r < unit.offer_ladder.size(); ++r) {
    const auto& band = unit.offer_ladder[r];
    if (band.volume_mw < 0.0)
      throw ValidationError(
          fmt::format("unit '{}': offer volumes must be nonnegative", unit.id));
    if (r > 0 && band.price_gbp_per_mwh <
                     unit.offer_ladder[r - 1].price_gbp_per_mwh)
      throw ValidationError(
          fmt::format("unit '{}': offer prices must be nondecreasing", unit.id));
    offer_volume += band.volume_mw;
  }
  double bid_volume = 0.0;
  for (size_t r = 0; r < unit.bid_ladder.size(); ++r) {
    const auto& band = unit.bid_ladder[r];
    if (band.volume_mw < 0.0)
      throw ValidationError(
          fmt::format("unit '{}': bid volumes must be nonnegative", unit.id));
    if (r > 0 &&
        band.price_gbp_per_mwh > unit.bid_ladder[r - 1].price_gbp_per_mwh)
      throw ValidationError(
          fmt::format("unit '{}': bid prices must be nonincreasing", unit.id));
    bid_volume += band.volume_mw;
  }

  for (int t = 0; t < horizon; ++t) {
    const double fpn = unit.fpn_mw[static_cast<size_t>(t)];
    if (fpn < unit.p_min_mw || fpn > unit.p_max_mw)
      throw ValidationError(fmt::format(
          "unit '{}': fpn {} in period {} outside [p_min, p_max]", unit.id, fpn,
          t + 1));
    if (fpn + offer_volume > unit.p_max_mw + 1e-9)
      throw ValidationError(fmt::format(
          "unit '{}': fpn plus offer volume exceeds p_max in period {}",
          unit.id, t + 1));
    if (fpn - bid_volume < unit.p_min_mw - 1e-9)
      throw ValidationError(fmt::format(
          "unit '{}': fpn minus bid volume falls below p_min in period {}",
          unit.id, t + 1));
  }
}

void validate_asset(const StorageAsset& asset, const Network& network) {
  const std::string label = asset_label(asset);
  if (network.node_index(asset.node) < 0)
    throw ValidationError(fmt::format("{}: unknown node", label));
  if (!(asset.rated_power_mw > 0.0))
    throw ValidationError(fmt::format("{}: rated power must be positive", label));
  if (!(asset.duration_h > 0.0))
    throw ValidationError(fmt::format("{}: duration must be positive", label));
  if (std::abs(asset.energy_capacity_mwh -
               asset.rated_power_mw * asset.duration_h) > 1e-9)
    throw ValidationError(
        fmt::format("{}: energy capacity does not match power times duration",
                    label));
  if (!(asset.eta_charge > 0.0) || asset.eta_charge > 1.0)
    throw ValidationError(
        fmt::format("{}: charge efficiency must be in (0, 1]", label));
  if (!(asset.eta_discharge > 0.0) || asset.eta_discharge > 1.0)
    throw ValidationError(
        fmt::format("{}: discharge efficiency must be in (0, 1]", label));
  const double rt = round_trip_efficiency(asset.technology);
  if (std::abs(asset.eta_charge * asset.eta_discharge - rt) > 1e-9)
    throw ValidationError(fmt::format(
        "{}: efficiency product {} does not match round trip {}", label,
        asset.eta_charge * asset.eta_discharge, rt));
  if (asset.degradation_tariff_gbp_per_mwh < 0.0)
    throw ValidationError(
        fmt::format("{}: degradation tariff must be nonnegative", label));
  if (asset.soc_initial_mwh < 0.0 ||
      asset.soc_initial_mwh > asset.energy_capacity_mwh + 1e-9)
    throw ValidationError(fmt::format(
        "{}: initial state of charge outside [0, capacity]", label));
}

void validate_scenario(const Scenario& scenario) {
  validate_network(scenario.network);
  if (scenario.horizon <= 0)
    throw ValidationError("scenario horizon must be at least one period");
  if (!(scenario.period_hours > 0.0))
    throw ValidationError("period length must be positive");

  std::set<std::string> unit_ids;
  for (const auto& unit : scenario.units) {
    if (!unit_ids.insert(unit.id).second)
      throw ValidationError(fmt::format("duplicate unit id '{}'", unit.id));
    validate_unit(unit, scenario.network, scenario.horizon);
  }
  for (const auto& asset : scenario.storage_fleet)
    validate_asset(asset, scenario.network);

  if (scenario.imbalance_mw.size() != scenario.network.nodes.size())
    throw ValidationError(
        fmt::format("imbalance has {} node rows, network has {} nodes",
                    scenario.imbalance_mw.size(), scenario.network.nodes.size()));
  for (size_t n = 0; n < scenario.imbalance_mw.size(); ++n)
    if (static_cast<int>(scenario.imbalance_mw[n].size()) != scenario.horizon)
      throw ValidationError(fmt::format(
          "imbalance for node '{}' has {} periods, scenario has {}",
          scenario.network.nodes[n].id, scenario.imbalance_mw[n].size(),
          scenario.horizon));
}

}  // namespace bmsim
