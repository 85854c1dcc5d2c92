#pragma once

#include <filesystem>
#include <iosfwd>

#include "bmsim/domain.hpp"

namespace bmsim {

// File set describing one scenario on disk.
struct ScenarioPaths {
  std::filesystem::path network_csv;
  std::filesystem::path units_csv;
  std::filesystem::path fpn_csv;
  std::filesystem::path ladders_csv;
  std::filesystem::path imbalance_csv;
  // Optional; absent means an empty storage fleet.
  std::filesystem::path storage_json;

  // Conventional file names inside a scenario directory.
  static ScenarioPaths in_dir(const std::filesystem::path& dir);
};

// Loads and validates a scenario. The horizon is the largest period index
// seen in fpn.csv or imbalance.csv; missing (entity, period) rows are zero.
Scenario load_scenario(const ScenarioPaths& paths);
Scenario load_scenario_dir(const std::filesystem::path& dir);

// Writes the scenario back out in the same formats, one row per
// entity/period so a reload reproduces the scenario field by field.
void save_scenario(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace bmsim
