#include "bmsim/io.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bmsim/error.hpp"
#include "bmsim/log.hpp"

namespace bmsim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty() && current.back() == '\r') current.pop_back();
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_number(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ValidationError(fmt::format("{}: bad number '{}'", where, text));
  return value;
}

int parse_positive_int(const std::string& text, const std::string& where,
                       const char* what) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || value < 1)
    throw ValidationError(fmt::format("{}: bad {} '{}'", where, what, text));
  return value;
}

struct CsvTable {
  std::string name;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path,
                  const std::string& expected_header) {
  CsvTable table;
  table.name = path.filename().string();
  auto lines = split_lines(read_file(path));
  if (lines.empty())
    throw ValidationError(fmt::format("{}: missing header", table.name));
  if (lines[0] != expected_header)
    throw ValidationError(fmt::format("{}: expected header '{}', got '{}'",
                                      table.name, expected_header, lines[0]));
  const size_t width = split_fields(expected_header).size();
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_fields(lines[i]);
    if (fields.size() != width)
      throw ValidationError(fmt::format("{} line {}: expected {} fields, got {}",
                                        table.name, i + 1, width, fields.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

Network load_network(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  auto lines = split_lines(read_file(path));

  size_t blank = 0;
  while (blank < lines.size() && !lines[blank].empty()) ++blank;
  if (blank == lines.size())
    throw ValidationError(
        fmt::format("{}: expected a blank line between the node and line "
                    "sections",
                    name));

  if (lines.empty() || lines[0] != "node,zone")
    throw ValidationError(fmt::format("{}: expected header 'node,zone'", name));

  Network network;
  for (size_t i = 1; i < blank; ++i) {
    auto fields = split_fields(lines[i]);
    if (fields.size() != 2)
      throw ValidationError(
          fmt::format("{} line {}: expected 'node,zone'", name, i + 1));
    network.nodes.push_back({fields[0], fields[1]});
  }

  size_t header = blank + 1;
  while (header < lines.size() && lines[header].empty()) ++header;
  if (header >= lines.size() ||
      lines[header] != "from,to,susceptance_pu,capacity_mw")
    throw ValidationError(fmt::format(
        "{}: expected header 'from,to,susceptance_pu,capacity_mw'", name));
  for (size_t i = header + 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_fields(lines[i]);
    if (fields.size() != 4)
      throw ValidationError(fmt::format(
          "{} line {}: expected 'from,to,susceptance_pu,capacity_mw'", name,
          i + 1));
    Line line;
    line.from = fields[0];
    line.to = fields[1];
    line.susceptance_pu =
        parse_number(fields[2], fmt::format("{} line {}", name, i + 1));
    line.capacity_mw =
        parse_number(fields[3], fmt::format("{} line {}", name, i + 1));
    network.lines.push_back(std::move(line));
  }

  if (network.nodes.empty())
    throw ValidationError(fmt::format("{}: no nodes", name));
  network.reference_node = network.nodes.front().id;
  return network;
}

std::vector<StorageAsset> load_storage(const std::filesystem::path& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(
        fmt::format("{}: {}", path.filename().string(), e.what()));
  }
  if (!doc.is_array())
    throw ValidationError(fmt::format("{}: expected a JSON array",
                                      path.filename().string()));

  std::vector<StorageAsset> fleet;
  for (size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    const std::string where =
        fmt::format("{} entry {}", path.filename().string(), i);
    if (!entry.is_object())
      throw ValidationError(fmt::format("{}: expected an object", where));
    for (const auto& [key, value] : entry.items()) {
      if (key != "technology" && key != "node" && key != "rated_power_mw" &&
          key != "duration_h" && key != "overrides")
        throw ValidationError(fmt::format("{}: unknown key '{}'", where, key));
    }
    if (!entry.contains("technology") || !entry.contains("node") ||
        !entry.contains("rated_power_mw") || !entry.contains("duration_h"))
      throw ValidationError(fmt::format(
          "{}: requires technology, node, rated_power_mw, duration_h", where));

    const std::string tech_name = entry["technology"].get<std::string>();
    auto tech = tech_from_string(tech_name);
    if (!tech)
      throw ValidationError(
          fmt::format("{}: unknown technology '{}'", where, tech_name));

    StorageOverrides overrides;
    if (entry.contains("overrides")) {
      const auto& ov = entry["overrides"];
      if (!ov.is_object())
        throw ValidationError(fmt::format("{}: overrides must be an object", where));
      for (const auto& [key, value] : ov.items()) {
        if (key == "eta_charge")
          overrides.eta_charge = value.get<double>();
        else if (key == "eta_discharge")
          overrides.eta_discharge = value.get<double>();
        else if (key == "degradation_tariff_gbp_per_mwh")
          overrides.degradation_tariff_gbp_per_mwh = value.get<double>();
        else if (key == "soc_initial_mwh")
          overrides.soc_initial_mwh = value.get<double>();
        else
          throw ValidationError(
              fmt::format("{}: unknown override '{}'", where, key));
      }
    }

    fleet.push_back(make_storage(*tech, entry["node"].get<std::string>(),
                                 entry["rated_power_mw"].get<double>(),
                                 entry["duration_h"].get<double>(), overrides));
  }
  return fleet;
}

}  // namespace

ScenarioPaths ScenarioPaths::in_dir(const std::filesystem::path& dir) {
  ScenarioPaths paths;
  paths.network_csv = dir / "network.csv";
  paths.units_csv = dir / "units.csv";
  paths.fpn_csv = dir / "fpn.csv";
  paths.ladders_csv = dir / "ladders.csv";
  paths.imbalance_csv = dir / "imbalance.csv";
  if (std::filesystem::exists(dir / "storage.json"))
    paths.storage_json = dir / "storage.json";
  return paths;
}

Scenario load_scenario(const ScenarioPaths& paths) {
  Scenario scenario;
  scenario.network = load_network(paths.network_csv);

  auto units_table = read_csv(paths.units_csv, "id,node,fuel,p_min,p_max");
  std::map<std::string, size_t> unit_index;
  for (const auto& row : units_table.rows) {
    BmUnit unit;
    unit.id = row[0];
    unit.node = row[1];
    auto fuel = fuel_from_string(row[2]);
    if (!fuel)
      throw ValidationError(fmt::format("units.csv: unit '{}': unknown fuel '{}'",
                                        unit.id, row[2]));
    unit.fuel = *fuel;
    unit.p_min_mw = parse_number(row[3], fmt::format("units.csv unit '{}'", unit.id));
    unit.p_max_mw = parse_number(row[4], fmt::format("units.csv unit '{}'", unit.id));
    if (unit_index.count(unit.id))
      throw ValidationError(fmt::format("units.csv: duplicate unit id '{}'", unit.id));
    unit_index[unit.id] = scenario.units.size();
    scenario.units.push_back(std::move(unit));
  }

  struct FpnRow {
    size_t unit;
    int period;
    double mw;
  };
  std::vector<FpnRow> fpn_rows;
  int horizon = 0;
  auto fpn_table = read_csv(paths.fpn_csv, "unit,period,mw");
  for (const auto& row : fpn_table.rows) {
    auto it = unit_index.find(row[0]);
    if (it == unit_index.end())
      throw ValidationError(fmt::format("fpn.csv: unknown unit '{}'", row[0]));
    int period = parse_positive_int(row[1], "fpn.csv", "period");
    fpn_rows.push_back(
        {it->second, period, parse_number(row[2], "fpn.csv")});
    horizon = std::max(horizon, period);
  }

  auto ladders_table =
      read_csv(paths.ladders_csv, "unit,side,rank,price_gbp_per_mwh,volume_mw");
  struct LadderRow {
    int rank;
    LadderBand band;
  };
  std::map<std::pair<size_t, bool>, std::vector<LadderRow>> ladder_rows;
  for (const auto& row : ladders_table.rows) {
    auto it = unit_index.find(row[0]);
    if (it == unit_index.end())
      throw ValidationError(fmt::format("ladders.csv: unknown unit '{}'", row[0]));
    bool is_offer;
    if (row[1] == "offer")
      is_offer = true;
    else if (row[1] == "bid")
      is_offer = false;
    else
      throw ValidationError(
          fmt::format("ladders.csv: side must be 'offer' or 'bid', got '{}'",
                      row[1]));
    int rank = parse_positive_int(row[2], "ladders.csv", "rank");
    LadderBand band{parse_number(row[3], "ladders.csv"),
                    parse_number(row[4], "ladders.csv")};
    ladder_rows[{it->second, is_offer}].push_back({rank, band});
  }
  for (auto& [key, rows] : ladder_rows) {
    std::sort(rows.begin(), rows.end(),
              [](const LadderRow& a, const LadderRow& b) { return a.rank < b.rank; });
    auto& unit = scenario.units[key.first];
    auto& ladder = key.second ? unit.offer_ladder : unit.bid_ladder;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].rank != static_cast<int>(r) + 1)
        throw ValidationError(fmt::format(
            "ladders.csv: unit '{}' {} ladder: ranks must be 1..n without gaps",
            unit.id, key.second ? "offer" : "bid"));
      ladder.push_back(rows[r].band);
    }
  }

  auto imbalance_table = read_csv(paths.imbalance_csv, "node,period,mw");
  struct ImbalanceRow {
    int node;
    int period;
    double mw;
  };
  std::vector<ImbalanceRow> imbalance_rows;
  for (const auto& row : imbalance_table.rows) {
    int node = scenario.network.node_index(row[0]);
    if (node < 0)
      throw ValidationError(
          fmt::format("imbalance.csv: unknown node '{}'", row[0]));
    int period = parse_positive_int(row[1], "imbalance.csv", "period");
    imbalance_rows.push_back({node, period, parse_number(row[2], "imbalance.csv")});
    horizon = std::max(horizon, period);
  }

  if (horizon == 0)
    throw ValidationError(
        "cannot infer horizon: fpn.csv and imbalance.csv have no data rows");
  scenario.horizon = horizon;

  for (auto& unit : scenario.units)
    unit.fpn_mw.assign(static_cast<size_t>(horizon), 0.0);
  for (const auto& row : fpn_rows)
    scenario.units[row.unit].fpn_mw[static_cast<size_t>(row.period - 1)] = row.mw;

  scenario.imbalance_mw.assign(scenario.network.nodes.size(),
                               std::vector<double>(static_cast<size_t>(horizon), 0.0));
  for (const auto& row : imbalance_rows)
    scenario.imbalance_mw[static_cast<size_t>(row.node)]
                         [static_cast<size_t>(row.period - 1)] = row.mw;

  if (!paths.storage_json.empty())
    scenario.storage_fleet = load_storage(paths.storage_json);

  validate_scenario(scenario);
  log::debug("loaded scenario: {} nodes, {} lines, {} units, {} assets, {} periods",
             scenario.network.nodes.size(), scenario.network.lines.size(),
             scenario.units.size(), scenario.storage_fleet.size(),
             scenario.horizon);
  return scenario;
}

Scenario load_scenario_dir(const std::filesystem::path& dir) {
  return load_scenario(ScenarioPaths::in_dir(dir));
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out)
      throw ValidationError(
          fmt::format("cannot write '{}'", (dir / name).string()));
    return out;
  };

  {
    auto out = open("network.csv");
    out << "node,zone\n";
    for (const auto& node : scenario.network.nodes)
      out << fmt::format("{},{}\n", node.id, node.zone);
    out << "\nfrom,to,susceptance_pu,capacity_mw\n";
    for (const auto& line : scenario.network.lines)
      out << fmt::format("{},{},{},{}\n", line.from, line.to,
                         line.susceptance_pu, line.capacity_mw);
  }
  {
    auto out = open("units.csv");
    out << "id,node,fuel,p_min,p_max\n";
    for (const auto& unit : scenario.units)
      out << fmt::format("{},{},{},{},{}\n", unit.id, unit.node,
                         to_string(unit.fuel), unit.p_min_mw, unit.p_max_mw);
  }
  {
    auto out = open("fpn.csv");
    out << "unit,period,mw\n";
    for (const auto& unit : scenario.units)
      for (int t = 0; t < scenario.horizon; ++t)
        out << fmt::format("{},{},{}\n", unit.id, t + 1,
                           unit.fpn_mw[static_cast<size_t>(t)]);
  }
  {
    auto out = open("ladders.csv");
    out << "unit,side,rank,price_gbp_per_mwh,volume_mw\n";
    for (const auto& unit : scenario.units) {
      for (size_t r = 0; r < unit.offer_ladder.size(); ++r)
        out << fmt::format("{},offer,{},{},{}\n", unit.id, r + 1,
                           unit.offer_ladder[r].price_gbp_per_mwh,
                           unit.offer_ladder[r].volume_mw);
      for (size_t r = 0; r < unit.bid_ladder.size(); ++r)
        out << fmt::format("{},bid,{},{},{}\n", unit.id, r + 1,
                           unit.bid_ladder[r].price_gbp_per_mwh,
                           unit.bid_ladder[r].volume_mw);
    }
  }
  {
    auto out = open("imbalance.csv");
    out << "node,period,mw\n";
    for (size_t n = 0; n < scenario.network.nodes.size(); ++n)
      for (int t = 0; t < scenario.horizon; ++t)
        out << fmt::format("{},{},{}\n", scenario.network.nodes[n].id, t + 1,
                           scenario.imbalance_mw[n][static_cast<size_t>(t)]);
  }
  {
    ordered_json doc = ordered_json::array();
    for (const auto& asset : scenario.storage_fleet) {
      ordered_json entry;
      entry["technology"] = std::string(to_string(asset.technology));
      entry["node"] = asset.node;
      entry["rated_power_mw"] = asset.rated_power_mw;
      entry["duration_h"] = asset.duration_h;
      ordered_json overrides;
      overrides["eta_charge"] = asset.eta_charge;
      overrides["eta_discharge"] = asset.eta_discharge;
      overrides["degradation_tariff_gbp_per_mwh"] =
          asset.degradation_tariff_gbp_per_mwh;
      overrides["soc_initial_mwh"] = asset.soc_initial_mwh;
      entry["overrides"] = std::move(overrides);
      doc.push_back(std::move(entry));
    }
    auto out = open("storage.json");
    out << doc.dump(2) << "\n";
  }
}

}  // namespace bmsim
