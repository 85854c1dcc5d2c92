#include "bmsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bmsim/carbon.hpp"
#include "bmsim/dispatch.hpp"
#include "bmsim/error.hpp"
#include "bmsim/io.hpp"
#include "bmsim/log.hpp"
#include "bmsim/valuation.hpp"

namespace bmsim {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double number_field(const ordered_json& obj, const std::string& where,
                    const std::string& key) {
  const auto& value = obj.at(key);
  if (!value.is_number())
    throw ValidationError(
        fmt::format("{}: '{}' must be a number", where, key));
  return value.get<double>();
}

std::vector<std::string> string_list(const ordered_json& obj,
                                     const std::string& where,
                                     const std::string& key) {
  const auto& value = obj.at(key);
  if (!value.is_array())
    throw ValidationError(
        fmt::format("{}: '{}' must be an array of strings", where, key));
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string())
      throw ValidationError(
          fmt::format("{}: '{}' must be an array of strings", where, key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

ValuationConfig load_valuation(const ordered_json& obj,
                               const std::string& where) {
  ValuationConfig val;
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (key == "cm_price_gbp_per_mw_year")
      val.cm_price_gbp_per_mw_year = number_field(obj, where, key);
    else if (key == "cm_derating")
      val.cm_derating = number_field(obj, where, key);
    else if (key == "dc_price_gbp_per_mw_h")
      val.dc_price_gbp_per_mw_h = number_field(obj, where, key);
    else if (key == "dc_hours_per_year")
      val.dc_hours_per_year = number_field(obj, where, key);
    else if (key == "nbb_annualization")
      val.nbb_annualization = number_field(obj, where, key);
    else if (key != "note")
      throw ValidationError(fmt::format("{}: unknown key '{}'", where, key));
  }
  return val;
}

}  // namespace

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(
        fmt::format("{}: {}", path.filename().string(), e.what()));
  }
  const std::string where = path.filename().string();
  if (!doc.is_object())
    throw ValidationError(fmt::format("{}: expected a JSON object", where));

  SweepConfig config;
  bool saw_scenario = false;
  bool saw_technologies = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "scenario") {
      if (!value.is_string())
        throw ValidationError(
            fmt::format("{}: 'scenario' must be a string", where));
      config.scenario_dir = value.get<std::string>();
      saw_scenario = true;
    } else if (key == "technologies") {
      for (const auto& name : string_list(doc, where, key)) {
        auto tech = tech_from_string(name);
        if (!tech)
          throw ValidationError(
              fmt::format("{}: unknown technology '{}'", where, name));
        config.technologies.push_back(*tech);
      }
      saw_technologies = true;
    } else if (key == "sizes_mw") {
      if (!value.is_array())
        throw ValidationError(
            fmt::format("{}: 'sizes_mw' must be an array of numbers", where));
      config.sizes_mw.clear();
      for (const auto& item : value) {
        if (!item.is_number())
          throw ValidationError(fmt::format(
              "{}: 'sizes_mw' must be an array of numbers", where));
        config.sizes_mw.push_back(item.get<double>());
      }
    } else if (key == "duration_h") {
      config.duration_h = number_field(doc, where, key);
    } else if (key == "nodes") {
      config.nodes = string_list(doc, where, key);
    } else if (key == "zones") {
      config.zones = string_list(doc, where, key);
    } else if (key == "valuation") {
      if (!value.is_object())
        throw ValidationError(
            fmt::format("{}: 'valuation' must be an object", where));
      config.valuation = load_valuation(value, where + " valuation");
    } else if (key == "out_dir") {
      if (!value.is_string())
        throw ValidationError(
            fmt::format("{}: 'out_dir' must be a string", where));
      config.out_dir = value.get<std::string>();
    } else if (key == "parallelism") {
      if (!value.is_number_integer())
        throw ValidationError(
            fmt::format("{}: 'parallelism' must be an integer", where));
      config.parallelism = value.get<int>();
    } else if (key != "note") {
      throw ValidationError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
  if (!saw_scenario || !saw_technologies)
    throw ValidationError(
        fmt::format("{}: requires scenario and technologies", where));

  if (config.scenario_dir.is_relative())
    config.scenario_dir = path.parent_path() / config.scenario_dir;
  validate_sweep_config(config);
  return config;
}

void validate_sweep_config(const SweepConfig& config) {
  if (config.scenario_dir.empty())
    throw ValidationError("sweep config: scenario path is empty");
  if (config.technologies.empty())
    throw ValidationError("sweep config: technology list is empty");
  std::set<Tech> seen_tech;
  for (Tech tech : config.technologies)
    if (!seen_tech.insert(tech).second)
      throw ValidationError(fmt::format(
          "sweep config: duplicate technology '{}'", to_string(tech)));
  if (config.sizes_mw.empty())
    throw ValidationError("sweep config: size list is empty");
  std::set<double> seen_size;
  for (double size : config.sizes_mw) {
    if (!std::isfinite(size) || size <= 0.0)
      throw ValidationError(
          fmt::format("sweep config: sizes must be positive, got {}", size));
    if (!seen_size.insert(size).second)
      throw ValidationError(
          fmt::format("sweep config: duplicate size {}", size));
  }
  if (!std::isfinite(config.duration_h) || config.duration_h <= 0.0)
    throw ValidationError(fmt::format(
        "sweep config: duration must be positive, got {}", config.duration_h));
  if (config.nodes.empty() && config.zones.empty())
    throw ValidationError("sweep config: no candidate nodes or zones");
  if (config.parallelism < 1)
    throw ValidationError(fmt::format(
        "sweep config: parallelism must be at least 1, got {}",
        config.parallelism));

  const ValuationConfig& val = config.valuation;
  if (!std::isfinite(val.cm_price_gbp_per_mw_year) ||
      val.cm_price_gbp_per_mw_year < 0.0)
    throw ValidationError("sweep config: CM price must be nonnegative");
  if (!std::isfinite(val.cm_derating) || val.cm_derating < 0.0 ||
      val.cm_derating > 1.0)
    throw ValidationError(fmt::format(
        "sweep config: CM derating must lie in [0, 1], got {}",
        val.cm_derating));
  if (!std::isfinite(val.dc_price_gbp_per_mw_h) ||
      val.dc_price_gbp_per_mw_h < 0.0)
    throw ValidationError("sweep config: DC price must be nonnegative");
  if (!std::isfinite(val.dc_hours_per_year) || val.dc_hours_per_year < 0.0)
    throw ValidationError("sweep config: DC hours must be nonnegative");
  if (!std::isfinite(val.nbb_annualization) || val.nbb_annualization < 0.0)
    throw ValidationError(
        "sweep config: NBB annualization must be nonnegative");
}

namespace {

struct SweepJob {
  Tech tech;
  double size_mw;
  std::string zone;
  NodeId node;
};

std::vector<SweepJob> make_jobs(const SweepConfig& config,
                                const Network& network) {
  std::set<NodeId> picked;
  for (const auto& id : config.nodes) {
    if (network.node_index(id) >= 0)
      picked.insert(id);
    else
      log::info("sweep: candidate node '{}' is not in the network; skipped",
                id);
  }
  for (const auto& zone : config.zones) {
    bool hit = false;
    for (const auto& node : network.nodes) {
      if (node.zone == zone) {
        picked.insert(node.id);
        hit = true;
      }
    }
    if (!hit)
      log::info("sweep: candidate zone '{}' is not in the network; skipped",
                zone);
  }
  if (picked.empty())
    throw ValidationError("sweep config: no candidate matches a network node");

  std::vector<SweepJob> jobs;
  for (Tech tech : config.technologies)
    for (double size : config.sizes_mw)
      for (const auto& node : picked)
        jobs.push_back({tech, size, network.zone_of(node), node});
  std::sort(jobs.begin(), jobs.end(),
            [](const SweepJob& a, const SweepJob& b) {
              return std::make_tuple(to_string(a.tech), a.size_mw, a.zone,
                                     a.node) <
                     std::make_tuple(to_string(b.tech), b.size_mw, b.zone,
                                     b.node);
            });
  return jobs;
}

SweepRow run_job(const SweepJob& job, const SweepConfig& config,
                 const Scenario& base_scenario, const DispatchSolution& base,
                 double base_cost, const IntensityTable& intensities) {
  SweepRow row;
  row.tech = job.tech;
  row.size_mw = job.size_mw;
  row.zone = job.zone;
  row.node = job.node;
  try {
    Scenario with = base_scenario;
    with.storage_fleet.push_back(
        make_storage(job.tech, job.node, job.size_mw, config.duration_h));
    const DispatchSolution solution = solve_dispatch(with);
    row.cost_delta_gbp = bm_cost(with, solution) - base_cost;
    row.emission_rate_kgco2_per_h =
        emission_delta(base_scenario, base, with, solution, intensities)
            .rate_kgco2_per_h;
    row.kappa = k_fraction(with, solution, 0);

    const ValuationConfig& val = config.valuation;
    RevenueInputs rev;
    rev.nbb_per_year_gbp = val.nbb_annualization * -row.cost_delta_gbp;
    rev.kappa = row.kappa;
    rev.cm_price_gbp_per_mw_year = val.cm_price_gbp_per_mw_year;
    rev.cm_derating = val.cm_derating;
    rev.dc_price_gbp_per_mw_h = val.dc_price_gbp_per_mw_h;
    rev.dc_hours_per_year = val.dc_hours_per_year;
    rev.rated_power_mw = job.size_mw;

    row.nbb_per_year_gbp = rev.nbb_per_year_gbp;
    row.cmr_gbp_per_year =
        rev.cm_derating * rev.rated_power_mw * rev.cm_price_gbp_per_mw_year;
    row.dcr_gbp_per_year = (1.0 - rev.kappa) * rev.rated_power_mw *
                           rev.dc_price_gbp_per_mw_h * rev.dc_hours_per_year;

    const TechEconomics econ = table2_defaults(job.tech, job.size_mw);
    const auto sensitivity = capex_sensitivity(rev, econ);
    row.npv_gbp = sensitivity[0].second.npv_gbp;
    row.npv_capex70_gbp = sensitivity[1].second.npv_gbp;
    row.npv_capex30_gbp = sensitivity[2].second.npv_gbp;
  } catch (const Error& e) {
    row.error = e.what();
    log::info("sweep: {} {:g}MW at {} failed: {}", to_string(job.tech),
              job.size_mw, job.node, e.what());
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  validate_sweep_config(config);
  return run_sweep(config, load_scenario_dir(config.scenario_dir));
}

SweepResult run_sweep(const SweepConfig& config, const Scenario& scenario) {
  validate_sweep_config(config);
  if (!scenario.storage_fleet.empty())
    throw ValidationError("sweep scenario must not already contain storage");

  const std::vector<SweepJob> jobs = make_jobs(config, scenario.network);

  SweepResult result;
  const DispatchSolution base = solve_dispatch(scenario);
  result.base_cost_gbp = bm_cost(scenario, base);
  result.base_solve_count = 1;
  log::info("sweep: base cost {:.2f} GBP over {} periods; {} rows",
            result.base_cost_gbp, scenario.horizon, jobs.size());

  const IntensityTable intensities = default_intensities();
  result.rows.resize(jobs.size());

  const int workers = static_cast<int>(std::min<size_t>(
      static_cast<size_t>(config.parallelism), jobs.size()));
  if (workers <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i)
      result.rows[i] = run_job(jobs[i], config, scenario, base,
                               result.base_cost_gbp, intensities);
    return result;
  }

  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto work = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        result.rows[i] = run_job(jobs[i], config, scenario, base,
                                 result.base_cost_gbp, intensities);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
        next.store(jobs.size());
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

namespace {

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out)
    throw Error(fmt::format("error writing '{}'", path.string()));
}

void write_sweep_csv(const SweepResult& result,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "tech,size_mw,zone,node,cost_delta_gbp,emission_rate_kgco2_per_h,"
         "kappa,npv_gbp,npv_capex70_gbp,npv_capex30_gbp,error\n";
  for (const auto& row : result.rows) {
    if (row.error.empty()) {
      out << fmt::format("{},{:g},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},"
                         "{:.6f},\n",
                         to_string(row.tech), row.size_mw,
                         csv_escape(row.zone), csv_escape(row.node),
                         row.cost_delta_gbp, row.emission_rate_kgco2_per_h,
                         row.kappa, row.npv_gbp, row.npv_capex70_gbp,
                         row.npv_capex30_gbp);
    } else {
      out << fmt::format("{},{:g},{},{},,,,,,,{}\n", to_string(row.tech),
                         row.size_mw, csv_escape(row.zone),
                         csv_escape(row.node), csv_escape(row.error));
    }
  }
  finish(out, path);
}

void write_by_zone_csv(const SweepResult& result,
                       const std::filesystem::path& path) {
  std::map<std::string, std::pair<const SweepRow*, const SweepRow*>> best;
  for (const auto& row : result.rows) {
    if (!row.error.empty()) continue;
    auto& [by_cost, by_co2] = best[row.zone];
    if (!by_cost || row.cost_delta_gbp < by_cost->cost_delta_gbp)
      by_cost = &row;
    if (!by_co2 || row.emission_rate_kgco2_per_h < by_co2->emission_rate_kgco2_per_h)
      by_co2 = &row;
  }
  auto out = open_out(path);
  out << "zone,best_cost_tech,best_cost_size_mw,best_cost_node,"
         "best_cost_delta_gbp,best_co2_tech,best_co2_size_mw,best_co2_node,"
         "best_co2_rate_kgco2_per_h\n";
  for (const auto& [zone, pair] : best) {
    const auto& [by_cost, by_co2] = pair;
    out << fmt::format("{},{},{:g},{},{:.6f},{},{:g},{},{:.6f}\n",
                       csv_escape(zone), to_string(by_cost->tech),
                       by_cost->size_mw, csv_escape(by_cost->node),
                       by_cost->cost_delta_gbp, to_string(by_co2->tech),
                       by_co2->size_mw, csv_escape(by_co2->node),
                       by_co2->emission_rate_kgco2_per_h);
  }
  finish(out, path);
}

void write_summary_json(const SweepResult& result,
                        const std::filesystem::path& path) {
  struct Extent {
    double lo = 0.0, hi = 0.0;
    bool seen = false;
    void add(double v) {
      lo = seen ? std::min(lo, v) : v;
      hi = seen ? std::max(hi, v) : v;
      seen = true;
    }
  };
  struct TechExtents {
    Extent cost, co2, npv;
  };
  std::map<std::string, TechExtents> per_tech;
  int failed = 0;
  for (const auto& row : result.rows) {
    if (!row.error.empty()) {
      ++failed;
      continue;
    }
    auto& ext = per_tech[std::string(to_string(row.tech))];
    ext.cost.add(row.cost_delta_gbp);
    ext.co2.add(row.emission_rate_kgco2_per_h);
    ext.npv.add(row.npv_gbp);
  }

  ordered_json doc;
  doc["base_cost_gbp"] = result.base_cost_gbp;
  doc["rows"] = result.rows.size();
  doc["failed_rows"] = failed;
  ordered_json techs = ordered_json::object();
  for (const auto& [name, ext] : per_tech) {
    ordered_json entry;
    entry["cost_delta_gbp"] = {{"min", ext.cost.lo}, {"max", ext.cost.hi}};
    entry["emission_rate_kgco2_per_h"] = {{"min", ext.co2.lo},
                                          {"max", ext.co2.hi}};
    entry["npv_gbp"] = {{"min", ext.npv.lo}, {"max", ext.npv.hi}};
    techs[name] = std::move(entry);
  }
  doc["technologies"] = std::move(techs);

  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

void write_valuations_json(const SweepResult& result,
                           const std::filesystem::path& path) {
  ordered_json doc = ordered_json::array();
  for (const auto& row : result.rows) {
    if (!row.error.empty()) continue;
    ValuationReport report;
    report.tech = row.tech;
    report.node = row.node;
    report.zone = row.zone;
    report.kappa = row.kappa;
    report.nbb_per_year_gbp = row.nbb_per_year_gbp;
    report.cmr_gbp_per_year = row.cmr_gbp_per_year;
    report.dcr_gbp_per_year = row.dcr_gbp_per_year;
    report.npv_gbp = row.npv_gbp;
    report.sensitivity = {{kCapexFactors[0], row.npv_gbp},
                          {kCapexFactors[1], row.npv_capex70_gbp},
                          {kCapexFactors[2], row.npv_capex30_gbp}};
    doc.push_back(to_json(report));
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

}  // namespace

void emit_reports(const SweepResult& result,
                  const std::filesystem::path& dir) {
  if (result.rows.empty())
    throw ValidationError("sweep result has no rows");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(fmt::format("cannot create output directory '{}': {}",
                            dir.string(), ec.message()));
  write_sweep_csv(result, dir / "sweep.csv");
  write_by_zone_csv(result, dir / "by_zone.csv");
  write_summary_json(result, dir / "summary.json");
  write_valuations_json(result, dir / "valuations.json");
  log::info("sweep: wrote {} rows to {}", result.rows.size(), dir.string());
}

}  // namespace bmsim
