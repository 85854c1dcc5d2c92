#include "bmsim/valuation.hpp"

#include <fmt/core.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "bmsim/error.hpp"

namespace bmsim {

double residual_value(double capex_gbp, double lambda_rv) {
  if (!std::isfinite(capex_gbp) || !std::isfinite(lambda_rv))
    throw ValidationError("residual value inputs must be finite");
  if (lambda_rv < 0.0 || lambda_rv > 1.0)
    throw ValidationError("residual fraction must lie in [0, 1]");
  return lambda_rv * capex_gbp;
}

double annual_cash_flow(const RevenueInputs& rev, const TechEconomics& econ) {
  if (rev.kappa < 0.0 || rev.kappa > 1.0)
    throw ValidationError("kappa must lie in [0, 1]");
  const double bm = rev.kappa * rev.nbb_per_year_gbp;
  const double cm = rev.cm_derating * rev.rated_power_mw * rev.cm_price_gbp_per_mw_year;
  const double dc = (1.0 - rev.kappa) * rev.rated_power_mw *
                    rev.dc_price_gbp_per_mw_h * rev.dc_hours_per_year;
  return bm + cm + dc - econ.fixed_om_gbp_per_year;
}

NpvResult npv(double cash_per_year_gbp, const TechEconomics& econ) {
  if (econ.life_years < 1)
    throw ValidationError("asset life must be at least one year");
  NpvResult result;
  result.residual_value_gbp = residual_value(econ.capex_gbp, econ.lambda_rv);
  double acc = -econ.capex_gbp;
  double discount = 1.0;
  for (int y = 0; y <= econ.life_years; ++y) {
    result.cash_flows_gbp.push_back(cash_per_year_gbp);
    acc += cash_per_year_gbp / discount;
    discount *= 1.0 + econ.discount_rate;
  }
  acc += result.residual_value_gbp / discount;
  result.npv_gbp = acc;
  return result;
}

std::vector<std::pair<double, NpvResult>> capex_sensitivity(
    const RevenueInputs& rev, const TechEconomics& econ,
    std::span<const double> factors) {
  const double cash = annual_cash_flow(rev, econ);
  std::vector<std::pair<double, NpvResult>> out;
  for (double factor : factors) {
    if (!(factor > 0.0) || factor > 1.0)
      throw ValidationError(
          fmt::format("CAPEX factor must lie in (0, 1], got {}", factor));
    TechEconomics scaled = econ;
    scaled.capex_gbp = factor * econ.capex_gbp;
    out.emplace_back(factor, npv(cash, scaled));
  }
  return out;
}

namespace {

struct CostRow {
  double capex_1mw, capex_100mw;
  double om_1mw, om_100mw;
  int life_years;
  double lambda_rv;
};

CostRow cost_row(Tech tech) {
  switch (tech) {
    case Tech::Lib:
      return {539348.37, 41895060.23, 2563.0, 206969.0, 11, 0.20};
    case Tech::Vrfb:
      return {753820.03, 60452744.77, 4527.0, 358962.0, 12, 0.40};
    case Tech::Psh:
      return {912765.79, 91276578.54, 6468.0, 646778.0, 60, 0.20};
    case Tech::Hes:
      return {2344571.11, 234457110.52, 18595.0, 1859487.0, 30, 0.05};
  }
  throw ValidationError("unknown storage technology");
}

}  // namespace

TechEconomics table2_defaults(Tech tech, double rated_power_mw) {
  if (!(rated_power_mw > 0.0))
    throw ValidationError("rated power must be positive");
  const CostRow row = cost_row(tech);
  TechEconomics econ;
  const double f = (rated_power_mw - 1.0) / 99.0;
  econ.capex_gbp = row.capex_1mw + f * (row.capex_100mw - row.capex_1mw);
  econ.fixed_om_gbp_per_year = row.om_1mw + f * (row.om_100mw - row.om_1mw);
  econ.life_years = row.life_years;
  econ.lambda_rv = row.lambda_rv;
  econ.discount_rate = 0.08;
  return econ;
}

nlohmann::ordered_json to_json(const ValuationReport& report) {
  nlohmann::ordered_json doc;
  doc["tech"] = std::string(to_string(report.tech));
  doc["node"] = report.node;
  doc["zone"] = report.zone;
  doc["kappa"] = report.kappa;
  doc["nbb_per_year"] = report.nbb_per_year_gbp;
  doc["cmr"] = report.cmr_gbp_per_year;
  doc["dcr"] = report.dcr_gbp_per_year;
  doc["npv"] = report.npv_gbp;
  auto sens = nlohmann::ordered_json::array();
  for (const auto& [factor, value] : report.sensitivity) {
    nlohmann::ordered_json entry;
    entry["factor"] = factor;
    entry["npv"] = value;
    sens.push_back(std::move(entry));
  }
  doc["sensitivity"] = std::move(sens);
  return doc;
}

}  // namespace bmsim
