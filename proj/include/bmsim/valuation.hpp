#pragma once

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <utility>
#include <vector>

#include "bmsim/domain.hpp"

namespace bmsim {

struct TechEconomics {
  double capex_gbp = 0.0;
  double fixed_om_gbp_per_year = 0.0;
  int life_years = 1;
  double lambda_rv = 0.0;
  double discount_rate = 0.08;
};

struct RevenueInputs {
  double nbb_per_year_gbp = 0.0;
  double kappa = 0.0;
  double cm_price_gbp_per_mw_year = 0.0;
  double cm_derating = 0.20;
  double dc_price_gbp_per_mw_h = 0.0;
  double dc_hours_per_year = 0.0;
  double rated_power_mw = 0.0;
};

struct NpvResult {
  double npv_gbp = 0.0;
  std::vector<double> cash_flows_gbp;  // years 0..Y
  double residual_value_gbp = 0.0;
};

double residual_value(double capex_gbp, double lambda_rv);

// kappa * NBB + derated capacity revenue + (1 - kappa) * DC revenue,
// less fixed O&M.
double annual_cash_flow(const RevenueInputs& rev, const TechEconomics& econ);

// Sum of discounted yearly cash flows from year 0 through life_years, less
// CAPEX, plus the residual value discounted one year past end of life.
NpvResult npv(double cash_per_year_gbp, const TechEconomics& econ);

inline constexpr double kCapexFactors[] = {1.0, 0.7, 0.3};

// Re-evaluates npv with CAPEX (and therefore residual value) scaled by each
// factor; revenue terms are untouched.
std::vector<std::pair<double, NpvResult>> capex_sensitivity(
    const RevenueInputs& rev, const TechEconomics& econ,
    std::span<const double> factors = kCapexFactors);

// Registered cost table: CAPEX, fixed O&M and life per technology at 1 MW
// and 100 MW; other sizes interpolate linearly on CAPEX and O&M.
TechEconomics table2_defaults(Tech tech, double rated_power_mw);

struct ValuationReport {
  Tech tech = Tech::Lib;
  NodeId node;
  std::string zone;
  double kappa = 0.0;
  double nbb_per_year_gbp = 0.0;
  double cmr_gbp_per_year = 0.0;
  double dcr_gbp_per_year = 0.0;
  double npv_gbp = 0.0;
  std::vector<std::pair<double, double>> sensitivity;  // factor, npv
};

nlohmann::ordered_json to_json(const ValuationReport& report);

}  // namespace bmsim
