#pragma once

#include <string>
#include <vector>

#include "tesim/economics.hpp"
#include "tesim/scenario.hpp"

namespace tesim {

/// JSON run report: per-home settlements and annual net benefit, event
/// counts, convergence statistics, and any simulation errors.
std::string summary_json(const ScenarioConfig& config,
                         const SimulationResult& result);

/// Wide-format time series, one row per (day, step).  Column order:
///   day, hour, price_usd_per_kwh,
///   injection_kw:<home id> ... (config home order),
///   flow_kw:<from>-><to> ...   (config line order),
///   slack_kw, losses_kw
/// All numbers carry 6 decimal places.
std::string timeseries_csv(const ScenarioConfig& config,
                           const SimulationResult& result);

/// Per-day convergence trace (verbose runs).  Columns:
///   day, iteration, max_imbalance_kw, price_min, price_max
std::string convergence_csv(const SimulationResult& result);

/// Cost-benefit rows, one per (case, discount rate).  Columns:
///   case, cost_usd, daily_benefit_usd, annual_benefit_usd,
///   discount_rate, simple_payback_years, discounted_payback_years, goal
std::string table1_csv(const std::vector<CaseStudyReport>& reports);

/// Full JSON form of a case study, assumptions included.
std::string case_study_json(const CaseStudyReport& report);

}  // namespace tesim
