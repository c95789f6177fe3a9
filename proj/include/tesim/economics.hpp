#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tesim {

struct CashflowSchedule {
  double initial_cost = 0.0;           // $ at year 0
  std::vector<double> annual_benefit;  // $ per year, year-end; constant when size 1
  int horizon_years = 40;

  double benefit_in_year(int year) const {  // year >= 1
    if (annual_benefit.size() == 1) return annual_benefit.front();
    return annual_benefit.at(static_cast<size_t>(year - 1));
  }
};

/// Sum of cashflow_t / (1+rate)^t; cashflows[0] is the year-0 entry.
double npv(const std::vector<double>& cashflows, double rate);

/// initial_cost / annual_benefit, fractional years.
double simple_payback_years(const CashflowSchedule& schedule);

/// Smallest whole year n with the cumulative discounted benefits covering the
/// initial cost; nullopt when the horizon is never reached.
std::optional<int> discounted_payback_years(const CashflowSchedule& schedule,
                                            double rate);

/// Same crossing point interpolated inside the crossing year.
std::optional<double> discounted_payback_fractional(
    const CashflowSchedule& schedule, double rate);

struct CaseStudyReport {
  int case_id = 0;
  double cost = 0.0;  // headline installed cost
  std::vector<double> discount_rates;
  double daily_benefit = 0.0;
  double annual_benefit = 0.0;
  double simple_payback_years = 0.0;
  std::vector<std::optional<int>> discounted_payback_years;  // per rate
  std::vector<std::optional<double>> discounted_payback_fractional;
  std::string goal;  // e.g. "<6 years" for the community storage case
  bool goal_met = false;
  std::map<std::string, double> assumptions;  // parameter echo
};

/// Cost-benefit generators for the three deployment strategies:
/// 1 solar-only home, 2 solar + BESS, 3 community storage.  `overrides`
/// replaces any assumption by name.
CaseStudyReport run_case_study(int case_id,
                               const std::map<std::string, double>& overrides = {});

}  // namespace tesim
