#include "tesim/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace tesim {

namespace {

using nlohmann::json;

std::string fixed6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";  // scrub signed zero for determinism
  return s;
}

double round6(double v) {
  if (!std::isfinite(v)) return v;
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

}  // namespace

std::string summary_json(const ScenarioConfig& config,
                         const SimulationResult& result) {
  json out;
  out["scenario"] = config.name;
  out["horizon_days"] = config.horizon_days;
  out["seed"] = config.seed;

  int inverter_outages = 0, p2p_outages = 0;
  for (const auto& ev : result.events)
    (ev.kind == EventKind::InverterOutage ? inverter_outages : p2p_outages)++;
  out["events"]["inverter_outages"] = inverter_outages;
  out["events"]["p2p_outages"] = p2p_outages;

  json homes = json::array();
  for (size_t i = 0; i < result.home_ids.size(); ++i) {
    double bought = 0.0, sold = 0.0, p2p_pay = 0.0, util_pay = 0.0, storage = 0.0;
    for (const auto& day : result.days) {
      if (day.market.settlement.homes.size() <= i) continue;
      const auto& hs = day.market.settlement.homes[i];
      for (double q : hs.p2p_bought_kwh) bought += q;
      for (double q : hs.p2p_sold_kwh) sold += q;
      p2p_pay += hs.p2p_payment;
      util_pay += hs.utility_payment;
      storage += hs.storage_allocation;
    }
    homes.push_back({{"id", result.home_ids[i]},
                     {"p2p_bought_kwh", round6(bought)},
                     {"p2p_sold_kwh", round6(sold)},
                     {"p2p_payment_usd", round6(p2p_pay)},
                     {"utility_payment_usd", round6(util_pay)},
                     {"storage_allocation_usd", round6(storage)},
                     {"total_cost_usd", round6(p2p_pay + util_pay + storage)},
                     {"annual_net_benefit_usd",
                      round6(result.annual_net_benefit[i])}});
  }
  out["homes"] = homes;

  int converged_days = 0;
  long iterations = 0;
  double worst_imbalance = 0.0;
  json errors = json::array();
  for (size_t d = 0; d < result.days.size(); ++d) {
    const auto& m = result.days[d].market;
    if (m.converged) ++converged_days;
    iterations += m.iterations;
    worst_imbalance = std::max(worst_imbalance, m.max_imbalance_kw);
    for (const auto& e : m.errors)
      errors.push_back("day " + std::to_string(d) + ": " + e);
  }
  out["convergence"]["days_converged"] = converged_days;
  out["convergence"]["days_total"] = static_cast<int>(result.days.size());
  out["convergence"]["total_iterations"] = iterations;
  out["convergence"]["worst_imbalance_kw"] = round6(worst_imbalance);
  out["errors"] = errors;
  return out.dump(2) + "\n";
}

std::string timeseries_csv(const ScenarioConfig& config,
                           const SimulationResult& result) {
  std::ostringstream os;
  os << "day,hour,price_usd_per_kwh";
  for (const auto& h : config.homes) os << ",injection_kw:" << h.id;
  for (const auto& l : config.topology.lines)
    os << ",flow_kw:" << l.from << "->" << l.to;
  os << ",slack_kw,losses_kw\n";
  for (size_t d = 0; d < result.days.size(); ++d) {
    const auto& m = result.days[d].market;
    for (int t = 0; t < config.grid.n_steps; ++t) {
      os << d << ',' << fixed6(config.grid.hour_at(t)) << ','
         << fixed6(m.price.prices.values[t]);
      for (size_t i = 0; i < config.homes.size(); ++i) {
        const double inj = i < m.responses.size() &&
                                   !m.responses[i].injection.values.empty()
                               ? m.responses[i].injection.values[t]
                               : 0.0;
        os << ',' << fixed6(inj);
      }
      const bool have_flows = static_cast<int>(m.flows.size()) > t;
      for (size_t l = 0; l < config.topology.lines.size(); ++l)
        os << ',' << fixed6(have_flows ? m.flows[t].line_flows_kw[l] : 0.0);
      os << ',' << fixed6(have_flows ? m.flows[t].slack_injection_kw : 0.0)
         << ',' << fixed6(have_flows ? m.flows[t].losses_kw : 0.0) << '\n';
    }
  }
  return os.str();
}

std::string convergence_csv(const SimulationResult& result) {
  std::ostringstream os;
  os << "day,iteration,max_imbalance_kw,price_min,price_max\n";
  for (size_t d = 0; d < result.days.size(); ++d)
    for (const auto& pt : result.days[d].market.trace)
      os << d << ',' << pt.iteration << ',' << fixed6(pt.max_imbalance_kw)
         << ',' << fixed6(pt.price_min) << ',' << fixed6(pt.price_max) << '\n';
  return os.str();
}

std::string table1_csv(const std::vector<CaseStudyReport>& reports) {
  std::ostringstream os;
  os << "case,cost_usd,daily_benefit_usd,annual_benefit_usd,discount_rate,"
        "simple_payback_years,discounted_payback_years,goal\n";
  for (const auto& r : reports) {
    for (size_t k = 0; k < r.discount_rates.size(); ++k) {
      os << r.case_id << ',' << fixed6(r.cost) << ',' << fixed6(r.daily_benefit)
         << ',' << fixed6(r.annual_benefit) << ',' << fixed6(r.discount_rates[k])
         << ',' << fixed6(r.simple_payback_years) << ',';
      if (r.discounted_payback_years[k]) os << *r.discounted_payback_years[k];
      os << ',' << r.goal << '\n';
    }
  }
  return os.str();
}

std::string case_study_json(const CaseStudyReport& report) {
  json out;
  out["case"] = report.case_id;
  out["cost_usd"] = round6(report.cost);
  out["daily_benefit_usd"] = round6(report.daily_benefit);
  out["annual_benefit_usd"] = round6(report.annual_benefit);
  out["simple_payback_years"] = std::isfinite(report.simple_payback_years)
                                    ? json(round6(report.simple_payback_years))
                                    : json("never");
  json rates = json::array();
  for (size_t k = 0; k < report.discount_rates.size(); ++k) {
    json entry;
    entry["rate"] = report.discount_rates[k];
    entry["payback_years"] = report.discounted_payback_years[k]
                                 ? json(*report.discounted_payback_years[k])
                                 : json("never");
    entry["payback_years_fractional"] =
        report.discounted_payback_fractional[k]
            ? json(round6(*report.discounted_payback_fractional[k]))
            : json("never");
    rates.push_back(entry);
  }
  out["discounted_payback"] = rates;
  if (!report.goal.empty()) {
    out["goal"] = report.goal;
    out["goal_met"] = report.goal_met;
  }
  out["assumptions"] = report.assumptions;
  return out.dump(2) + "\n";
}

}  // namespace tesim
