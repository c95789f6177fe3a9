#include "tesim/market.hpp"

#include <algorithm>
#include <cmath>

namespace tesim {

PriceSignal update_price(const PriceSignal& price,
                         const std::vector<double>& imbalance_kw,
                         const MarketConfig& config,
                         const TariffSchedule& band, int iteration) {
  PriceSignal out = price;
  double gamma = config.step_size;
  if (iteration > config.diminish_after)
    gamma /= std::sqrt(static_cast<double>(iteration - config.diminish_after));
  for (size_t t = 0; t < out.prices.values.size(); ++t) {
    double p = out.prices.values[t] - gamma * imbalance_kw[t];
    p = std::min(p, band.import_rate.values[t]);
    p = std::max(p, band.export_rate.values[t]);
    out.prices.values[t] = p;
  }
  return out;
}

Settlement settle_ledger(const std::vector<std::string>& home_ids,
                         const std::vector<HouseResponse>& responses,
                         const PriceSignal& price, const TariffSchedule& tariff,
                         std::optional<int> storage_home) {
  const int n = static_cast<int>(responses.size());
  const int T = price.prices.grid.n_steps;
  const double h = price.prices.grid.step_hours;
  Settlement s;
  s.p2p_payment_by_step.assign(T, 0.0);
  s.homes.resize(n);
  for (int i = 0; i < n; ++i) {
    s.homes[i].home_id = home_ids[i];
    s.homes[i].p2p_bought_kwh.assign(T, 0.0);
    s.homes[i].p2p_sold_kwh.assign(T, 0.0);
  }
  for (int t = 0; t < T; ++t) {
    double offered = 0.0, wanted = 0.0;
    for (int i = 0; i < n; ++i) {
      const double q = responses[i].schedule.p2p_kw[t] * h;  // import > 0
      if (q > 0.0) wanted += q;
      else offered -= q;
    }
    const double matched = std::min(offered, wanted);
    const double p = price.prices.values[t];
    for (int i = 0; i < n; ++i) {
      auto& hs = s.homes[i];
      const double q = responses[i].schedule.p2p_kw[t] * h;
      double bought = 0.0, sold = 0.0;
      if (q > 0.0 && wanted > 0.0) bought = q * matched / wanted;
      if (q < 0.0 && offered > 0.0) sold = -q * matched / offered;
      hs.p2p_bought_kwh[t] = bought;
      hs.p2p_sold_kwh[t] = sold;
      const double pay = p * (bought - sold);
      hs.p2p_payment += pay;
      s.p2p_payment_by_step[t] += pay;
      // Unmatched residual falls back to the utility at tariff rates.
      const double resid_buy = std::max(q, 0.0) - bought;
      const double resid_sell = std::max(-q, 0.0) - sold;
      const double util_import = std::max(responses[i].schedule.utility_kw[t], 0.0) * h;
      const double util_export = std::max(-responses[i].schedule.utility_kw[t], 0.0) * h;
      hs.utility_payment +=
          tariff.import_rate.values[t] * (util_import + resid_buy) -
          tariff.export_rate.values[t] * (util_export + resid_sell);
    }
  }
  if (storage_home && *storage_home >= 0 && *storage_home < n && n > 1) {
    // Free-ride-proof allocation: the shared battery's net cost is split
    // pro-rata by each home's traded P2P energy.
    const int si = *storage_home;
    const double net = s.homes[si].p2p_payment + s.homes[si].utility_payment;
    std::vector<double> weight(n, 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == si) continue;
      for (int t = 0; t < T; ++t)
        weight[i] += s.homes[i].p2p_bought_kwh[t] + s.homes[i].p2p_sold_kwh[t];
      total += weight[i];
    }
    for (int i = 0; i < n; ++i) {
      if (i == si) continue;
      const double share = total > 0.0 ? weight[i] / total : 1.0 / (n - 1);
      s.homes[i].storage_allocation = net * share;
    }
    s.homes[si].storage_allocation = -net;
  }
  return s;
}

MarketResult run_market(const std::vector<HouseProblem>& homes,
                        const GridTopology& topo, const MarketConfig& config,
                        bool parallel) {
  if (homes.empty()) throw std::invalid_argument("run_market: no homes");
  {
    auto defects = validate_topology(topo);
    if (!defects.empty())
      throw std::invalid_argument("run_market: invalid topology: " + defects.front());
  }
  const TimeGrid grid = homes.front().grid();
  const TariffSchedule& tariff = homes.front().tariff;
  for (const auto& hp : homes)
    if (!(hp.grid() == grid))
      throw std::invalid_argument("run_market: homes on different time grids");

  std::vector<std::string> ids;
  std::optional<int> storage_home;
  for (size_t i = 0; i < homes.size(); ++i) {
    ids.push_back(homes[i].home.id);
    bool found = false;
    for (const auto& node : topo.nodes) {
      if (node.id != homes[i].home.id) continue;
      found = true;
      if (node.kind == NodeKind::CommunityStorage)
        storage_home = static_cast<int>(i);
    }
    if (!found)
      throw std::invalid_argument("run_market: home '" + ids.back() +
                                  "' is not a topology node");
  }

  MarketResult result;
  result.price.prices = constant_series(grid, 0.0);
  for (int t = 0; t < grid.n_steps; ++t)
    result.price.prices.values[t] =
        0.5 * (tariff.import_rate.values[t] + tariff.export_rate.values[t]);

  const int n = static_cast<int>(homes.size());
  result.responses.resize(n);
  std::vector<std::string> home_errors(n);
  std::vector<double> imbalance(grid.n_steps, 0.0);

  if (n == 1) {
    // No peers, no trades: the lone home clears against the utility alone.
    result.iterations = 1;
    result.converged = true;
    try {
      HouseProblem alone = homes.front();
      alone.p2p_price.reset();
      result.responses[0] = solve_house(alone);
    } catch (const std::exception& e) {
      result.errors.push_back("home '" + ids[0] + "': " + e.what());
      return result;
    }
    result.trace.push_back({1, 0.0, result.price.prices.values[0],
                            result.price.prices.values[0]});
  }
  for (int it = 1; n > 1 && it <= config.max_iterations; ++it) {
    result.iterations = it;
    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int i = 0; i < n; ++i) {
      try {
        result.responses[i] = respond_to_price(homes[i], result.price.prices);
      } catch (const std::exception& e) {
        home_errors[i] = e.what();
      }
    }
    for (int i = 0; i < n; ++i)
      if (!home_errors[i].empty()) {
        result.errors.push_back("home '" + ids[i] + "': " + home_errors[i]);
        failed = true;
      }
    if (failed) break;

    std::fill(imbalance.begin(), imbalance.end(), 0.0);
    for (int i = 0; i < n; ++i)  // fixed order for reproducible sums
      for (int t = 0; t < grid.n_steps; ++t)
        imbalance[t] += result.responses[i].injection.values[t];
    result.max_imbalance_kw = 0.0;
    for (double v : imbalance)
      result.max_imbalance_kw = std::max(result.max_imbalance_kw, std::abs(v));
    double pmin = result.price.prices.values[0], pmax = pmin;
    for (double p : result.price.prices.values) {
      pmin = std::min(pmin, p);
      pmax = std::max(pmax, p);
    }
    result.trace.push_back({it, result.max_imbalance_kw, pmin, pmax});
    if (result.max_imbalance_kw < config.tolerance_kw) {
      result.converged = true;
      break;
    }
    result.price = update_price(result.price, imbalance, config, tariff, it);
  }
  for (const auto& err : home_errors)
    if (!err.empty()) return result;  // no dispatch to validate or settle
  if (!result.converged && result.errors.empty())
    result.errors.push_back(
        "market did not converge: residual imbalance " +
        std::to_string(result.max_imbalance_kw) +
        " kW absorbed by the utility slack");

  // Physical validation of the converged (or residual) dispatch.
  for (int t = 0; t < grid.n_steps; ++t) {
    std::map<std::string, double> inj;
    for (int i = 0; i < n; ++i)
      inj[ids[i]] = result.responses[i].injection.values.empty()
                        ? 0.0
                        : result.responses[i].injection.values[t];
    try {
      result.flows.push_back(solve_flows(topo, inj));
    } catch (const CapacityExceeded& e) {
      result.errors.push_back("congestion at step " + std::to_string(t) + ": " + e.what());
      result.flows.push_back(FlowSolution{
          std::vector<double>(topo.lines.size(), 0.0), 0.0, 0.0});
    }
  }
  result.settlement = settle_ledger(ids, result.responses, result.price, tariff,
                                    storage_home);
  return result;
}

}  // namespace tesim
