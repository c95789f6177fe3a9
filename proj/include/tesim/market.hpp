#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tesim/core.hpp"
#include "tesim/dcgrid.hpp"
#include "tesim/houseopt.hpp"

namespace tesim {

struct MarketConfig {
  int max_iterations = 500;
  double step_size = 0.005;    // $/kWh per kW of imbalance
  double tolerance_kw = 1e-6;
  int diminish_after = 50;     // step_size / sqrt(k) damping beyond this
};

struct PriceSignal {
  TimeSeries prices;  // $/kWh, inside the tariff band at every step
};

struct HomeSettlement {
  std::string home_id;
  std::vector<double> p2p_bought_kwh;  // per step
  std::vector<double> p2p_sold_kwh;
  double p2p_payment = 0.0;      // > 0 pays the pool, < 0 receives
  double utility_payment = 0.0;  // tariff settlement incl. unmatched residual
  double storage_allocation = 0.0;
  double total_cost() const {
    return p2p_payment + utility_payment + storage_allocation;
  }
};

struct Settlement {
  std::vector<HomeSettlement> homes;
  std::vector<double> p2p_payment_by_step;  // sums to ~0 per step
};

struct ConvergencePoint {
  int iteration;
  double max_imbalance_kw;
  double price_min, price_max;
};

struct MarketResult {
  PriceSignal price;
  std::vector<HouseResponse> responses;  // in home order
  std::vector<FlowSolution> flows;       // per step
  Settlement settlement;
  bool converged = false;
  int iterations = 0;
  double max_imbalance_kw = 0.0;
  std::vector<std::string> errors;  // congestion / infeasibility reports
  std::vector<ConvergencePoint> trace;
};

/// Projected subgradient update on the community balance: excess supply
/// lowers the price, excess demand raises it, clamped to the tariff band.
PriceSignal update_price(const PriceSignal& price,
                         const std::vector<double>& imbalance_kw,
                         const MarketConfig& config,
                         const TariffSchedule& band, int iteration = 0);

/// Pro-rata matching at the clearing price; unmatched residual settles with
/// the utility at tariff rates.  `storage_home` allocates that home's net
/// cost across the others pro-rata by traded P2P energy.
Settlement settle_ledger(const std::vector<std::string>& home_ids,
                         const std::vector<HouseResponse>& responses,
                         const PriceSignal& price, const TariffSchedule& tariff,
                         std::optional<int> storage_home = std::nullopt);

/// Price coordination loop: broadcast price, collect house responses,
/// update until the community balance converges, then validate flows and
/// settle.  House subproblems run in parallel when `parallel` is set;
/// aggregation is in fixed home order either way.
MarketResult run_market(const std::vector<HouseProblem>& homes,
                        const GridTopology& topo, const MarketConfig& config,
                        bool parallel = true);

}  // namespace tesim
