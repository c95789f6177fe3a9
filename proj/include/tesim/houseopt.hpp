#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tesim/core.hpp"
#include "tesim/devices.hpp"

namespace tesim {

/// One home's day-ahead scheduling problem: tariff, optional P2P price
/// signal, optional islanding (no utility exchange).
struct HouseProblem {
  HomeSpec home;
  TariffSchedule tariff;
  std::optional<TimeSeries> p2p_price;  // $/kWh, must lie inside the tariff band
  bool islanded = false;
  double initial_soc_kwh = 0.0;
  bool require_terminal_soc = false;  // terminal SoC >= initial (multi-day horizons)

  const TimeGrid& grid() const { return home.fixed_load.grid; }
};

struct Schedule {
  std::vector<int> appliance_starts;                // first running step per appliance
  std::vector<std::vector<int>> appliance_on_steps; // running steps per appliance
  std::vector<double> bess_charge_kw;               // per step, >= 0
  std::vector<double> bess_discharge_kw;            // per step, >= 0 (drawn from SoC)
  std::vector<double> utility_kw;                   // import > 0, export < 0
  std::vector<double> p2p_kw;                       // import > 0, export < 0
};

/// The primal/dual pair a home reports back to the coordinator: its net
/// injection into the DC grid and the marginal value of energy per step.
struct HouseResponse {
  Schedule schedule;
  TimeSeries injection;               // net export to the DC grid, kW
  double cost = 0.0;                  // $, negative = net revenue
  std::vector<double> marginal_value; // $/kWh, dual of the power balance
};

struct InfeasibleHouse : std::runtime_error {
  explicit InfeasibleHouse(const std::string& constraint)
      : std::runtime_error("house problem infeasible: " + constraint),
        binding_constraint(constraint) {}
  std::string binding_constraint;
};

struct RejectedPrice : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Number of binary decisions: appliance start-slot indicators (slot on/off
/// bits for interruptible appliances) plus one BESS mode bit per step.
int count_binaries(const HouseProblem& problem);

/// Cost-minimizing schedule via best-first branch and bound over the integer
/// choices; the continuous dispatch at fixed integers is solved exactly.
HouseResponse solve_house(const HouseProblem& problem);

/// Exhaustive oracle over all integer assignments; <= 20 binaries.
HouseResponse brute_force_house(const HouseProblem& problem);

/// solve_house with the given P2P price installed; rejects prices outside
/// the [export_rate, import_rate] band.
HouseResponse respond_to_price(const HouseProblem& problem,
                               const TimeSeries& p2p_price);

/// Convenience: optimal cost with no P2P participation.
double utility_only_cost(const HouseProblem& problem);

}  // namespace tesim
