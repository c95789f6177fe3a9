#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tesim/core.hpp"
#include "tesim/dcgrid.hpp"
#include "tesim/devices.hpp"
#include "tesim/market.hpp"

namespace tesim {

struct EventConfig {
  double solar_inverter_outage_daily_prob = 0.0;  // per home per day
  double p2p_network_outage_daily_prob = 0.0;     // whole community per day
};

struct ScenarioConfig {
  std::string name;
  TimeGrid grid;
  GridTopology topology;
  std::vector<HomeSpec> homes;
  TariffSchedule tariff;
  MarketConfig market;
  EventConfig events;
  std::uint64_t seed = 0;
  int horizon_days = 1;
};

struct ParseResult {
  std::optional<ScenarioConfig> config;  // set only when defects is empty
  std::vector<std::string> defects;
};

/// Parse and validate a scenario file; reports every schema violation, not
/// just the first.
ParseResult parse_config(const std::string& text);

/// parse_config on a file; throws with the collected defects on failure.
ScenarioConfig load_scenario(const std::string& path);

enum class EventKind { InverterOutage, P2pOutage };

struct Event {
  int day = 0;
  EventKind kind = EventKind::InverterOutage;
  std::string home_id;  // empty for community-wide events
};

using EventTrace = std::vector<Event>;

/// Seeded, platform-independent draws; streams split per (home id, day,
/// event kind) so adding a home never perturbs other homes' draws.
EventTrace sample_events(const ScenarioConfig& config);

struct DayResult {
  MarketResult market;
  bool p2p_disabled = false;        // community fell back to the AC grid
  std::vector<std::string> outage_homes;
};

struct SimulationResult {
  std::vector<std::string> home_ids;
  EventTrace events;
  std::vector<DayResult> days;
  std::vector<double> annual_net_benefit;  // $ per home, negative of settled cost
};

/// Full-horizon run: sample events, simulate every day (concurrently when
/// `parallel`), reduce in day order.
SimulationResult simulate_horizon(const ScenarioConfig& config,
                                  bool parallel = true);

/// Net load seen at the utility connection, positive = community imports.
TimeSeries net_load_curve(const SimulationResult& result, int day,
                          const ScenarioConfig& config);

}  // namespace tesim
