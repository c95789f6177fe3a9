#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tesim/core.hpp"

namespace tesim {

/// Rooftop array described by its peak output and a mean-to-peak "sun angle"
/// factor over the daylight window.
struct SolarArraySpec {
  double peak_kw = 5.0;
  double daylight_hours = 12.0;
  double angle_factor = 0.63;  // mean output over daylight / peak
  double peak_hour = 15.0;
  std::optional<TimeSeries> haze;  // multipliers in [0,1]
};

void validate(const SolarArraySpec& s);

/// Clear-sky half-sine over the daylight window, rescaled so the discrete
/// mean-to-peak ratio equals angle_factor exactly; haze applied pointwise.
TimeSeries solar_profile(const SolarArraySpec& spec, const TimeGrid& grid);

struct BessSpec {
  double capacity_kwh = 13.5;
  double continuous_power_kw = 5.6;
  double round_trip_efficiency = 0.85;
  bool discharge_applies_loss = true;  // whole loss on discharge; sqrt split otherwise
};

void validate(const BessSpec& s);

struct BessState {
  double soc_kwh = 0.0;
};

double bess_charge_time_h(const BessSpec& spec);

struct BessStepResult {
  BessState state;
  double energy_kwh = 0.0;  // absorbed when charging, delivered when discharging
  bool truncated = false;   // command exceeded SoC headroom
};

/// Pure SoC step: charge > 0, discharge < 0.  Commands beyond the remaining
/// headroom truncate; commands beyond the power rating are rejected.
BessStepResult bess_step(const BessSpec& spec, BessState state,
                         double command_kw, double step_h);

/// Grid power usable to top up charging while solar is at peak.
double grid_assist_headroom_kw(const BessSpec& bess, const SolarArraySpec& solar);

struct Appliance {
  std::string name;
  double power_kw = 0.0;
  int duration_steps = 1;
  int earliest_step = 0;
  int latest_step = 0;  // inclusive last step the appliance may run in
  bool interruptible = false;
};

void validate(const Appliance& a, const TimeGrid& grid);

struct HomeSpec {
  std::string id;
  TimeSeries fixed_load;
  std::vector<Appliance> appliances;
  std::optional<SolarArraySpec> solar;
  std::optional<BessSpec> bess;
  double service_limit_kw = 24.0;
};

void validate(const HomeSpec& h);

}  // namespace tesim
