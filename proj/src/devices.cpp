#include "tesim/devices.hpp"

#include <algorithm>
#include <cmath>

namespace tesim {

void validate(const SolarArraySpec& s) {
  if (s.peak_kw < 0.0) throw std::invalid_argument("SolarArraySpec: peak_kw < 0");
  if (!(s.angle_factor > 0.0 && s.angle_factor <= 1.0))
    throw std::invalid_argument("SolarArraySpec: angle_factor outside (0,1]");
  if (!(s.daylight_hours > 0.0 && s.daylight_hours <= 24.0))
    throw std::invalid_argument("SolarArraySpec: daylight_hours outside (0,24]");
  if (s.haze) {
    validate(*s.haze);
    for (double v : s.haze->values)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("SolarArraySpec: haze multiplier outside [0,1]");
  }
}

namespace {
// Integral of sin(pi*(t-t0)/d) over [a,b].
double sine_lobe_integral(double t0, double d, double a, double b) {
  const double pi = std::acos(-1.0);
  return d / pi * (std::cos(pi * (a - t0) / d) - std::cos(pi * (b - t0) / d));
}
}  // namespace

TimeSeries solar_profile(const SolarArraySpec& spec, const TimeGrid& grid) {
  validate(spec);
  validate(grid);
  TimeSeries out = constant_series(grid, 0.0);
  if (spec.peak_kw == 0.0) return out;
  const double d = spec.daylight_hours;
  const double rise = spec.peak_hour - d / 2.0;
  const double set = spec.peak_hour + d / 2.0;
  // Rescale so the discrete daylight mean-to-peak ratio is angle_factor exactly
  // (the analytic ratio of the half-sine itself is 2/pi).
  const double pi = std::acos(-1.0);
  const double scale = spec.angle_factor * pi / 2.0;
  const double h = grid.step_hours;
  for (int i = 0; i < grid.n_steps; ++i) {
    double t = grid.hour_at(i);
    if (grid.multi_day) t = std::fmod(t, 24.0);
    const double a = std::max(t, rise);
    const double b = std::min(t + h, set);
    if (b <= a) continue;
    out.values[i] = spec.peak_kw * scale * sine_lobe_integral(rise, d, a, b) / h;
  }
  if (spec.haze) {
    if (!(spec.haze->grid == grid))
      throw std::invalid_argument("solar_profile: haze grid mismatch");
    for (int i = 0; i < grid.n_steps; ++i) out.values[i] *= spec.haze->values[i];
  }
  return out;
}

void validate(const BessSpec& s) {
  if (!(s.capacity_kwh > 0.0)) throw std::invalid_argument("BessSpec: capacity <= 0");
  if (!(s.continuous_power_kw > 0.0)) throw std::invalid_argument("BessSpec: power <= 0");
  if (!(s.round_trip_efficiency > 0.0 && s.round_trip_efficiency <= 1.0))
    throw std::invalid_argument("BessSpec: efficiency outside (0,1]");
}

double bess_charge_time_h(const BessSpec& spec) {
  return spec.capacity_kwh / spec.continuous_power_kw;
}

BessStepResult bess_step(const BessSpec& spec, BessState state,
                         double command_kw, double step_h) {
  validate(spec);
  if (std::abs(command_kw) > spec.continuous_power_kw + 1e-9)
    throw std::invalid_argument("bess_step: command exceeds power rating");
  if (step_h < 0.0) throw std::invalid_argument("bess_step: negative step");
  BessStepResult r;
  if (command_kw >= 0.0) {
    const double requested = command_kw * step_h;
    const double charge_eff =
        spec.discharge_applies_loss ? 1.0 : std::sqrt(spec.round_trip_efficiency);
    const double stored = std::min(requested * charge_eff, spec.capacity_kwh - state.soc_kwh);
    state.soc_kwh += stored;
    r.energy_kwh = stored / charge_eff;  // absorbed at the terminals
    r.truncated = stored + 1e-12 < requested * charge_eff;
  } else {
    const double requested = -command_kw * step_h;
    const double drawn = std::min(requested, state.soc_kwh);
    state.soc_kwh -= drawn;
    const double discharge_eff =
        spec.discharge_applies_loss ? spec.round_trip_efficiency
                                    : std::sqrt(spec.round_trip_efficiency);
    r.energy_kwh = drawn * discharge_eff;  // delivered at the terminals
    r.truncated = drawn + 1e-12 < requested;
  }
  r.state = state;
  return r;
}

double grid_assist_headroom_kw(const BessSpec& bess, const SolarArraySpec& solar) {
  return std::max(0.0, bess.continuous_power_kw - solar.peak_kw);
}

void validate(const Appliance& a, const TimeGrid& grid) {
  if (a.power_kw < 0.0) throw std::invalid_argument("Appliance: power < 0");
  if (a.duration_steps < 1) throw std::invalid_argument("Appliance: duration < 1");
  if (a.earliest_step < 0 || a.latest_step >= grid.n_steps ||
      a.earliest_step > a.latest_step)
    throw std::invalid_argument("Appliance '" + a.name + "': window outside grid");
  if (a.latest_step - a.earliest_step + 1 < a.duration_steps)
    throw std::invalid_argument("Appliance '" + a.name + "': window too small for duration");
}

void validate(const HomeSpec& h) {
  validate(h.fixed_load);
  if (!(h.service_limit_kw > 0.0))
    throw std::invalid_argument("HomeSpec: service limit <= 0");
  for (double v : h.fixed_load.values)
    if (v > h.service_limit_kw + 1e-9)
      throw std::invalid_argument("HomeSpec '" + h.id + "': fixed load exceeds service limit");
  for (const auto& a : h.appliances) validate(a, h.fixed_load.grid);
  if (h.solar) validate(*h.solar);
  if (h.bess) validate(*h.bess);
}

}  // namespace tesim
