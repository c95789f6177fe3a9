#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tesim {

/// Uniformly sampled time axis in hours of day.  Values attached to a grid
/// (power, prices) are piecewise constant over each step.
struct TimeGrid {
  double start_hour = 0.0;
  double step_hours = 1.0;
  int n_steps = 24;
  bool multi_day = false;

  double hour_at(int step) const { return start_hour + step * step_hours; }
  double end_hour() const { return start_hour + n_steps * step_hours; }

  /// Step whose interval contains the given hour of day, or -1.
  int step_of_hour(double hour) const;
};

bool operator==(const TimeGrid& a, const TimeGrid& b);
void validate(const TimeGrid& g);

/// kW for power series, $/kWh for price series, dimensionless for factors.
struct TimeSeries {
  TimeGrid grid;
  std::vector<double> values;
};

TimeSeries constant_series(const TimeGrid& grid, double value);
void validate(const TimeSeries& s);

/// Left-rectangle integral in kWh; exact for piecewise-constant power.
double integrate_energy(const TimeSeries& power_kw);

enum class TariffKind { Flat, TimeOfUse, NetMetering };
enum class Direction { Import, Export };

struct TariffSchedule {
  TariffKind kind = TariffKind::Flat;
  TimeSeries import_rate;  // $/kWh per step
  TimeSeries export_rate;  // <= import_rate at every step

  static TariffSchedule flat(const TimeGrid& grid, double import_rate,
                             double export_rate = 0.0);
  static TariffSchedule net_metering(const TimeGrid& grid, double rate);
  static TariffSchedule time_of_use(TimeSeries import_rate,
                                    TimeSeries export_rate);
};

void validate(const TariffSchedule& t);

double rate_at(const TariffSchedule& tariff, int step, Direction direction);

}  // namespace tesim
