#include "tesim/core.hpp"

#include <algorithm>

namespace tesim {

int TimeGrid::step_of_hour(double hour) const {
  if (hour < start_hour || hour >= end_hour()) return -1;
  int step = static_cast<int>((hour - start_hour) / step_hours);
  return std::min(step, n_steps - 1);
}

bool operator==(const TimeGrid& a, const TimeGrid& b) {
  return a.start_hour == b.start_hour && a.step_hours == b.step_hours &&
         a.n_steps == b.n_steps && a.multi_day == b.multi_day;
}

void validate(const TimeGrid& g) {
  if (!(g.step_hours > 0.0)) throw std::invalid_argument("TimeGrid: step must be > 0");
  if (g.n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  if (!g.multi_day && g.start_hour + g.step_hours * g.n_steps > 24.0 + 1e-9)
    throw std::invalid_argument("TimeGrid: single-day grid exceeds 24 h");
}

TimeSeries constant_series(const TimeGrid& grid, double value) {
  validate(grid);
  return TimeSeries{grid, std::vector<double>(static_cast<size_t>(grid.n_steps), value)};
}

void validate(const TimeSeries& s) {
  validate(s.grid);
  if (s.values.size() != static_cast<size_t>(s.grid.n_steps))
    throw std::invalid_argument("TimeSeries: values length != n_steps");
  for (double v : s.values)
    if (!std::isfinite(v)) throw std::invalid_argument("TimeSeries: non-finite value");
}

double integrate_energy(const TimeSeries& power_kw) {
  validate(power_kw);
  double sum = 0.0;
  for (double v : power_kw.values) sum += v * power_kw.grid.step_hours;
  return sum;
}

TariffSchedule TariffSchedule::flat(const TimeGrid& grid, double import_rate,
                                    double export_rate) {
  TariffSchedule t{TariffKind::Flat, constant_series(grid, import_rate),
                   constant_series(grid, export_rate)};
  validate(t);
  return t;
}

TariffSchedule TariffSchedule::net_metering(const TimeGrid& grid, double rate) {
  TariffSchedule t{TariffKind::NetMetering, constant_series(grid, rate),
                   constant_series(grid, rate)};
  validate(t);
  return t;
}

TariffSchedule TariffSchedule::time_of_use(TimeSeries import_rate,
                                           TimeSeries export_rate) {
  TariffSchedule t{TariffKind::TimeOfUse, std::move(import_rate), std::move(export_rate)};
  validate(t);
  return t;
}

void validate(const TariffSchedule& t) {
  validate(t.import_rate);
  validate(t.export_rate);
  if (!(t.import_rate.grid == t.export_rate.grid))
    throw std::invalid_argument("TariffSchedule: import/export grids differ");
  for (int i = 0; i < t.import_rate.grid.n_steps; ++i) {
    if (t.import_rate.values[i] < 0.0 || t.export_rate.values[i] < 0.0)
      throw std::invalid_argument("TariffSchedule: negative rate");
    if (t.export_rate.values[i] > t.import_rate.values[i] + 1e-12)
      throw std::invalid_argument("TariffSchedule: export rate exceeds import rate");
  }
}

double rate_at(const TariffSchedule& tariff, int step, Direction direction) {
  if (step < 0 || step >= tariff.import_rate.grid.n_steps)
    throw std::out_of_range("rate_at: step index out of range");
  return direction == Direction::Import ? tariff.import_rate.values[step]
                                        : tariff.export_rate.values[step];
}

}  // namespace tesim
