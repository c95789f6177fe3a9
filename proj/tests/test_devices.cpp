#include <doctest.h>

#include <random>

#include "tesim/devices.hpp"

using namespace tesim;

namespace {
const TimeGrid kDay{0.0, 1.0, 24};
}

TEST_CASE("zero-peak array produces nothing") {
  SolarArraySpec s;
  s.peak_kw = 0.0;
  for (double v : solar_profile(s, kDay).values) CHECK(v == 0.0);
}

TEST_CASE("default array delivers the nominal 37.8 kWh") {
  const TimeSeries p = solar_profile(SolarArraySpec{}, kDay);
  CHECK(integrate_energy(p) == doctest::Approx(37.8).epsilon(1e-12));
}

TEST_CASE("constant haze scales energy linearly") {
  SolarArraySpec s;
  s.haze = constant_series(kDay, 0.5);
  CHECK(integrate_energy(solar_profile(s, kDay)) ==
        doctest::Approx(18.9).epsilon(1e-12));
}

TEST_CASE("profile stays within [0, peak] and inside the daylight window") {
  SolarArraySpec s;  // window 9:00 .. 21:00
  const TimeSeries p = solar_profile(s, kDay);
  for (int t = 0; t < 24; ++t) {
    CHECK(p.values[t] >= 0.0);
    CHECK(p.values[t] <= s.peak_kw + 1e-12);
    if (t < 9 || t >= 21) CHECK(p.values[t] == 0.0);
  }
  // Symmetric about the peak hour on this grid.
  CHECK(p.values[9] == doctest::Approx(p.values[20]));
  CHECK(p.values[14] == doctest::Approx(p.values[15]));
}

TEST_CASE("solar spec validation") {
  SolarArraySpec s;
  s.angle_factor = 0.0;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = {};
  s.daylight_hours = 25.0;
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = {};
  s.haze = constant_series(kDay, 1.5);
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

TEST_CASE("charge time") {
  CHECK(bess_charge_time_h(BessSpec{}) == doctest::Approx(13.5 / 5.6));
  CHECK(bess_charge_time_h(BessSpec{10.0, 5.0}) == doctest::Approx(2.0));
  CHECK(bess_charge_time_h(BessSpec{13.5, 13.5}) == doctest::Approx(1.0));
}

TEST_CASE("nominal-rate charge fills the pack in the nominal time") {
  const BessSpec spec;
  const auto r = bess_step(spec, BessState{0.0}, 5.6, bess_charge_time_h(spec));
  CHECK(r.state.soc_kwh == doctest::Approx(13.5));
  CHECK(r.energy_kwh == doctest::Approx(13.5));
  CHECK_FALSE(r.truncated);
}

TEST_CASE("full discharge delivers capacity times efficiency") {
  const BessSpec spec;
  const auto r = bess_step(spec, BessState{13.5}, -5.6, 13.5 / 5.6);
  CHECK(r.state.soc_kwh == doctest::Approx(0.0));
  CHECK(r.energy_kwh == doctest::Approx(13.5 * 0.85));
}

TEST_CASE("charging a full pack truncates to zero") {
  const auto r = bess_step(BessSpec{}, BessState{13.5}, 1.0, 1.0);
  CHECK(r.state.soc_kwh == doctest::Approx(13.5));
  CHECK(r.energy_kwh == doctest::Approx(0.0));
  CHECK(r.truncated);
}

TEST_CASE("over-rating commands are rejected") {
  CHECK_THROWS_AS(bess_step(BessSpec{}, BessState{0.0}, 5.7, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bess_step(BessSpec{}, BessState{13.5}, -5.7, 1.0),
                  std::invalid_argument);
}

TEST_CASE("SoC never leaves [0, capacity]") {
  const BessSpec spec{10.0, 4.0, 0.9};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cmd(-4.0, 4.0);
  BessState st{5.0};
  for (int i = 0; i < 1000; ++i) {
    st = bess_step(spec, st, cmd(rng), 0.5).state;
    CHECK(st.soc_kwh >= -1e-12);
    CHECK(st.soc_kwh <= spec.capacity_kwh + 1e-12);
  }
}

TEST_CASE("full cycle conserves round-trip efficiency") {
  const BessSpec spec{8.0, 4.0, 0.85};
  BessState st{0.0};
  double absorbed = 0.0;
  for (int i = 0; i < 4; ++i) {  // charge 8 kWh in 4 steps
    const auto r = bess_step(spec, st, 2.0, 1.0);
    absorbed += r.energy_kwh;
    st = r.state;
  }
  CHECK(absorbed == doctest::Approx(8.0));
  double delivered = 0.0;
  while (st.soc_kwh > 1e-12) {
    const auto r = bess_step(spec, st, -4.0, 1.0);
    delivered += r.energy_kwh;
    st = r.state;
  }
  CHECK(delivered == doctest::Approx(0.85 * absorbed));
}

TEST_CASE("grid assist headroom") {
  CHECK(grid_assist_headroom_kw(BessSpec{}, SolarArraySpec{}) == doctest::Approx(0.6));
  CHECK(grid_assist_headroom_kw(BessSpec{13.5, 5.0}, SolarArraySpec{}) == 0.0);
  CHECK(grid_assist_headroom_kw(BessSpec{13.5, 4.0}, SolarArraySpec{}) == 0.0);
}

TEST_CASE("appliance and home validation") {
  Appliance a{"oven", 10.0, 2, 17, 18, false};
  CHECK_NOTHROW(validate(a, kDay));
  a.latest_step = 17;  // window narrower than duration
  CHECK_THROWS_AS(validate(a, kDay), std::invalid_argument);
  a = {"oven", 10.0, 1, 17, 24, false};  // past the grid
  CHECK_THROWS_AS(validate(a, kDay), std::invalid_argument);

  HomeSpec h;
  h.id = "h1";
  h.fixed_load = constant_series(kDay, 25.0);  // above the 24 kW service limit
  CHECK_THROWS_AS(validate(h), std::invalid_argument);
  h.fixed_load = constant_series(kDay, 2.0);
  CHECK_NOTHROW(validate(h));
}
