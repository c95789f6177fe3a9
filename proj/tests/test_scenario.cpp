#include <doctest.h>

#include <string>

#include "tesim/houseopt.hpp"
#include "tesim/scenario.hpp"

using namespace tesim;

namespace {

std::string minimal_config(const std::string& extra_home = "",
                           const std::string& events = "") {
  return R"({
    "name": "t",
    "grid": {"start_hour": 0, "step_hours": 1, "n_steps": 24},
    "horizon_days": 2,
    "seed": 3,
    "tariff": {"kind": "flat", "import_rate": 0.30, "export_rate": 0.10},
    )" + (events.empty() ? "" : "\"events\": " + events + ",") + R"(
    "topology": {
      "nodes": [
        {"id": "feeder", "kind": "utility"},
        {"id": "h1", "kind": "home"})" +
         (extra_home.empty() ? "" : ", {\"id\": \"h2\", \"kind\": \"home\"}") + R"(
      ],
      "lines": [
        {"from": "feeder", "to": "h1", "capacity_kw": 30})" +
         (extra_home.empty()
              ? ""
              : ", {\"from\": \"feeder\", \"to\": \"h2\", \"capacity_kw\": 30}") + R"(
      ]
    },
    "homes": [
      {"id": "h1", "fixed_load": 1.0,
       "solar": {"peak_kw": 5, "daylight_hours": 12, "angle_factor": 0.63, "peak_hour": 15}}
      )" + extra_home + R"(
    ]
  })";
}

}  // namespace

TEST_CASE("minimal config parses") {
  const auto r = parse_config(minimal_config());
  CHECK(r.defects.empty());
  REQUIRE(r.config.has_value());
  CHECK(r.config->homes.size() == 1);
  CHECK(r.config->seed == 3);
  CHECK(r.config->tariff.kind == TariffKind::Flat);
}

TEST_CASE("duplicate home ids are named") {
  const auto r = parse_config(minimal_config(
      R"(, {"id": "h1", "fixed_load": 0.5})"));
  CHECK_FALSE(r.config.has_value());
  bool named = false;
  for (const auto& d : r.defects)
    if (d.find("duplicate") != std::string::npos && d.find("h1") != std::string::npos)
      named = true;
  CHECK(named);
}

TEST_CASE("home missing from topology is a defect") {
  const auto r = parse_config(minimal_config(
      R"(, {"id": "ghost", "fixed_load": 0.5})"));
  CHECK_FALSE(r.config.has_value());
  bool named = false;
  for (const auto& d : r.defects)
    if (d.find("ghost") != std::string::npos) named = true;
  CHECK(named);
}

TEST_CASE("out-of-range probability is a defect") {
  const auto r = parse_config(
      minimal_config("", R"({"solar_inverter_outage_daily_prob": 1.5})"));
  CHECK_FALSE(r.config.has_value());
}

TEST_CASE("unknown keys are reported with their location") {
  std::string cfg = minimal_config();
  cfg.insert(cfg.rfind('}'), R"(, "tpyo": 1)");
  const auto r = parse_config(cfg);
  CHECK_FALSE(r.config.has_value());
  bool named = false;
  for (const auto& d : r.defects)
    if (d.find("tpyo") != std::string::npos) named = true;
  CHECK(named);
}

TEST_CASE("all defects are collected, not just the first") {
  const auto r = parse_config(R"({
    "name": "bad",
    "grid": {"start_hour": 0, "step_hours": 1, "n_steps": 24},
    "tariff": {"kind": "flat", "import_rate": 0.30},
    "events": {"solar_inverter_outage_daily_prob": -0.5},
    "topology": {"nodes": [{"id": "h1", "kind": "home"}], "lines": []},
    "homes": [{"id": "h1", "fixed_load": 1.0}, {"id": "h1", "fixed_load": 1.0}]
  })");
  CHECK_FALSE(r.config.has_value());
  CHECK(r.defects.size() >= 3);  // missing seed, bad probability, duplicate id, no slack
}

TEST_CASE("zero probability yields no events") {
  auto cfg = *parse_config(minimal_config()).config;
  cfg.horizon_days = 100;
  CHECK(sample_events(cfg).empty());
}

TEST_CASE("certain outages fire every day") {
  auto cfg = *parse_config(minimal_config(
                               "", R"({"solar_inverter_outage_daily_prob": 1.0})"))
                  .config;
  cfg.horizon_days = 10;
  const auto trace = sample_events(cfg);
  CHECK(trace.size() == 10);
  for (const auto& ev : trace) CHECK(ev.kind == EventKind::InverterOutage);
}

TEST_CASE("event draws are reproducible and per-home stable") {
  auto one = *parse_config(minimal_config(
                               "", R"({"solar_inverter_outage_daily_prob": 0.3})"))
                  .config;
  one.horizon_days = 50;
  auto two = *parse_config(minimal_config(
                               R"(, {"id": "h2", "fixed_load": 0.5,
                                     "solar": {"peak_kw": 3}})",
                               R"({"solar_inverter_outage_daily_prob": 0.3})"))
                  .config;
  two.horizon_days = 50;

  const auto t1 = sample_events(one);
  const auto t1b = sample_events(one);
  REQUIRE(t1.size() == t1b.size());
  for (size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].day == t1b[i].day);
    CHECK(t1[i].home_id == t1b[i].home_id);
  }
  // Adding h2 must not perturb h1's draws.
  std::vector<int> h1_days_alone, h1_days_joined;
  for (const auto& ev : t1) h1_days_alone.push_back(ev.day);
  for (const auto& ev : sample_events(two))
    if (ev.home_id == "h1") h1_days_joined.push_back(ev.day);
  CHECK(h1_days_alone == h1_days_joined);
}

TEST_CASE("outage frequency tracks the binomial mean") {
  auto cfg = *parse_config(minimal_config(
                               "", R"({"solar_inverter_outage_daily_prob": 0.02})"))
                  .config;
  cfg.horizon_days = 250;
  double total = 0.0;
  const int kSeeds = 10000;
  for (int s = 0; s < kSeeds; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    total += static_cast<double>(sample_events(cfg).size());
  }
  CHECK(total / kSeeds == doctest::Approx(5.0).epsilon(0.04));  // 5.0 +/- 0.2
}

TEST_CASE("solar home earns the nominal annual benefit over 250 days") {
  auto cfg = *parse_config(minimal_config()).config;
  cfg.homes[0].fixed_load = constant_series(cfg.grid, 0.0);
  cfg.tariff = TariffSchedule::net_metering(cfg.grid, 0.24);
  cfg.horizon_days = 250;
  const auto result = simulate_horizon(cfg);
  CHECK(result.annual_net_benefit[0] ==
        doctest::Approx(2268.0).epsilon(0.01));  // paper-rounded $2250 within 1%
}

TEST_CASE("inverter outages subtract whole days of revenue") {
  auto cfg = *parse_config(minimal_config(
                               "", R"({"solar_inverter_outage_daily_prob": 0.02})"))
                  .config;
  cfg.homes[0].fixed_load = constant_series(cfg.grid, 0.0);
  cfg.tariff = TariffSchedule::net_metering(cfg.grid, 0.24);
  cfg.horizon_days = 250;
  const auto result = simulate_horizon(cfg);
  const auto n_out = static_cast<double>(result.events.size());
  CHECK(n_out > 0);
  CHECK(result.annual_net_benefit[0] ==
        doctest::Approx(2268.0 - n_out * 9.072).epsilon(1e-9));
}

TEST_CASE("permanent p2p outage reduces to standalone homes") {
  auto cfg = *parse_config(minimal_config(
                               R"(, {"id": "h2", "fixed_load": 2.0})",
                               R"({"p2p_network_outage_daily_prob": 1.0})"))
                  .config;
  cfg.horizon_days = 3;
  const auto result = simulate_horizon(cfg);
  for (const auto& day : result.days) {
    CHECK(day.p2p_disabled);
    for (const auto& hs : day.market.settlement.homes) {
      CHECK(hs.p2p_payment == doctest::Approx(0.0));
      for (double q : hs.p2p_bought_kwh) CHECK(q == 0.0);
    }
  }
  for (size_t i = 0; i < cfg.homes.size(); ++i) {
    HouseProblem alone;
    alone.home = cfg.homes[i];
    alone.tariff = cfg.tariff;
    CHECK(result.days[0].market.settlement.homes[i].total_cost() ==
          doctest::Approx(solve_house(alone).cost).epsilon(1e-9));
  }
}

TEST_CASE("net load curve equals total fixed load without generation") {
  auto cfg = *parse_config(minimal_config(R"(, {"id": "h2", "fixed_load": 2.0})"))
                  .config;
  cfg.homes[0].solar.reset();
  const auto result = simulate_horizon(cfg);
  const auto curve = net_load_curve(result, 0, cfg);
  for (int t = 0; t < cfg.grid.n_steps; ++t)
    CHECK(curve.values[t] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS_AS(net_load_curve(result, 99, cfg), std::out_of_range);
}

TEST_CASE("simulation is deterministic across worker modes") {
  auto cfg = *parse_config(minimal_config(
                               R"(, {"id": "h2", "fixed_load": 2.0})",
                               R"({"solar_inverter_outage_daily_prob": 0.1})"))
                  .config;
  cfg.horizon_days = 20;
  const auto a = simulate_horizon(cfg, true);
  const auto b = simulate_horizon(cfg, false);
  REQUIRE(a.days.size() == b.days.size());
  for (size_t i = 0; i < a.annual_net_benefit.size(); ++i)
    CHECK(a.annual_net_benefit[i] == b.annual_net_benefit[i]);
  for (size_t d = 0; d < a.days.size(); ++d)
    for (size_t i = 0; i < a.days[d].market.responses.size(); ++i)
      for (int t = 0; t < cfg.grid.n_steps; ++t)
        CHECK(a.days[d].market.responses[i].injection.values[t] ==
              b.days[d].market.responses[i].injection.values[t]);
}
