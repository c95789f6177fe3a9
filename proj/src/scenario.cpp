#include "tesim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tesim {

namespace {

using nlohmann::json;

struct Parser {
  std::vector<std::string> defects;

  void defect(const std::string& where, const std::string& what) {
    defects.push_back(where + ": " + what);
  }

  void check_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!obj.is_object()) {
      defect(where, "expected an object");
      return;
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) defect(where, "unknown key '" + it.key() + "'");
  }

  double number(const json& obj, const std::string& key, const std::string& where,
                std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      defect(where, "missing required field '" + key + "'");
      return 0.0;
    }
    if (!obj[key].is_number()) {
      defect(where + "." + key, "expected a number");
      return fallback.value_or(0.0);
    }
    return obj[key].get<double>();
  }

  std::string text(const json& obj, const std::string& key, const std::string& where,
                   std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      defect(where, "missing required field '" + key + "'");
      return {};
    }
    if (!obj[key].is_string()) {
      defect(where + "." + key, "expected a string");
      return fallback.value_or("");
    }
    return obj[key].get<std::string>();
  }

  TimeSeries series(const json& value, const TimeGrid& grid,
                    const std::string& where) {
    if (value.is_number())
      return constant_series(grid, value.get<double>());
    if (value.is_array()) {
      if (value.size() != static_cast<size_t>(grid.n_steps)) {
        defect(where, "expected " + std::to_string(grid.n_steps) + " values, got " +
                          std::to_string(value.size()));
        return constant_series(grid, 0.0);
      }
      TimeSeries s{grid, {}};
      for (const auto& v : value) {
        if (!v.is_number()) {
          defect(where, "non-numeric entry");
          return constant_series(grid, 0.0);
        }
        s.values.push_back(v.get<double>());
      }
      return s;
    }
    defect(where, "expected a number or an array");
    return constant_series(grid, 0.0);
  }
};

}  // namespace

ParseResult parse_config(const std::string& input) {
  Parser p;
  json root;
  try {
    root = json::parse(input);
  } catch (const json::parse_error& e) {
    return ParseResult{std::nullopt, {std::string("config: ") + e.what()}};
  }

  ScenarioConfig cfg;
  p.check_keys(root,
               {"name", "grid", "horizon_days", "seed", "tariff", "market",
                "events", "topology", "homes"},
               "config");
  if (!root.is_object()) return ParseResult{std::nullopt, p.defects};

  cfg.name = p.text(root, "name", "config", std::string{});
  if (!root.contains("seed"))
    p.defect("config", "missing required field 'seed'");
  else if (!root["seed"].is_number_integer())
    p.defect("config.seed", "expected an integer");
  else
    cfg.seed = root["seed"].get<std::uint64_t>();
  cfg.horizon_days = static_cast<int>(p.number(root, "horizon_days", "config", 1.0));
  if (cfg.horizon_days < 1) p.defect("config.horizon_days", "must be >= 1");

  // Time grid.
  if (root.contains("grid")) {
    const auto& g = root["grid"];
    p.check_keys(g, {"start_hour", "step_hours", "n_steps"}, "grid");
    if (g.is_object()) {
      cfg.grid.start_hour = p.number(g, "start_hour", "grid", 0.0);
      cfg.grid.step_hours = p.number(g, "step_hours", "grid", 1.0);
      cfg.grid.n_steps = static_cast<int>(p.number(g, "n_steps", "grid", 24.0));
    }
  }
  try {
    validate(cfg.grid);
  } catch (const std::exception& e) {
    p.defect("grid", e.what());
    return ParseResult{std::nullopt, p.defects};
  }

  // Tariff.
  if (!root.contains("tariff")) {
    p.defect("config", "missing required field 'tariff'");
  } else {
    const auto& t = root["tariff"];
    p.check_keys(t, {"kind", "import_rate", "export_rate"}, "tariff");
    const std::string kind = p.text(t, "kind", "tariff", std::string("flat"));
    TimeSeries imp = t.is_object() && t.contains("import_rate")
                         ? p.series(t["import_rate"], cfg.grid, "tariff.import_rate")
                         : (p.defect("tariff", "missing required field 'import_rate'"),
                            constant_series(cfg.grid, 0.0));
    TimeSeries exp = constant_series(cfg.grid, 0.0);
    if (kind == "net-metering") {
      if (t.is_object() && t.contains("export_rate"))
        p.defect("tariff", "net-metering fixes export_rate = import_rate");
      exp = imp;
      cfg.tariff.kind = TariffKind::NetMetering;
    } else if (kind == "flat" || kind == "time-of-use") {
      if (t.is_object() && t.contains("export_rate"))
        exp = p.series(t["export_rate"], cfg.grid, "tariff.export_rate");
      cfg.tariff.kind = kind == "flat" ? TariffKind::Flat : TariffKind::TimeOfUse;
    } else {
      p.defect("tariff.kind", "unknown kind '" + kind + "'");
    }
    cfg.tariff.import_rate = imp;
    cfg.tariff.export_rate = exp;
    try {
      validate(cfg.tariff);
    } catch (const std::exception& e) {
      p.defect("tariff", e.what());
    }
  }

  // Market.
  if (root.contains("market")) {
    const auto& m = root["market"];
    p.check_keys(m, {"max_iterations", "step_size", "tolerance_kw"}, "market");
    if (m.is_object()) {
      cfg.market.max_iterations =
          static_cast<int>(p.number(m, "max_iterations", "market", 500.0));
      cfg.market.step_size = p.number(m, "step_size", "market", 0.005);
      cfg.market.tolerance_kw = p.number(m, "tolerance_kw", "market", 1e-6);
      if (cfg.market.step_size <= 0.0) p.defect("market.step_size", "must be > 0");
      if (cfg.market.tolerance_kw <= 0.0) p.defect("market.tolerance_kw", "must be > 0");
    }
  }

  // Events.
  if (root.contains("events")) {
    const auto& e = root["events"];
    p.check_keys(e, {"solar_inverter_outage_daily_prob", "p2p_network_outage_daily_prob"},
                 "events");
    if (e.is_object()) {
      cfg.events.solar_inverter_outage_daily_prob =
          p.number(e, "solar_inverter_outage_daily_prob", "events", 0.0);
      cfg.events.p2p_network_outage_daily_prob =
          p.number(e, "p2p_network_outage_daily_prob", "events", 0.0);
    }
    for (double prob : {cfg.events.solar_inverter_outage_daily_prob,
                        cfg.events.p2p_network_outage_daily_prob})
      if (prob < 0.0 || prob > 1.0)
        p.defect("events", "probability " + std::to_string(prob) + " outside [0,1]");
  }

  // Topology.
  if (!root.contains("topology")) {
    p.defect("config", "missing required field 'topology'");
  } else {
    const auto& t = root["topology"];
    p.check_keys(t, {"nodes", "lines", "slack_capacity_kw"}, "topology");
    if (t.is_object() && t.contains("nodes") && t["nodes"].is_array()) {
      for (const auto& n : t["nodes"]) {
        p.check_keys(n, {"id", "kind"}, "topology.nodes[]");
        GridNode node;
        node.id = p.text(n, "id", "topology.nodes[]");
        const std::string kind = p.text(n, "kind", "topology.nodes[]", std::string("home"));
        if (kind == "home") node.kind = NodeKind::Home;
        else if (kind == "community_storage") node.kind = NodeKind::CommunityStorage;
        else if (kind == "utility") node.kind = NodeKind::Utility;
        else p.defect("topology.nodes[].kind", "unknown kind '" + kind + "'");
        cfg.topology.nodes.push_back(node);
      }
    } else {
      p.defect("topology", "missing required field 'nodes'");
    }
    if (t.is_object() && t.contains("lines") && t["lines"].is_array()) {
      for (const auto& l : t["lines"]) {
        p.check_keys(l, {"from", "to", "capacity_kw", "loss_coeff"}, "topology.lines[]");
        GridLine line;
        line.from = p.text(l, "from", "topology.lines[]");
        line.to = p.text(l, "to", "topology.lines[]");
        line.capacity_kw = p.number(l, "capacity_kw", "topology.lines[]");
        line.loss_coeff = p.number(l, "loss_coeff", "topology.lines[]", 0.0);
        cfg.topology.lines.push_back(line);
      }
    } else {
      p.defect("topology", "missing required field 'lines'");
    }
    if (t.is_object() && t.contains("slack_capacity_kw"))
      cfg.topology.slack_capacity_kw = p.number(t, "slack_capacity_kw", "topology");
    for (const auto& d : validate_topology(cfg.topology)) p.defect("topology", d);
  }

  // Homes.
  if (!root.contains("homes") || !root["homes"].is_array()) {
    p.defect("config", "missing required field 'homes'");
  } else {
    std::set<std::string> seen_ids;
    std::set<std::string> node_ids;
    for (const auto& n : cfg.topology.nodes) node_ids.insert(n.id);
    for (const auto& h : root["homes"]) {
      p.check_keys(h,
                   {"id", "fixed_load", "appliances", "solar", "bess",
                    "service_limit_kw"},
                   "homes[]");
      HomeSpec home;
      home.id = p.text(h, "id", "homes[]");
      const std::string where = "homes['" + home.id + "']";
      if (!seen_ids.insert(home.id).second)
        p.defect(where, "duplicate home id '" + home.id + "'");
      if (!node_ids.count(home.id))
        p.defect(where, "home id '" + home.id + "' missing from topology");
      home.service_limit_kw = p.number(h, "service_limit_kw", where, 24.0);
      home.fixed_load = h.is_object() && h.contains("fixed_load")
                            ? p.series(h["fixed_load"], cfg.grid, where + ".fixed_load")
                            : constant_series(cfg.grid, 0.0);
      if (h.is_object() && h.contains("solar")) {
        const auto& s = h["solar"];
        p.check_keys(s, {"peak_kw", "daylight_hours", "angle_factor", "peak_hour", "haze"},
                     where + ".solar");
        SolarArraySpec spec;
        spec.peak_kw = p.number(s, "peak_kw", where + ".solar", 5.0);
        spec.daylight_hours = p.number(s, "daylight_hours", where + ".solar", 12.0);
        spec.angle_factor = p.number(s, "angle_factor", where + ".solar", 0.63);
        spec.peak_hour = p.number(s, "peak_hour", where + ".solar", 15.0);
        if (s.is_object() && s.contains("haze"))
          spec.haze = p.series(s["haze"], cfg.grid, where + ".solar.haze");
        home.solar = spec;
      }
      if (h.is_object() && h.contains("bess")) {
        const auto& b = h["bess"];
        p.check_keys(b, {"capacity_kwh", "continuous_power_kw", "round_trip_efficiency"},
                     where + ".bess");
        BessSpec spec;
        spec.capacity_kwh = p.number(b, "capacity_kwh", where + ".bess", 13.5);
        spec.continuous_power_kw = p.number(b, "continuous_power_kw", where + ".bess", 5.6);
        spec.round_trip_efficiency =
            p.number(b, "round_trip_efficiency", where + ".bess", 0.85);
        home.bess = spec;
      }
      if (h.is_object() && h.contains("appliances")) {
        if (!h["appliances"].is_array()) {
          p.defect(where + ".appliances", "expected an array");
        } else {
          for (const auto& a : h["appliances"]) {
            p.check_keys(a,
                         {"name", "power_kw", "duration_steps", "earliest_step",
                          "latest_step", "interruptible"},
                         where + ".appliances[]");
            Appliance ap;
            ap.name = p.text(a, "name", where + ".appliances[]");
            ap.power_kw = p.number(a, "power_kw", where + ".appliances[]");
            ap.duration_steps =
                static_cast<int>(p.number(a, "duration_steps", where + ".appliances[]", 1.0));
            ap.earliest_step =
                static_cast<int>(p.number(a, "earliest_step", where + ".appliances[]", 0.0));
            ap.latest_step = static_cast<int>(p.number(
                a, "latest_step", where + ".appliances[]",
                static_cast<double>(cfg.grid.n_steps - 1)));
            if (a.is_object() && a.contains("interruptible") && a["interruptible"].is_boolean())
              ap.interruptible = a["interruptible"].get<bool>();
            home.appliances.push_back(ap);
          }
        }
      }
      try {
        validate(home);
      } catch (const std::exception& e) {
        p.defect(where, e.what());
      }
      cfg.homes.push_back(std::move(home));
    }
    if (cfg.homes.empty()) p.defect("homes", "at least one home is required");
  }

  if (!p.defects.empty()) return ParseResult{std::nullopt, p.defects};
  return ParseResult{std::move(cfg), {}};
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ParseResult r = parse_config(buf.str());
  if (!r.config) {
    std::string msg = "invalid scenario '" + path + "':";
    for (const auto& d : r.defects) msg += "\n  " + d;
    throw std::runtime_error(msg);
  }
  return *std::move(r.config);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double event_draw(std::uint64_t seed, const std::string& home_id, int day, int kind) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a(home_id));
  h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(day + 1)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

EventTrace sample_events(const ScenarioConfig& config) {
  EventTrace trace;
  for (int day = 0; day < config.horizon_days; ++day) {
    for (const auto& home : config.homes) {
      if (!home.solar) continue;
      if (event_draw(config.seed, home.id, day, 0) <
          config.events.solar_inverter_outage_daily_prob)
        trace.push_back(Event{day, EventKind::InverterOutage, home.id});
    }
    if (event_draw(config.seed, "", day, 1) <
        config.events.p2p_network_outage_daily_prob)
      trace.push_back(Event{day, EventKind::P2pOutage, ""});
  }
  return trace;
}

namespace {

struct DayKey {
  bool p2p_down = false;
  std::vector<std::string> outages;  // sorted
  bool operator<(const DayKey& o) const {
    return std::tie(p2p_down, outages) < std::tie(o.p2p_down, o.outages);
  }
};

DayResult simulate_day(const ScenarioConfig& config, const DayKey& key,
                       bool parallel) {
  std::vector<HouseProblem> problems;
  for (const auto& home : config.homes) {
    HouseProblem hp;
    hp.home = home;
    hp.tariff = config.tariff;
    if (std::binary_search(key.outages.begin(), key.outages.end(), home.id))
      hp.home.solar.reset();
    problems.push_back(std::move(hp));
  }
  DayResult day;
  day.p2p_disabled = key.p2p_down;
  day.outage_homes = key.outages;
  if (!key.p2p_down) {
    day.market = run_market(problems, config.topology, config.market, parallel);
    return day;
  }
  // P2P network down: every home falls back to the utility grid alone.
  MarketResult& m = day.market;
  m.price.prices = config.tariff.export_rate;  // no trades happen at any price
  m.converged = true;
  std::vector<std::string> ids;
  for (const auto& hp : problems) ids.push_back(hp.home.id);
  m.responses.resize(problems.size());
  std::vector<std::string> errors(problems.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int i = 0; i < static_cast<int>(problems.size()); ++i) {
    try {
      m.responses[i] = solve_house(problems[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      m.errors.push_back("home '" + ids[i] + "': " + errors[i]);
  if (m.errors.empty()) {
    for (int t = 0; t < config.grid.n_steps; ++t)
      m.flows.push_back(FlowSolution{
          std::vector<double>(config.topology.lines.size(), 0.0), 0.0, 0.0});
    m.settlement = settle_ledger(ids, m.responses, m.price, config.tariff);
  }
  return day;
}

}  // namespace

SimulationResult simulate_horizon(const ScenarioConfig& config, bool parallel) {
  SimulationResult result;
  for (const auto& h : config.homes) result.home_ids.push_back(h.id);
  result.events = sample_events(config);

  // Weather is deterministic, so days sharing an event pattern are identical;
  // solve each distinct pattern once.
  std::vector<DayKey> day_keys(config.horizon_days);
  for (const auto& ev : result.events) {
    if (ev.kind == EventKind::P2pOutage) day_keys[ev.day].p2p_down = true;
    else day_keys[ev.day].outages.push_back(ev.home_id);
  }
  for (auto& k : day_keys) std::sort(k.outages.begin(), k.outages.end());
  std::map<DayKey, DayResult> unique;
  for (const auto& k : day_keys) unique.emplace(k, DayResult{});
  for (auto& [key, day] : unique) day = simulate_day(config, key, parallel);

  result.days.reserve(config.horizon_days);
  result.annual_net_benefit.assign(config.homes.size(), 0.0);
  for (int d = 0; d < config.horizon_days; ++d) {
    result.days.push_back(unique.at(day_keys[d]));
    const auto& settlement = result.days.back().market.settlement;
    for (size_t i = 0; i < settlement.homes.size(); ++i)
      result.annual_net_benefit[i] -= settlement.homes[i].total_cost();
  }
  return result;
}

TimeSeries net_load_curve(const SimulationResult& result, int day,
                          const ScenarioConfig& config) {
  if (day < 0 || day >= static_cast<int>(result.days.size()))
    throw std::out_of_range("net_load_curve: day out of range");
  TimeSeries curve = constant_series(config.grid, 0.0);
  for (const auto& resp : result.days[day].market.responses) {
    if (resp.schedule.utility_kw.empty()) continue;
    for (int t = 0; t < config.grid.n_steps; ++t)
      curve.values[t] +=
          resp.schedule.utility_kw[t] + resp.schedule.p2p_kw[t];
  }
  return curve;
}

}  // namespace tesim
