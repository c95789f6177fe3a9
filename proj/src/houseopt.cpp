#include "tesim/houseopt.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "tesim/linprog.hpp"

namespace tesim {

namespace {

constexpr double kTieEps = 1e-12;

// One candidate run pattern per appliance: the sorted set of on-steps.
std::vector<std::vector<int>> run_patterns(const Appliance& a) {
  std::vector<std::vector<int>> out;
  if (!a.interruptible) {
    for (int s = a.earliest_step; s + a.duration_steps - 1 <= a.latest_step; ++s) {
      std::vector<int> steps(a.duration_steps);
      for (int i = 0; i < a.duration_steps; ++i) steps[i] = s + i;
      out.push_back(std::move(steps));
    }
    return out;
  }
  // Interruptible: every duration-sized subset of the window, lexicographic.
  const int w = a.latest_step - a.earliest_step + 1;
  std::vector<int> pick(a.duration_steps);
  for (int i = 0; i < a.duration_steps; ++i) pick[i] = i;
  while (true) {
    std::vector<int> steps(a.duration_steps);
    for (int i = 0; i < a.duration_steps; ++i) steps[i] = a.earliest_step + pick[i];
    out.push_back(std::move(steps));
    if (out.size() > 100000)
      throw std::invalid_argument("Appliance '" + a.name + "': too many run patterns");
    int i = a.duration_steps - 1;
    while (i >= 0 && pick[i] == w - a.duration_steps + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < a.duration_steps; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

struct Ctx {
  const HouseProblem* pb = nullptr;
  int steps = 0;
  double step_h = 1.0;
  std::vector<double> solar_kw, fixed_kw;
  std::vector<double> buy_price, sell_price;  // best available per step
  bool can_trade = true;
  std::vector<std::vector<std::vector<int>>> patterns;  // per appliance
};

Ctx make_ctx(const HouseProblem& pb) {
  validate(pb.home);
  validate(pb.tariff);
  if (!(pb.tariff.import_rate.grid == pb.grid()))
    throw std::invalid_argument("HouseProblem: tariff grid mismatch");
  if (pb.p2p_price) {
    validate(*pb.p2p_price);
    if (!(pb.p2p_price->grid == pb.grid()))
      throw std::invalid_argument("HouseProblem: p2p price grid mismatch");
  }
  Ctx c;
  c.pb = &pb;
  c.steps = pb.grid().n_steps;
  c.step_h = pb.grid().step_hours;
  c.fixed_kw = pb.home.fixed_load.values;
  c.solar_kw = pb.home.solar ? solar_profile(*pb.home.solar, pb.grid()).values
                             : std::vector<double>(c.steps, 0.0);
  c.can_trade = !pb.islanded || pb.p2p_price.has_value();
  c.buy_price.resize(c.steps);
  c.sell_price.resize(c.steps);
  for (int t = 0; t < c.steps; ++t) {
    const double imp = pb.tariff.import_rate.values[t];
    const double exp = pb.tariff.export_rate.values[t];
    if (pb.islanded && pb.p2p_price) {
      c.buy_price[t] = pb.p2p_price->values[t];
      c.sell_price[t] = pb.p2p_price->values[t];
    } else if (pb.p2p_price) {
      c.buy_price[t] = std::min(imp, pb.p2p_price->values[t]);
      c.sell_price[t] = std::max(exp, pb.p2p_price->values[t]);
    } else {
      c.buy_price[t] = imp;
      c.sell_price[t] = exp;
    }
  }
  for (const auto& a : pb.home.appliances) {
    c.patterns.push_back(run_patterns(a));
    if (c.patterns.back().empty())
      throw InfeasibleHouse("appliance '" + a.name + "' cannot fit its window");
  }
  return c;
}

// -1 = relaxed; appliance entries index into patterns, mode entries are
// 0 = charge-only, 1 = discharge-only.
struct Assignment {
  std::vector<int> appl;
  std::vector<int> mode;
};

struct ContOut {
  bool feasible = false;
  std::string infeasible_label;
  double cost = 0.0;
  std::vector<double> buy, sell, charge, discharge;
  std::vector<double> marginal_value;  // $/kWh per step
};

ContOut solve_continuous(const Ctx& c, const Assignment& asg, bool want_duals) {
  const int T = c.steps;
  const double h = c.step_h;
  const bool bess = c.pb->home.bess.has_value();
  const double cap = bess ? c.pb->home.bess->capacity_kwh : 0.0;
  const double rating = bess ? c.pb->home.bess->continuous_power_kw : 0.0;
  const double eta = bess ? c.pb->home.bess->round_trip_efficiency : 1.0;

  // Load with the fixed appliance patterns folded in.
  std::vector<double> load = c.fixed_kw;
  std::vector<int> relaxed;  // appliance indices still unfixed
  for (size_t j = 0; j < c.patterns.size(); ++j) {
    if (asg.appl[j] >= 0) {
      for (int t : c.patterns[j][asg.appl[j]])
        load[t] += c.pb->home.appliances[j].power_kw;
    } else {
      relaxed.push_back(static_cast<int>(j));
    }
  }

  // Variable layout: buy, sell, spill per step; charge, discharge per step
  // when a BESS exists; then window slices for each relaxed appliance.
  const int v_buy = 0, v_sell = T, v_spill = 2 * T;
  const int v_charge = 3 * T, v_discharge = bess ? 4 * T : 3 * T;
  int n = bess ? 5 * T : 3 * T;
  std::vector<int> appl_base(c.patterns.size(), -1);
  for (int j : relaxed) {
    appl_base[j] = n;
    n += c.pb->home.appliances[j].latest_step - c.pb->home.appliances[j].earliest_step + 1;
  }

  lp::Problem p(n);
  for (int t = 0; t < T; ++t) {
    p.cost[v_buy + t] = h * c.buy_price[t];
    p.cost[v_sell + t] = -h * c.sell_price[t];
    p.upper[v_buy + t] = c.can_trade ? c.pb->home.service_limit_kw : 0.0;
    if (!c.can_trade) p.upper[v_sell + t] = 0.0;
    if (bess) {
      const int m = asg.mode.empty() ? -1 : asg.mode[t];
      p.upper[v_charge + t] = m == 1 ? 0.0 : rating;
      p.upper[v_discharge + t] = m == 0 ? 0.0 : rating;
    }
  }
  for (int j : relaxed) {
    const auto& a = c.pb->home.appliances[j];
    for (int t = a.earliest_step; t <= a.latest_step; ++t)
      p.upper[appl_base[j] + (t - a.earliest_step)] = a.power_kw;
  }

  for (int t = 0; t < T; ++t) {
    auto& row = p.add_row(lp::Relation::Eq, load[t] - c.solar_kw[t],
                          "power-balance@" + std::to_string(t));
    row.coeffs[v_buy + t] = 1.0;
    row.coeffs[v_sell + t] = -1.0;
    row.coeffs[v_spill + t] = -1.0;
    if (bess) {
      row.coeffs[v_charge + t] = -1.0;
      row.coeffs[v_discharge + t] = eta;
    }
    for (int j : relaxed) {
      const auto& a = c.pb->home.appliances[j];
      if (t >= a.earliest_step && t <= a.latest_step)
        row.coeffs[appl_base[j] + (t - a.earliest_step)] = -1.0;
    }
  }
  if (bess) {
    for (int t = 0; t < T; ++t) {
      {
        auto& up = p.add_row(lp::Relation::Le, cap - c.pb->initial_soc_kwh,
                             "soc-max@" + std::to_string(t));
        for (int u = 0; u <= t; ++u) {
          up.coeffs[v_charge + u] = h;
          up.coeffs[v_discharge + u] = -h;
        }
      }
      {
        auto& dn = p.add_row(lp::Relation::Le, c.pb->initial_soc_kwh,
                             "soc-min@" + std::to_string(t));
        for (int u = 0; u <= t; ++u) {
          dn.coeffs[v_charge + u] = -h;
          dn.coeffs[v_discharge + u] = h;
        }
      }
    }
    if (c.pb->require_terminal_soc) {
      auto& row = p.add_row(lp::Relation::Le, 0.0, "terminal-soc");
      for (int t = 0; t < T; ++t) {
        row.coeffs[v_charge + t] = -h;
        row.coeffs[v_discharge + t] = h;
      }
    }
  }
  // Service limit on the simultaneous home draw.
  for (int t = 0; t < T; ++t) {
    bool any = bess;
    auto& row = p.add_row(lp::Relation::Le,
                          c.pb->home.service_limit_kw - load[t],
                          "service-limit@" + std::to_string(t));
    if (bess) row.coeffs[v_charge + t] = 1.0;
    for (int j : relaxed) {
      const auto& a = c.pb->home.appliances[j];
      if (t >= a.earliest_step && t <= a.latest_step) {
        row.coeffs[appl_base[j] + (t - a.earliest_step)] = 1.0;
        any = true;
      }
    }
    (void)any;
  }
  for (int j : relaxed) {
    const auto& a = c.pb->home.appliances[j];
    auto& row = p.add_row(lp::Relation::Eq, a.power_kw * a.duration_steps,
                          "appliance-energy:" + a.name);
    for (int t = a.earliest_step; t <= a.latest_step; ++t)
      row.coeffs[appl_base[j] + (t - a.earliest_step)] = 1.0;
  }

  const lp::Solution s = lp::solve(p);
  ContOut out;
  if (s.status == lp::Status::Unbounded)
    throw std::runtime_error("house LP unbounded");  // prices are nonnegative
  if (s.status == lp::Status::Infeasible) {
    out.infeasible_label = s.infeasible_label;
    return out;
  }
  out.feasible = true;
  out.cost = s.objective;
  out.buy.resize(T);
  out.sell.resize(T);
  out.charge.assign(T, 0.0);
  out.discharge.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    out.buy[t] = s.x[v_buy + t];
    out.sell[t] = s.x[v_sell + t];
    if (bess) {
      out.charge[t] = s.x[v_charge + t];
      out.discharge[t] = s.x[v_discharge + t];
    }
  }
  if (want_duals) {
    out.marginal_value.resize(T);
    for (int t = 0; t < T; ++t) out.marginal_value[t] = s.duals[t] / h;
  }
  return out;
}

bool complementary(const ContOut& o) {
  for (size_t t = 0; t < o.charge.size(); ++t)
    if (o.charge[t] > 1e-9 && o.discharge[t] > 1e-9) return false;
  return true;
}

HouseResponse assemble(const Ctx& c, const Assignment& asg, const ContOut& sol) {
  const int T = c.steps;
  const auto& pb = *c.pb;
  HouseResponse r;
  r.cost = sol.cost;
  r.marginal_value = sol.marginal_value;
  r.schedule.bess_charge_kw = sol.charge;
  r.schedule.bess_discharge_kw = sol.discharge;
  r.schedule.utility_kw.assign(T, 0.0);
  r.schedule.p2p_kw.assign(T, 0.0);
  for (size_t j = 0; j < c.patterns.size(); ++j) {
    const auto& steps = c.patterns[j][asg.appl[j]];
    r.schedule.appliance_on_steps.push_back(steps);
    r.schedule.appliance_starts.push_back(steps.front());
  }
  const bool p2p = pb.p2p_price.has_value();
  for (int t = 0; t < T; ++t) {
    const double net_import = sol.buy[t] - sol.sell[t];
    double to_p2p = 0.0;
    if (p2p && pb.islanded) {
      to_p2p = net_import;
    } else if (p2p) {
      // Ties between the P2P price and the tariff route to the utility.
      const double price = pb.p2p_price->values[t];
      if (net_import > 0.0 && price < pb.tariff.import_rate.values[t] - kTieEps)
        to_p2p = net_import;
      if (net_import < 0.0 && price > pb.tariff.export_rate.values[t] + kTieEps)
        to_p2p = net_import;
    }
    r.schedule.p2p_kw[t] = to_p2p;
    r.schedule.utility_kw[t] = net_import - to_p2p;
  }
  r.injection = constant_series(pb.grid(), 0.0);
  for (int t = 0; t < T; ++t)
    r.injection.values[t] =
        p2p ? -r.schedule.p2p_kw[t]
            : -(r.schedule.utility_kw[t] + r.schedule.p2p_kw[t]);
  return r;
}

}  // namespace

int count_binaries(const HouseProblem& problem) {
  int n = 0;
  for (const auto& a : problem.home.appliances) {
    const int w = a.latest_step - a.earliest_step + 1;
    n += a.interruptible ? w : w - a.duration_steps + 1;
  }
  if (problem.home.bess) n += problem.grid().n_steps;
  return n;
}

HouseResponse solve_house(const HouseProblem& problem) {
  const Ctx c = make_ctx(problem);
  const int n_appl = static_cast<int>(c.patterns.size());
  const bool bess = problem.home.bess.has_value();

  struct Node {
    Assignment asg;
    ContOut sol;
    double bound;
    long seq;
  };
  auto worse = [](const Node& a, const Node& b) {
    return a.bound > b.bound || (a.bound == b.bound && a.seq > b.seq);
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  long seq = 0;

  Assignment root;
  root.appl.assign(n_appl, -1);
  if (bess) root.mode.assign(c.steps, -1);
  ContOut root_sol = solve_continuous(c, root, false);
  if (!root_sol.feasible) throw InfeasibleHouse(root_sol.infeasible_label);

  bool have_best = false;
  Assignment best_asg;
  double best_cost = 0.0;

  auto consider = [&](const Assignment& asg, const ContOut& sol) {
    // Leaf: every appliance fixed and no simultaneous charge/discharge.
    if (!have_best || sol.cost < best_cost - kTieEps) {
      have_best = true;
      best_cost = sol.cost;
      best_asg = asg;
    }
  };

  auto expand = [&](const Assignment& asg, const ContOut& sol) {
    int j = -1;
    for (int i = 0; i < n_appl; ++i)
      if (asg.appl[i] < 0) { j = i; break; }
    if (j >= 0) {
      for (size_t k = 0; k < c.patterns[j].size(); ++k) {
        Assignment child = asg;
        child.appl[j] = static_cast<int>(k);
        ContOut cs = solve_continuous(c, child, false);
        if (!cs.feasible) continue;
        const bool complete =
            std::none_of(child.appl.begin(), child.appl.end(),
                         [](int v) { return v < 0; }) &&
            complementary(cs);
        if (complete) {
          consider(child, cs);
        } else {
          const double bound = cs.cost;
          open.push(Node{std::move(child), std::move(cs), bound, seq++});
        }
      }
      return;
    }
    // All appliances fixed: branch the first step that charges and
    // discharges at once.
    int t = -1;
    for (int i = 0; i < c.steps; ++i)
      if (sol.charge[i] > 1e-9 && sol.discharge[i] > 1e-9) { t = i; break; }
    if (t < 0) {
      consider(asg, sol);
      return;
    }
    for (int m = 0; m <= 1; ++m) {
      Assignment child = asg;
      child.mode[t] = m;
      ContOut cs = solve_continuous(c, child, false);
      if (!cs.feasible) continue;
      if (complementary(cs)) {
        consider(child, cs);
      } else {
        const double bound = cs.cost;
        open.push(Node{std::move(child), std::move(cs), bound, seq++});
      }
    }
  };

  expand(root, root_sol);
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (have_best && node.bound >= best_cost - kTieEps) break;
    expand(node.asg, node.sol);
  }
  if (!have_best) throw InfeasibleHouse("no feasible integer assignment");

  ContOut final_sol = solve_continuous(c, best_asg, true);
  return assemble(c, best_asg, final_sol);
}

HouseResponse brute_force_house(const HouseProblem& problem) {
  if (count_binaries(problem) > 20)
    throw std::invalid_argument("brute_force_house: more than 20 binaries");
  const Ctx c = make_ctx(problem);
  const int n_appl = static_cast<int>(c.patterns.size());
  const bool bess = problem.home.bess.has_value();
  const long n_modes = bess ? (1L << c.steps) : 1;

  bool have_best = false;
  Assignment best_asg;
  double best_cost = 0.0;

  std::vector<int> pick(n_appl, 0);
  while (true) {
    for (long mv = 0; mv < n_modes; ++mv) {
      Assignment asg;
      asg.appl = pick;
      if (bess) {
        asg.mode.resize(c.steps);
        for (int t = 0; t < c.steps; ++t) asg.mode[t] = (mv >> t) & 1;
      }
      ContOut sol = solve_continuous(c, asg, false);
      if (!sol.feasible) continue;
      if (!have_best || sol.cost < best_cost - kTieEps) {
        have_best = true;
        best_cost = sol.cost;
        best_asg = asg;
      }
    }
    int i = n_appl - 1;
    while (i >= 0 && pick[i] + 1 == static_cast<int>(c.patterns[i].size())) {
      pick[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++pick[i];
  }
  if (!have_best) throw InfeasibleHouse("no feasible integer assignment");
  ContOut final_sol = solve_continuous(c, best_asg, true);
  return assemble(c, best_asg, final_sol);
}

HouseResponse respond_to_price(const HouseProblem& problem,
                               const TimeSeries& p2p_price) {
  validate(p2p_price);
  if (!(p2p_price.grid == problem.grid()))
    throw std::invalid_argument("respond_to_price: price grid mismatch");
  for (int t = 0; t < problem.grid().n_steps; ++t) {
    const double p = p2p_price.values[t];
    if (p < problem.tariff.export_rate.values[t] - 1e-9 ||
        p > problem.tariff.import_rate.values[t] + 1e-9)
      throw RejectedPrice("p2p price outside the tariff band at step " +
                          std::to_string(t));
  }
  HouseProblem with_price = problem;
  with_price.p2p_price = p2p_price;
  return solve_house(with_price);
}

double utility_only_cost(const HouseProblem& problem) {
  HouseProblem alone = problem;
  alone.p2p_price.reset();
  return solve_house(alone).cost;
}

}  // namespace tesim
