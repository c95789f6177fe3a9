#include "tesim/dcgrid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tesim {

std::vector<std::string> validate_topology(const GridTopology& topo) {
  std::vector<std::string> defects;
  std::map<std::string, int> index;
  int utility_count = 0;
  for (size_t i = 0; i < topo.nodes.size(); ++i) {
    const auto& n = topo.nodes[i];
    if (index.count(n.id)) defects.push_back("duplicate node id '" + n.id + "'");
    index[n.id] = static_cast<int>(i);
    if (n.kind == NodeKind::Utility) ++utility_count;
  }
  if (utility_count == 0) defects.push_back("missing slack: no utility node");
  if (utility_count > 1) defects.push_back("multiple utility nodes");

  std::vector<std::vector<int>> adj(topo.nodes.size());
  for (const auto& l : topo.lines) {
    if (!index.count(l.from)) defects.push_back("line endpoint '" + l.from + "' unknown");
    if (!index.count(l.to)) defects.push_back("line endpoint '" + l.to + "' unknown");
    if (l.from == l.to) defects.push_back("self-loop at '" + l.from + "'");
    if (!(l.capacity_kw > 0.0))
      defects.push_back("nonpositive capacity on line " + l.from + "-" + l.to);
    if (l.loss_coeff < 0.0)
      defects.push_back("negative loss coefficient on line " + l.from + "-" + l.to);
    if (index.count(l.from) && index.count(l.to) && l.from != l.to) {
      adj[index[l.from]].push_back(index[l.to]);
      adj[index[l.to]].push_back(index[l.from]);
    }
  }
  if (!topo.nodes.empty()) {
    std::vector<char> seen(topo.nodes.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (!seen[w]) { seen[w] = 1; stack.push_back(w); }
    }
    for (size_t i = 0; i < topo.nodes.size(); ++i)
      if (!seen[i]) defects.push_back("disconnected node '" + topo.nodes[i].id + "'");
  }
  return defects;
}

FlowSolution solve_flows(const GridTopology& topo,
                         const std::map<std::string, double>& injections_kw) {
  {
    auto defects = validate_topology(topo);
    if (!defects.empty())
      throw std::invalid_argument("solve_flows: invalid topology: " + defects.front());
  }
  const int n = static_cast<int>(topo.nodes.size());
  const int m = static_cast<int>(topo.lines.size());
  std::map<std::string, int> index;
  int slack = -1;
  for (int i = 0; i < n; ++i) {
    index[topo.nodes[i].id] = i;
    if (topo.nodes[i].kind == NodeKind::Utility) slack = i;
  }
  for (const auto& [id, v] : injections_kw) {
    if (!index.count(id)) throw std::invalid_argument("solve_flows: unknown node '" + id + "'");
    if (!std::isfinite(v)) throw std::invalid_argument("solve_flows: non-finite injection");
    if (index[id] == slack)
      throw std::invalid_argument("solve_flows: injection given for slack node");
  }

  // Reduced index: nodes excluding slack.
  std::vector<int> red(n, -1);
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (i != slack) red[i] = k++;

  Eigen::VectorXd base_inj = Eigen::VectorXd::Zero(n - 1);
  double total_inj = 0.0;
  for (const auto& [id, v] : injections_kw) {
    base_inj[red[index.at(id)]] = v;
    total_inj += v;
  }

  // Capacity-weighted Laplacian, slack row/column removed.
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (const auto& l : topo.lines) {
    const int u = index.at(l.from), v = index.at(l.to);
    const double w = l.capacity_kw;
    if (u != slack) lap(red[u], red[u]) += w;
    if (v != slack) lap(red[v], red[v]) += w;
    if (u != slack && v != slack) {
      lap(red[u], red[v]) -= w;
      lap(red[v], red[u]) -= w;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lap);
  if (llt.info() != Eigen::Success)
    throw FlowNumericError("solve_flows: singular network matrix");

  FlowSolution sol;
  sol.line_flows_kw.assign(m, 0.0);
  Eigen::VectorXd inj = base_inj;
  double prev_slack = std::numeric_limits<double>::infinity();
  bool lossy = false;
  for (const auto& l : topo.lines) lossy |= l.loss_coeff > 0.0;

  for (int round = 0; round < 100; ++round) {
    Eigen::VectorXd pot = llt.solve(inj);
    double losses = 0.0;
    Eigen::VectorXd loss_load = Eigen::VectorXd::Zero(n - 1);
    for (int e = 0; e < m; ++e) {
      const auto& l = topo.lines[e];
      const int u = index.at(l.from), v = index.at(l.to);
      const double pu = u == slack ? 0.0 : pot[red[u]];
      const double pv = v == slack ? 0.0 : pot[red[v]];
      const double f = l.capacity_kw * (pu - pv);
      sol.line_flows_kw[e] = f;
      if (l.loss_coeff > 0.0) {
        const double loss = l.loss_coeff * f * f;
        losses += loss;
        // Charge the loss to the receiving end.
        const int recv = f >= 0.0 ? v : u;
        if (recv != slack) loss_load[red[recv]] += loss;
      }
    }
    sol.losses_kw = losses;
    sol.slack_injection_kw = -total_inj + losses;
    if (!lossy) break;
    if (std::abs(sol.slack_injection_kw - prev_slack) < 1e-9) break;
    prev_slack = sol.slack_injection_kw;
    if (round == 99)
      throw FlowNumericError("solve_flows: loss iteration did not converge");
    inj = base_inj - loss_load;
  }

  for (int e = 0; e < m; ++e) {
    const auto& l = topo.lines[e];
    if (std::abs(sol.line_flows_kw[e]) > l.capacity_kw + 1e-9) {
      std::ostringstream os;
      os << "line " << l.from << "-" << l.to << " overloaded: |"
         << sol.line_flows_kw[e] << "| kW > " << l.capacity_kw << " kW";
      throw CapacityExceeded(os.str());
    }
  }
  if (topo.slack_capacity_kw &&
      std::abs(sol.slack_injection_kw) > *topo.slack_capacity_kw + 1e-9) {
    std::ostringstream os;
    os << "utility slack overloaded: |" << sol.slack_injection_kw << "| kW > "
       << *topo.slack_capacity_kw << " kW";
    throw CapacityExceeded(os.str());
  }
  return sol;
}

}  // namespace tesim
