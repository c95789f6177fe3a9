#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tesim {

enum class NodeKind { Home, CommunityStorage, Utility };

struct GridNode {
  std::string id;
  NodeKind kind = NodeKind::Home;
};

struct GridLine {
  std::string from;
  std::string to;
  double capacity_kw = 0.0;
  double loss_coeff = 0.0;  // kW lost per kW^2 transferred
};

/// Community DC network.  Exactly one utility node acts as the slack.
struct GridTopology {
  std::vector<GridNode> nodes;
  std::vector<GridLine> lines;
  std::optional<double> slack_capacity_kw;  // unlimited by default
};

/// All invariant violations; empty means valid.
std::vector<std::string> validate_topology(const GridTopology& topo);

struct FlowSolution {
  std::vector<double> line_flows_kw;  // signed, from -> to positive
  double slack_injection_kw = 0.0;
  double losses_kw = 0.0;
};

struct CapacityExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FlowNumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// KCL flow solve with the utility node as slack.  On trees the solution is
/// the unique one; on meshes flows minimize sum(flow^2 / capacity) subject to
/// KCL.  Quadratic line losses, when configured, are iterated to a 1e-9 kW
/// slack balance.
FlowSolution solve_flows(const GridTopology& topo,
                         const std::map<std::string, double>& injections_kw);

}  // namespace tesim
