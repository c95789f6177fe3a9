#include <doctest.h>

#include <random>

#include "tesim/dcgrid.hpp"

using namespace tesim;

namespace {

GridTopology path_abu() {
  GridTopology t;
  t.nodes = {{"A", NodeKind::Home}, {"B", NodeKind::Home}, {"U", NodeKind::Utility}};
  t.lines = {{"A", "B", 10.0, 0.0}, {"B", "U", 10.0, 0.0}};
  return t;
}

// Independent oracle: solve the reduced incidence system by Gaussian
// elimination.  Trees only — the system is square and nonsingular.
std::vector<double> tree_flows(const GridTopology& topo,
                               const std::map<std::string, double>& inj) {
  std::map<std::string, int> idx;
  int slack = -1;
  for (const auto& n : topo.nodes) {
    const int i = static_cast<int>(idx.size());
    idx[n.id] = i;
    if (n.kind == NodeKind::Utility) slack = i;
  }
  const int n = static_cast<int>(topo.nodes.size());
  const int m = static_cast<int>(topo.lines.size());
  REQUIRE(m == n - 1);
  // Rows: KCL at every non-slack node.  Columns: line flows.
  std::vector<std::vector<double>> a(n - 1, std::vector<double>(m, 0.0));
  std::vector<double> b(n - 1, 0.0);
  auto row_of = [&](int node) { return node < slack ? node : node - 1; };
  for (int l = 0; l < m; ++l) {
    const int u = idx.at(topo.lines[l].from), v = idx.at(topo.lines[l].to);
    if (u != slack) a[row_of(u)][l] = 1.0;   // flow leaves `from`
    if (v != slack) a[row_of(v)][l] = -1.0;  // flow enters `to`
  }
  for (const auto& node : topo.nodes)
    if (idx.at(node.id) != slack)
      b[row_of(idx.at(node.id))] = inj.count(node.id) ? inj.at(node.id) : 0.0;
  for (int c = 0; c < m; ++c) {
    int piv = -1;
    for (int r = c; r < n - 1; ++r)
      if (std::abs(a[r][c]) > (piv < 0 ? 1e-12 : std::abs(a[piv][c]))) piv = r;
    REQUIRE(piv >= 0);
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = 0; r < n - 1; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < m; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> flows(m);
  for (int c = 0; c < m; ++c) flows[c] = b[c] / a[c][c];
  return flows;
}

}  // namespace

TEST_CASE("minimal path topology validates") {
  CHECK(validate_topology(path_abu()).empty());
}

TEST_CASE("missing utility node is a defect") {
  GridTopology t = path_abu();
  t.nodes[2].kind = NodeKind::Home;
  const auto defects = validate_topology(t);
  REQUIRE_FALSE(defects.empty());
  bool mentions_slack = false;
  for (const auto& d : defects)
    if (d.find("slack") != std::string::npos) mentions_slack = true;
  CHECK(mentions_slack);
}

TEST_CASE("disconnected, duplicate, self-loop and capacity defects") {
  GridTopology t = path_abu();
  t.nodes.push_back({"C", NodeKind::Home});  // no incident line
  t.nodes.push_back({"A", NodeKind::Home});  // duplicate id
  t.lines.push_back({"B", "B", 5.0, 0.0});   // self-loop
  t.lines.push_back({"A", "U", 0.0, 0.0});   // nonpositive capacity
  const auto defects = validate_topology(t);
  CHECK(defects.size() >= 4);
}

TEST_CASE("local balance on a path") {
  const auto f = solve_flows(path_abu(), {{"A", 2.0}, {"B", -2.0}});
  CHECK(f.line_flows_kw[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.line_flows_kw[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(f.slack_injection_kw == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(f.losses_kw == 0.0);
}

TEST_CASE("single exporter pushes onto the slack") {
  GridTopology t;
  t.nodes = {{"H", NodeKind::Home}, {"U", NodeKind::Utility}};
  t.lines = {{"H", "U", 10.0, 0.0}};
  const auto f = solve_flows(t, {{"H", 5.0}});
  CHECK(f.slack_injection_kw == doctest::Approx(-5.0).epsilon(1e-9));
  CHECK(f.line_flows_kw[0] == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("star through a hub matches the incidence oracle") {
  GridTopology t;
  t.nodes = {{"A", NodeKind::Home},
             {"B", NodeKind::Home},
             {"C", NodeKind::Home},
             {"hub", NodeKind::Home},
             {"U", NodeKind::Utility}};
  t.lines = {{"A", "hub", 10.0, 0.0},
             {"B", "hub", 10.0, 0.0},
             {"C", "hub", 10.0, 0.0},
             {"hub", "U", 10.0, 0.0}};
  const std::map<std::string, double> inj{{"A", 3.0}, {"B", -1.0}, {"C", -1.0}};
  const auto f = solve_flows(t, inj);
  const auto oracle = tree_flows(t, inj);
  for (size_t l = 0; l < t.lines.size(); ++l)
    CHECK(f.line_flows_kw[l] == doctest::Approx(oracle[l]).epsilon(1e-9));
  CHECK(f.slack_injection_kw == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("capacity overload names the line") {
  GridTopology t = path_abu();
  t.lines[0].capacity_kw = 1.0;
  CHECK_THROWS_AS(solve_flows(t, {{"A", 2.0}, {"B", -2.0}}), CapacityExceeded);
}

TEST_CASE("lossless linearity: doubling injections doubles flows") {
  const auto f1 = solve_flows(path_abu(), {{"A", 1.5}, {"B", 0.5}});
  const auto f2 = solve_flows(path_abu(), {{"A", 3.0}, {"B", 1.0}});
  for (size_t l = 0; l < 2; ++l)
    CHECK(f2.line_flows_kw[l] == doctest::Approx(2.0 * f1.line_flows_kw[l]).epsilon(1e-9));
}

TEST_CASE("meshes satisfy KCL and conservation") {
  GridTopology t;
  t.nodes = {{"A", NodeKind::Home}, {"B", NodeKind::Home}, {"U", NodeKind::Utility}};
  t.lines = {{"A", "B", 10.0, 0.0}, {"B", "U", 10.0, 0.0}, {"A", "U", 10.0, 0.0}};
  const auto f = solve_flows(t, {{"A", 4.0}, {"B", -1.0}});
  // KCL at A: injection = flow(A->B) + flow(A->U).
  CHECK(f.line_flows_kw[0] + f.line_flows_kw[2] == doctest::Approx(4.0).epsilon(1e-9));
  // KCL at B.
  CHECK(f.line_flows_kw[0] - f.line_flows_kw[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.slack_injection_kw == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("quadratic losses keep the books balanced") {
  GridTopology t;
  t.nodes = {{"H", NodeKind::Home}, {"U", NodeKind::Utility}};
  t.lines = {{"H", "U", 100.0, 0.01}};
  const auto f = solve_flows(t, {{"H", 5.0}});
  CHECK(f.losses_kw > 0.0);
  CHECK(5.0 + f.slack_injection_kw - f.losses_kw == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("slack capacity cap is enforced") {
  GridTopology t;
  t.nodes = {{"H", NodeKind::Home}, {"U", NodeKind::Utility}};
  t.lines = {{"H", "U", 10.0, 0.0}};
  t.slack_capacity_kw = 2.0;
  CHECK_THROWS_AS(solve_flows(t, {{"H", 5.0}}), CapacityExceeded);
  CHECK_NOTHROW(solve_flows(t, {{"H", 1.5}}));
}

TEST_CASE("random radial networks match the incidence oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 7);  // <= 8 nodes
    GridTopology t;
    t.nodes.push_back({"U", NodeKind::Utility});
    for (int i = 1; i < n; ++i)
      t.nodes.push_back({"n" + std::to_string(i), NodeKind::Home});
    for (int i = 1; i < n; ++i) {
      const int parent = static_cast<int>(rng() % i);
      t.lines.push_back({t.nodes[parent].id, t.nodes[i].id, 1000.0, 0.0});
    }
    std::map<std::string, double> inj;
    for (int i = 1; i < n; ++i) inj[t.nodes[i].id] = u(rng);
    const auto f = solve_flows(t, inj);
    const auto oracle = tree_flows(t, inj);
    for (size_t l = 0; l < t.lines.size(); ++l)
      CHECK(std::abs(f.line_flows_kw[l] - oracle[l]) < 1e-9);
    double total = f.slack_injection_kw - f.losses_kw;
    for (const auto& [id, v] : inj) total += v;
    CHECK(std::abs(total) < 1e-9);
  }
}
