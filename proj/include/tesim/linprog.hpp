#pragma once

#include <limits>
#include <string>
#include <vector>

namespace tesim::lp {

enum class Status { Optimal, Infeasible, Unbounded };

enum class Relation { Eq, Le, Ge };

struct Constraint {
  std::vector<double> coeffs;  // length = Problem::n_vars
  Relation rel = Relation::Le;
  double rhs = 0.0;
  std::string label;
};

/// minimize cost . x   subject to the rows, 0 <= x <= upper.
struct Problem {
  int n_vars = 0;
  std::vector<double> cost;
  std::vector<Constraint> rows;
  std::vector<double> upper;  // +inf when unbounded above

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  explicit Problem(int n)
      : n_vars(n), cost(n, 0.0), upper(n, kInf) {}
  Problem() = default;

  Constraint& add_row(Relation rel, double rhs, std::string label = {});
};

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// One dual per original row: d objective / d rhs, sign w.r.t. the row as
  /// stated (Le/Ge/Eq), valid at a nondegenerate optimum.
  std::vector<double> duals;
  std::string infeasible_label;  // a row left unsatisfied by phase 1
};

/// Dense two-phase simplex.  Deterministic: Dantzig pricing with fixed
/// tie-breaking, Bland's rule after an iteration threshold.
Solution solve(const Problem& p);

}  // namespace tesim::lp
