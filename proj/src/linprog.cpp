#include "tesim/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tesim::lp {

namespace {
constexpr double kEps = 1e-9;
constexpr int kBlandAfter = 2000;
constexpr int kMaxIter = 50000;

// Solve B^T y = cb by Gaussian elimination with partial pivoting.
std::vector<double> solve_transposed(std::vector<std::vector<double>> b,
                                     std::vector<double> cb) {
  const int m = static_cast<int>(cb.size());
  // Work on B^T.
  std::vector<std::vector<double>> a(m, std::vector<double>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a[i][j] = b[j][i];
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) continue;  // singular direction, dual 0
    std::swap(a[col], a[piv]);
    std::swap(cb[col], cb[piv]);
    for (int r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < m; ++c) a[r][c] -= f * a[col][c];
      cb[r] -= f * cb[col];
    }
  }
  std::vector<double> y(m, 0.0);
  for (int r = m - 1; r >= 0; --r) {
    double s = cb[r];
    for (int c = r + 1; c < m; ++c) s -= a[r][c] * y[c];
    y[r] = std::abs(a[r][r]) < 1e-12 ? 0.0 : s / a[r][r];
  }
  return y;
}

struct Tableau {
  int m = 0, n_total = 0;
  std::vector<std::vector<double>> t;  // m rows of n_total coeffs
  std::vector<double> rhs;
  std::vector<int> basis;
  std::vector<double> red;  // reduced costs, n_total
  double obj = 0.0;

  void compute_reduced(const std::vector<double>& c) {
    red.assign(n_total, 0.0);
    obj = 0.0;
    for (int j = 0; j < n_total; ++j) red[j] = c[j];
    for (int i = 0; i < m; ++i) {
      const double cb = c[basis[i]];
      if (cb == 0.0) continue;
      obj += cb * rhs[i];
      for (int j = 0; j < n_total; ++j) red[j] -= cb * t[i][j];
    }
  }

  void pivot(int row, int col) {
    const double p = t[row][col];
    for (int j = 0; j < n_total; ++j) t[row][j] /= p;
    rhs[row] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = t[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j < n_total; ++j) t[i][j] -= f * t[row][j];
      rhs[i] -= f * rhs[row];
    }
    const double f = red[col];
    if (f != 0.0) {
      for (int j = 0; j < n_total; ++j) red[j] -= f * t[row][j];
      obj += f * rhs[row];
    }
    basis[row] = col;
  }

  // Returns Optimal or Unbounded.  `blocked[j]` columns may not enter.
  Status run(const std::vector<char>& blocked, int& iter) {
    while (true) {
      if (++iter > kMaxIter) throw std::runtime_error("simplex: iteration limit");
      int enter = -1;
      if (iter < kBlandAfter) {
        double best = -kEps;
        for (int j = 0; j < n_total; ++j)
          if (!blocked[j] && red[j] < best) { best = red[j]; enter = j; }
      } else {
        for (int j = 0; j < n_total; ++j)
          if (!blocked[j] && red[j] < -kEps) { enter = j; break; }
      }
      if (enter < 0) return Status::Optimal;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] <= kEps) continue;
        const double ratio = rhs[i] / t[i][enter];
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
    }
  }
};
}  // namespace

Constraint& Problem::add_row(Relation rel, double rhs, std::string label) {
  rows.push_back(Constraint{std::vector<double>(n_vars, 0.0), rel, rhs, std::move(label)});
  return rows.back();
}

Solution solve(const Problem& p) {
  // Assemble the row set: stated rows, then finite upper bounds.
  struct Row {
    const std::vector<double>* coeffs;
    int bound_var;  // -1 for a stated row
    Relation rel;
    double rhs;
    double sign;  // -1 when the row was negated for rhs >= 0
  };
  std::vector<Row> rows;
  rows.reserve(p.rows.size() + p.n_vars);
  for (const auto& r : p.rows) {
    if (static_cast<int>(r.coeffs.size()) != p.n_vars)
      throw std::invalid_argument("lp: row width mismatch");
    rows.push_back(Row{&r.coeffs, -1, r.rel, r.rhs, 1.0});
  }
  for (int j = 0; j < p.n_vars; ++j)
    if (std::isfinite(p.upper[j]))
      rows.push_back(Row{nullptr, j, Relation::Le, p.upper[j], 1.0});

  const int m = static_cast<int>(rows.size());
  auto coeff = [&](const Row& r, int j) -> double {
    return r.bound_var >= 0 ? (j == r.bound_var ? 1.0 : 0.0) : (*r.coeffs)[j];
  };

  // Normalize rhs >= 0 and count extra columns.
  int n_slack = 0, n_art = 0;
  std::vector<Relation> rel(m);
  for (int i = 0; i < m; ++i) {
    rel[i] = rows[i].rel;
    if (rows[i].rhs < 0.0) {
      rows[i].sign = -1.0;
      rows[i].rhs = -rows[i].rhs;
      if (rel[i] == Relation::Le) rel[i] = Relation::Ge;
      else if (rel[i] == Relation::Ge) rel[i] = Relation::Le;
    }
    if (rel[i] != Relation::Eq) ++n_slack;
    if (rel[i] != Relation::Le) ++n_art;
  }

  Tableau tb;
  tb.m = m;
  tb.n_total = p.n_vars + n_slack + n_art;
  tb.t.assign(m, std::vector<double>(tb.n_total, 0.0));
  tb.rhs.resize(m);
  tb.basis.assign(m, -1);

  std::vector<int> art_of_row(m, -1);
  int slack_at = p.n_vars, art_at = p.n_vars + n_slack;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < p.n_vars; ++j) tb.t[i][j] = rows[i].sign * coeff(rows[i], j);
    tb.rhs[i] = rows[i].rhs;
    if (rel[i] == Relation::Le) {
      tb.t[i][slack_at] = 1.0;
      tb.basis[i] = slack_at++;
    } else if (rel[i] == Relation::Ge) {
      tb.t[i][slack_at++] = -1.0;
    }
    if (rel[i] != Relation::Le) {
      tb.t[i][art_at] = 1.0;
      tb.basis[i] = art_at;
      art_of_row[i] = art_at++;
    }
  }

  Solution sol;
  std::vector<char> blocked(tb.n_total, 0);
  int iter = 0;

  // Phase 1.
  if (n_art > 0) {
    std::vector<double> c1(tb.n_total, 0.0);
    for (int j = p.n_vars + n_slack; j < tb.n_total; ++j) c1[j] = 1.0;
    tb.compute_reduced(c1);
    if (tb.run(blocked, iter) != Status::Optimal)
      throw std::runtime_error("simplex: phase 1 unbounded");
    if (tb.obj > 1e-7) {
      sol.status = Status::Infeasible;
      for (int i = 0; i < m; ++i)
        if (tb.basis[i] >= p.n_vars + n_slack && tb.rhs[i] > 1e-7) {
          // Map the standard-form row back to a stated label.
          int orig = -1;
          for (int r = 0; r < m; ++r)
            if (art_of_row[r] == tb.basis[i]) { orig = r; break; }
          if (orig >= 0 && rows[orig].bound_var < 0)
            sol.infeasible_label = p.rows[orig].label;
          break;
        }
      return sol;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tb.basis[i] < p.n_vars + n_slack) continue;
      for (int j = 0; j < p.n_vars + n_slack; ++j)
        if (std::abs(tb.t[i][j]) > kEps) { tb.pivot(i, j); break; }
    }
    for (int j = p.n_vars + n_slack; j < tb.n_total; ++j) blocked[j] = 1;
  }

  // Phase 2.
  std::vector<double> c2(tb.n_total, 0.0);
  for (int j = 0; j < p.n_vars; ++j) c2[j] = p.cost[j];
  tb.compute_reduced(c2);
  const Status st = tb.run(blocked, iter);
  if (st == Status::Unbounded) {
    sol.status = Status::Unbounded;
    return sol;
  }

  sol.status = Status::Optimal;
  sol.x.assign(p.n_vars, 0.0);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < p.n_vars) sol.x[tb.basis[i]] = tb.rhs[i];
  sol.objective = 0.0;
  for (int j = 0; j < p.n_vars; ++j) sol.objective += p.cost[j] * sol.x[j];

  // Duals of the stated rows from B^T y = c_B on the original column data.
  std::vector<std::vector<double>> bmat(m, std::vector<double>(m));
  std::vector<double> cb(m);
  for (int i = 0; i < m; ++i) {
    const int col = tb.basis[i];
    cb[i] = col < p.n_vars ? p.cost[col] : 0.0;
    for (int r = 0; r < m; ++r) {
      double v = 0.0;
      if (col < p.n_vars) v = rows[r].sign * coeff(rows[r], col);
      else if (col < p.n_vars + n_slack) {
        // Reconstruct which row owns this slack.
        v = 0.0;
      }
      bmat[r][i] = v;
    }
  }
  // Fill slack/artificial columns of B (unit-ish vectors on their own row).
  {
    int s = p.n_vars, a = p.n_vars + n_slack;
    std::vector<int> slack_row(tb.n_total, -1), art_row(tb.n_total, -1);
    for (int i = 0; i < m; ++i) {
      if (rel[i] == Relation::Le) slack_row[s++] = i;
      else if (rel[i] == Relation::Ge) slack_row[s++] = i;
      if (rel[i] != Relation::Le) art_row[a++] = i;
    }
    for (int i = 0; i < m; ++i) {
      const int col = tb.basis[i];
      if (col < p.n_vars) continue;
      for (int r = 0; r < m; ++r) bmat[r][i] = 0.0;
      if (col < p.n_vars + n_slack) {
        const int r = slack_row[col];
        bmat[r][i] = rel[r] == Relation::Le ? 1.0 : -1.0;
      } else {
        bmat[art_row[col]][i] = 1.0;
      }
    }
  }
  std::vector<double> y = solve_transposed(bmat, cb);
  sol.duals.assign(p.rows.size(), 0.0);
  for (size_t i = 0; i < p.rows.size(); ++i) sol.duals[i] = rows[i].sign * y[i];
  return sol;
}

}  // namespace tesim::lp
