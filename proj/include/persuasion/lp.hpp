#pragma once

// Self-contained dense linear-program solver. Two-phase primal simplex on a
// tableau, switching to Bland's rule after 2*(rows+cols) pivots to break
// cycles on degenerate polytopes. Returns basic feasible (vertex) solutions.

#include <cassert>
#include <cstddef>
#include <vector>

#include "persuasion/core.hpp"

namespace persuasion::lp {

enum class Status { Optimal, Infeasible, Unbounded };
enum class Sense { Maximize, Minimize };

struct LinearProgram {
  int num_vars = 0;
  Sense sense = Sense::Maximize;
  Vec objective;       // size num_vars
  Mat eq_a;            // A_eq x = b_eq
  Vec eq_b;
  Mat ge_a;            // A x >= b
  Vec ge_b;
  Vec lower, upper;    // per-variable bounds, +-inf allowed

  explicit LinearProgram(int n = 0) { resize(n); }

  void resize(int n) {
    num_vars = n;
    objective.assign(n, 0.0);
    lower.assign(n, 0.0);
    upper.assign(n, kInf);
  }

  void add_eq(Vec row, double rhs) {
    assert(static_cast<int>(row.size()) == num_vars);
    eq_a.push_back(std::move(row));
    eq_b.push_back(rhs);
  }
  void add_ge(Vec row, double rhs) {
    assert(static_cast<int>(row.size()) == num_vars);
    ge_a.push_back(std::move(row));
    ge_b.push_back(rhs);
  }
  void add_le(Vec row, double rhs) {
    for (double& c : row) c = -c;
    add_ge(std::move(row), -rhs);
  }
};

struct LpSolution {
  Status status = Status::Infeasible;
  Vec point;
  double objective_value = 0.0;
  // Indices of constraints active at the returned point: equality rows
  // [0, m_eq), then inequality rows [m_eq, m_eq + m_ge), then tight lower
  // bounds (m_eq + m_ge + j) and tight upper bounds (m_eq + m_ge + n + j).
  std::vector<int> basis;
};

namespace detail {

// Standard-form tableau: rows of "a.y (+ slack/surplus) (+ artificial) = b"
// with y >= 0 and b >= 0.
struct Tableau {
  int m = 0, ncols = 0;
  std::vector<Vec> a;       // m x ncols
  Vec b;                    // m
  std::vector<int> basis;   // column index basic in each row
  Vec cost;                 // current objective row (reduced costs built on demand)

  double pivot_tol = 1e-11;
  double cost_tol = 1e-10;

  void pivot(int row, int col) {
    const double inv = 1.0 / a[row][col];
    for (int j = 0; j < ncols; ++j) a[row][j] *= inv;
    b[row] *= inv;
    a[row][col] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = a[i][col];
      if (std::abs(f) < 1e-14) continue;
      for (int j = 0; j < ncols; ++j) a[i][j] -= f * a[row][j];
      a[i][col] = 0.0;
      b[i] -= f * b[row];
      if (std::abs(b[i]) < 1e-13) b[i] = 0.0;
    }
    basis[row] = col;
  }

  // Minimizes cost.y over the tableau. allowed(j) masks columns that may
  // enter. Returns false on unboundedness.
  bool run(Vec cost_row, const std::vector<char>& allowed, long long max_pivots,
           long long bland_after) {
    // Price out the basic columns of the objective row.
    for (int i = 0; i < m; ++i) {
      const double c = cost_row[basis[i]];
      if (std::abs(c) < 1e-14) continue;
      for (int j = 0; j < ncols; ++j) cost_row[j] -= c * a[i][j];
      cost_row[basis[i]] = 0.0;
    }
    for (long long iter = 0; iter < max_pivots; ++iter) {
      const bool bland = iter >= bland_after;
      int enter = -1;
      if (bland) {
        for (int j = 0; j < ncols; ++j)
          if (allowed[j] && cost_row[j] < -cost_tol) { enter = j; break; }
      } else {
        double best = -cost_tol;
        for (int j = 0; j < ncols; ++j)
          if (allowed[j] && cost_row[j] < best) { best = cost_row[j]; enter = j; }
      }
      if (enter < 0) return true;  // optimal

      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        if (a[i][enter] <= pivot_tol) continue;
        const double ratio = b[i] / a[i][enter];
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;  // unbounded in the entering direction

      const double c = cost_row[enter];
      pivot(leave, enter);
      for (int j = 0; j < ncols; ++j) cost_row[j] -= c * a[leave][j];
      cost_row[enter] = 0.0;
    }
    throw NumericalFailure("simplex pivot limit exceeded");
  }
};

}  // namespace detail

/// Solves a dense LP. Optimal solutions are basic feasible points with
/// constraint residuals within kTolLp on the problem scales handled here.
inline LpSolution solve(const LinearProgram& prob) {
  const int n = prob.num_vars;
  const int m_eq = static_cast<int>(prob.eq_a.size());
  const int m_ge = static_cast<int>(prob.ge_a.size());

  // Variable transform to y >= 0: shifted (x = lo + y), mirrored
  // (x = hi - y) or split (x = y+ - y-). Finite upper bounds of shifted
  // variables become extra <= rows.
  enum class Kind { Shift, Mirror, Split };
  struct VarMap {
    Kind kind;
    double offset;  // lo for Shift, hi for Mirror
    int col;        // first y column; Split uses col and col+1
  };
  std::vector<VarMap> vmap(n);
  int ny = 0;
  for (int j = 0; j < n; ++j) {
    const double lo = prob.lower[j], hi = prob.upper[j];
    if (lo > hi) return {Status::Infeasible, {}, 0.0, {}};
    if (std::isfinite(lo)) {
      vmap[j] = {Kind::Shift, lo, ny++};
    } else if (std::isfinite(hi)) {
      vmap[j] = {Kind::Mirror, hi, ny++};
    } else {
      vmap[j] = {Kind::Split, 0.0, ny};
      ny += 2;
    }
  }

  // Assemble rows in y-space: equalities first, then >= rows, then bound rows.
  struct Row {
    Vec a;
    double b;
    bool is_eq;
  };
  std::vector<Row> rows;
  rows.reserve(m_eq + m_ge + n);
  auto to_y = [&](const Vec& x_row, double rhs, bool is_eq) {
    Row r{Vec(ny, 0.0), rhs, is_eq};
    for (int j = 0; j < n; ++j) {
      const double c = x_row[j];
      if (c == 0.0) continue;
      switch (vmap[j].kind) {
        case Kind::Shift:
          r.a[vmap[j].col] += c;
          r.b -= c * vmap[j].offset;
          break;
        case Kind::Mirror:
          r.a[vmap[j].col] -= c;
          r.b -= c * vmap[j].offset;
          break;
        case Kind::Split:
          r.a[vmap[j].col] += c;
          r.a[vmap[j].col + 1] -= c;
          break;
      }
    }
    return r;
  };
  for (int i = 0; i < m_eq; ++i) rows.push_back(to_y(prob.eq_a[i], prob.eq_b[i], true));
  for (int i = 0; i < m_ge; ++i) rows.push_back(to_y(prob.ge_a[i], prob.ge_b[i], false));
  for (int j = 0; j < n; ++j) {
    if (vmap[j].kind == Kind::Shift && std::isfinite(prob.upper[j])) {
      Row r{Vec(ny, 0.0), -(prob.upper[j] - prob.lower[j]), false};  // -y >= -(hi-lo)
      r.a[vmap[j].col] = -1.0;
      rows.push_back(r);
    } else if (vmap[j].kind == Kind::Mirror && std::isfinite(prob.lower[j])) {
      Row r{Vec(ny, 0.0), -(prob.upper[j] - prob.lower[j]), false};
      r.a[vmap[j].col] = -1.0;
      rows.push_back(r);
    }
  }

  const int m = static_cast<int>(rows.size());
  // Columns: y vars, one slack/surplus per inequality row, artificials.
  int n_slack = 0;
  for (const auto& r : rows)
    if (!r.is_eq) ++n_slack;

  detail::Tableau t;
  t.m = m;
  t.ncols = ny + n_slack + m;  // artificial block sized m (not all used)
  t.a.assign(m, Vec(t.ncols, 0.0));
  t.b.assign(m, 0.0);
  t.basis.assign(m, -1);

  int slack_at = ny;
  int art_at = ny + n_slack;
  int n_art = 0;
  std::vector<char> is_artificial(t.ncols, 0);
  for (int i = 0; i < m; ++i) {
    Row& r = rows[i];
    double sign = 1.0;
    if (r.b < 0.0) {  // normalize rhs >= 0
      sign = -1.0;
      r.b = -r.b;
      for (double& c : r.a) c = -c;
    }
    for (int j = 0; j < ny; ++j) t.a[i][j] = r.a[j];
    t.b[i] = r.b;
    if (!r.is_eq) {
      // original row: a.y >= b -> a.y - s = b (surplus).
      // after sign flip it reads -a.y <= -b -> coefficient of s is +sign? Work
      // it out directly: a.y - s = b, multiplied by sign gives
      // (sign*a).y - sign*s = sign*b, and the tableau stores sign*a, sign*b.
      t.a[i][slack_at] = -sign;
      if (sign < 0.0) {
        // slack enters with +1 coefficient: usable as the basic column.
        t.basis[i] = slack_at;
      }
      ++slack_at;
    }
    if (t.basis[i] < 0) {
      const int ac = art_at + n_art;
      t.a[i][ac] = 1.0;
      is_artificial[ac] = 1;
      t.basis[i] = ac;
      ++n_art;
    }
  }
  const int ncols_used = ny + n_slack + n_art;
  t.ncols = ncols_used;
  for (auto& row : t.a) row.resize(ncols_used);
  is_artificial.resize(ncols_used);

  const long long bland_after = 2LL * (m + ncols_used);
  const long long max_pivots = 20000LL + 200LL * (m + ncols_used);

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    Vec c1(ncols_used, 0.0);
    for (int j = 0; j < ncols_used; ++j)
      if (is_artificial[j]) c1[j] = 1.0;
    std::vector<char> allowed(ncols_used, 1);
    if (!t.run(c1, allowed, max_pivots, bland_after))
      throw NumericalFailure("phase-1 simplex unbounded");
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (is_artificial[t.basis[i]]) infeas += t.b[i];
    if (infeas > 1e-9) return {Status::Infeasible, {}, 0.0, {}};
    // Drive artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (!is_artificial[t.basis[i]]) continue;
      int col = -1;
      for (int j = 0; j < ncols_used && col < 0; ++j)
        if (!is_artificial[j] && std::abs(t.a[i][j]) > 1e-9) col = j;
      if (col >= 0) t.pivot(i, col);
      // else: redundant row; the artificial stays basic at level ~0.
    }
  }

  // Phase 2: optimize the real objective (internally minimized).
  Vec c2(ncols_used, 0.0);
  const double obj_sign = prob.sense == Sense::Maximize ? -1.0 : 1.0;
  for (int j = 0; j < n; ++j) {
    const double c = obj_sign * prob.objective[j];
    if (c == 0.0) continue;
    switch (vmap[j].kind) {
      case Kind::Shift:
        c2[vmap[j].col] += c;
        break;
      case Kind::Mirror:
        c2[vmap[j].col] -= c;
        break;
      case Kind::Split:
        c2[vmap[j].col] += c;
        c2[vmap[j].col + 1] -= c;
        break;
    }
  }
  std::vector<char> allowed(ncols_used, 1);
  for (int j = 0; j < ncols_used; ++j)
    if (is_artificial[j]) allowed[j] = 0;
  if (!t.run(c2, allowed, max_pivots, bland_after))
    return {Status::Unbounded, {}, 0.0, {}};

  // Recover y, then x.
  Vec y(ny, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < ny) y[t.basis[i]] = t.b[i];
  LpSolution sol;
  sol.status = Status::Optimal;
  sol.point.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    switch (vmap[j].kind) {
      case Kind::Shift: sol.point[j] = vmap[j].offset + y[vmap[j].col]; break;
      case Kind::Mirror: sol.point[j] = vmap[j].offset - y[vmap[j].col]; break;
      case Kind::Split: sol.point[j] = y[vmap[j].col] - y[vmap[j].col + 1]; break;
    }
  }
  sol.objective_value = dot(prob.objective, sol.point);

  // Active-constraint report.
  for (int i = 0; i < m_eq; ++i) sol.basis.push_back(i);
  for (int i = 0; i < m_ge; ++i) {
    const double resid = dot(prob.ge_a[i], sol.point) - prob.ge_b[i];
    if (std::abs(resid) <= kTolActive) sol.basis.push_back(m_eq + i);
  }
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(prob.lower[j]) &&
        std::abs(sol.point[j] - prob.lower[j]) <= kTolActive)
      sol.basis.push_back(m_eq + m_ge + j);
    if (std::isfinite(prob.upper[j]) &&
        std::abs(sol.point[j] - prob.upper[j]) <= kTolActive)
      sol.basis.push_back(m_eq + m_ge + n + j);
  }
  return sol;
}

/// Feasibility check: solves the program with a zero objective.
inline LpSolution feasibility(LinearProgram prob) {
  prob.objective.assign(prob.num_vars, 0.0);
  return solve(prob);
}

}  // namespace persuasion::lp
