#pragma once

// Brute-force reference implementations used by the test suites. These are
// written independently of the modules they validate: grid scans, direct
// argmax and small linear systems, with one exception noted at
// brute_opt_general (its LP route reuses the lp solver).

#include <span>

#include "persuasion/core.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/lp.hpp"

namespace persuasion::oracle {

/// Direct re-implementation of the receiver's two-level tie-break.
inline int brute_best_response(const Posterior& nu, double alpha,
                               const Instance& inst,
                               std::span<const int> allowed = {}) {
  std::vector<int> all;
  if (allowed.empty()) {
    for (int a = 0; a < inst.n_actions(); ++a) all.push_back(a);
    allowed = all;
  }
  const int n = inst.n_states();
  Vec hat(n);
  for (int w = 0; w < n; ++w)
    hat[w] = (1.0 - alpha) * inst.prior[w] + alpha * nu[w];

  double top_r = -kInf;
  for (int a : allowed) {
    double v = 0.0;
    for (int w = 0; w < n; ++w) v += hat[w] * inst.u_receiver[a][w];
    if (v > top_r) top_r = v;
  }
  double top_s = -kInf;
  for (int a : allowed) {
    double v = 0.0, s = 0.0;
    for (int w = 0; w < n; ++w) {
      v += hat[w] * inst.u_receiver[a][w];
      s += nu[w] * inst.u_sender[a][w];
    }
    if (v >= top_r - kTolTie && s > top_s) top_s = s;
  }
  for (int a : allowed) {
    double v = 0.0, s = 0.0;
    for (int w = 0; w < n; ++w) {
      v += hat[w] * inst.u_receiver[a][w];
      s += nu[w] * inst.u_sender[a][w];
    }
    if (v >= top_r - kTolTie && s >= top_s - kTolTie) return a;
  }
  return -1;
}

/// Grid scan for the binary full-information optimum with the canonical
/// sender utility: the best two-point scheme {0, nu} over nu in [q_hat, 1].
inline double brute_opt_binary(const BinaryInstance& b, double alpha_star,
                               double grid_step = 1e-4) {
  double best = 0.0;
  const long long steps =
      static_cast<long long>(std::ceil((1.0 - b.q_hat) / grid_step));
  for (long long i = 0; i <= steps; ++i) {
    const double nu = std::min(1.0, b.q_hat + grid_step * i);
    const double hat = (1.0 - alpha_star) * b.mu0 + alpha_star * nu;
    if (hat >= b.q_hat - kTolTie) best = std::max(best, b.mu0 / nu);
  }
  return best;
}

/// All vertices of a safe region by enumerating (n-1)-subsets of its
/// constraints as equalities together with the simplex sum row. n <= 5.
inline std::vector<Posterior> brute_vertex_enum(const geometry::SafeRegion& region) {
  const int n = region.n;
  const int m = static_cast<int>(region.constraints.size());
  const int total = m + n;  // IC rows then coordinate faces
  std::vector<Posterior> out;

  std::vector<int> pick(n - 1);
  auto row_of = [&](int id, Vec& row, double& rhs) {
    if (id < m) {
      row = region.constraints[id].normal;
      rhs = region.rhs_values[id];
    } else {
      row.assign(n, 0.0);
      row[id - m] = 1.0;
      rhs = 0.0;
    }
  };
  // Enumerate combinations of n-1 rows.
  std::vector<int> idx(n - 1);
  for (int i = 0; i < n - 1; ++i) idx[i] = i;
  auto advance = [&]() {
    int i = n - 2;
    while (i >= 0 && idx[i] == total - (n - 1) + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < n - 1; ++j) idx[j] = idx[j - 1] + 1;
    return true;
  };
  if (total < n - 1) return out;
  do {
    Mat a(n, Vec(n));
    Vec b(n);
    a[0].assign(n, 1.0);
    b[0] = 1.0;
    for (int i = 0; i < n - 1; ++i) row_of(idx[i], a[i + 1], b[i + 1]);
    Vec v;
    try {
      v = geometry::detail::solve_linear(a, b);
    } catch (const NumericalFailure&) {
      continue;
    }
    bool ok = true;
    for (int w = 0; w < n && ok; ++w) ok = v[w] >= -1e-7;
    for (int i = 0; i < m && ok; ++i)
      ok = dot(region.constraints[i].normal, v) >= region.rhs_values[i] - 1e-7;
    if (!ok) continue;
    bool dup = false;
    for (const auto& u : out) {
      double dist = 0.0;
      for (int w = 0; w < n; ++w) dist = std::max(dist, std::abs(u[w] - v[w]));
      if (dist <= kVertexDedup) { dup = true; break; }
    }
    if (!dup) {
      for (double& x : v) x = std::max(0.0, x);
      out.emplace_back(v);
    }
  } while (advance());
  return out;
}

namespace detail {

// Relevant actions at a single bias level via the strict-slack LP (same
// mathematical test as the library's filter, built here from scratch).
inline std::vector<int> relevant_at(const Instance& inst, double alpha) {
  std::vector<int> out;
  const int n = inst.n_states();
  for (int a = 0; a < inst.n_actions(); ++a) {
    lp::LinearProgram p(n + 1);
    p.lower[n] = -kInf;
    Vec sum(n + 1, 1.0);
    sum[n] = 0.0;
    p.add_eq(std::move(sum), 1.0);
    for (int a2 = 0; a2 < inst.n_actions(); ++a2) {
      if (a2 == a) continue;
      Vec row(n + 1);
      double c = 0.0;
      for (int w = 0; w < n; ++w) {
        row[w] = inst.u_receiver[a][w] - inst.u_receiver[a2][w];
        c += row[w] * inst.prior[w];
      }
      row[n] = -1.0;
      p.add_ge(std::move(row), (alpha - 1.0) / alpha * c);
    }
    p.objective[n] = 1.0;
    const auto sol = lp::solve(p);
    if (sol.status == lp::Status::Optimal && sol.objective_value > kTolStrict)
      out.push_back(a);
  }
  return out;
}

inline double atom_value(const Instance& inst, double alpha,
                         std::span<const int> rel, const Posterior& nu) {
  const int a = brute_best_response(nu, alpha, inst, rel);
  return dot(nu.probs, inst.u_sender[a]);
}

}  // namespace detail

/// Concave-envelope value at the prior by searching supports of grid atoms:
/// pairs on binary instances, pairs and triples (coarse pass, then local
/// refinement) when |states| = 3. LP-free by construction.
inline double grid_concavify(const Instance& inst, double alpha_star,
                             double step = 0.01) {
  const int n = inst.n_states();
  const std::vector<int> rel = detail::relevant_at(inst, alpha_star);
  const Posterior prior(inst.prior);
  double best = detail::atom_value(inst, alpha_star, rel, prior);

  if (n == 2) {
    const int g = static_cast<int>(std::round(1.0 / step));
    Vec value(g + 1);
    for (int i = 0; i <= g; ++i) {
      Posterior nu(Vec{1.0 - i * step, i * step});
      value[i] = detail::atom_value(inst, alpha_star, rel, nu);
    }
    const double mu = inst.prior[1];
    for (int i = 0; i <= g; ++i) {
      const double pi = i * step;
      if (pi > mu + 1e-12) break;
      for (int j = g; j >= 0; --j) {
        const double pj = j * step;
        if (pj < mu - 1e-12) break;
        if (std::abs(pj - pi) < 1e-12) continue;
        const double w = (mu - pi) / (pj - pi);
        best = std::max(best, (1.0 - w) * value[i] + w * value[j]);
      }
    }
    return best;
  }
  if (n != 3) throw Error("grid concavification supports 2 or 3 states");

  auto grid_points = [&](double h) {
    std::vector<Posterior> pts;
    const int g = static_cast<int>(std::round(1.0 / h));
    for (int i = 0; i <= g; ++i)
      for (int j = 0; j <= g - i; ++j)
        pts.emplace_back(Vec{i * h, j * h, 1.0 - (i + j) * h});
    return pts;
  };
  auto weights_for = [&](const std::vector<const Posterior*>& sup, Vec& w) {
    const int k = static_cast<int>(sup.size());
    Mat a(k, Vec(k));
    Vec b(k);
    for (int r = 0; r < k - 1; ++r) {
      for (int c = 0; c < k; ++c) a[r][c] = (*sup[c])[r];
      b[r] = inst.prior[r];
    }
    a[k - 1].assign(k, 1.0);
    b[k - 1] = 1.0;
    try {
      w = geometry::detail::solve_linear(a, b);
    } catch (const NumericalFailure&) {
      return false;
    }
    for (double x : w)
      if (x < -1e-9) return false;
    // Pairs are overdetermined in the 2-simplex: require the coordinates not
    // used by the solve to be reproduced as well.
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int c = 0; c < k; ++c) s += w[c] * (*sup[c])[r];
      if (std::abs(s - inst.prior[r]) > 1e-9) return false;
    }
    return true;
  };
  auto search = [&](const std::vector<Posterior>& pts) {
    std::vector<double> value(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      value[i] = detail::atom_value(inst, alpha_star, rel, pts[i]);
    double local = -kInf;
    std::vector<std::size_t> support;
    const std::size_t np = pts.size();
    Vec w;
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j = i + 1; j < np; ++j) {
        if (weights_for({&pts[i], &pts[j]}, w)) {
          const double v = w[0] * value[i] + w[1] * value[j];
          if (v > local) { local = v; support = {i, j}; }
        }
        for (std::size_t l = j + 1; l < np; ++l)
          if (weights_for({&pts[i], &pts[j], &pts[l]}, w)) {
            const double v = w[0] * value[i] + w[1] * value[j] + w[2] * value[l];
            if (v > local) { local = v; support = {i, j, l}; }
          }
      }
    }
    return std::pair{local, support};
  };

  const double coarse = std::max(step, 0.05);
  const auto pts = grid_points(coarse);
  auto [coarse_best, support] = search(pts);
  best = std::max(best, coarse_best);

  // Refine each support atom on the fine grid inside a coarse-cell box.
  if (!support.empty() && step < coarse) {
    std::vector<Posterior> fine;
    const int g = static_cast<int>(std::round(1.0 / step));
    for (int i = 0; i <= g; ++i)
      for (int j = 0; j <= g - i; ++j) {
        Vec p{i * step, j * step, 1.0 - (i + j) * step};
        for (std::size_t s : support) {
          const auto& c = pts[s];
          if (std::abs(p[0] - c[0]) <= coarse + 1e-12 &&
              std::abs(p[1] - c[1]) <= coarse + 1e-12) {
            fine.emplace_back(p);
            break;
          }
        }
      }
    best = std::max(best, search(fine).first);
  }
  return best;
}

/// Full-information optimum via the pointwise direct-recommendation LP over
/// relevant actions. The one shared helper beyond core types is the lp
/// solver; cross_check reruns the value with the LP-free grid concavifier
/// and insists on agreement within 2 * grid * U_max.
inline double brute_opt_general(const Instance& inst, double alpha_star,
                                bool cross_check = false, double grid = 0.01) {
  const std::vector<int> rel = detail::relevant_at(inst, alpha_star);
  const int n = inst.n_states();
  const int k = static_cast<int>(rel.size());
  lp::LinearProgram p(k * n);
  for (int i = 0; i < k; ++i)
    for (int w = 0; w < n; ++w)
      p.objective[i * n + w] = inst.u_sender[rel[i]][w];
  for (int w = 0; w < n; ++w) {
    Vec row(k * n, 0.0);
    for (int i = 0; i < k; ++i) row[i * n + w] = 1.0;
    p.add_eq(std::move(row), inst.prior[w]);
  }
  for (int i = 0; i < k; ++i) {
    const int a = rel[i];
    for (int a2 = 0; a2 < inst.n_actions(); ++a2) {
      if (a2 == a) continue;
      Vec delta(n);
      double c = 0.0;
      for (int w = 0; w < n; ++w) {
        delta[w] = inst.u_receiver[a][w] - inst.u_receiver[a2][w];
        c += delta[w] * inst.prior[w];
      }
      const double b = (alpha_star - 1.0) / alpha_star * c;
      Vec row(k * n, 0.0);
      for (int w = 0; w < n; ++w) row[i * n + w] = delta[w] - b;
      p.add_ge(std::move(row), 0.0);
    }
  }
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::Optimal)
    throw NumericalFailure("pointwise optimum LP failed");
  if (cross_check) {
    const double g = grid_concavify(inst, alpha_star, grid);
    if (std::abs(g - sol.objective_value) > 2.0 * grid * inst.u_max)
      throw NumericalFailure("LP and grid concavification disagree");
  }
  return sol.objective_value;
}

}  // namespace persuasion::oracle
