#pragma once

// Moving action-region polytopes: interval-safe regions, relevant-action
// filtering, vertex decomposition via the initialization / membership /
// separation / pricing LP chain, Euclidean projection for probe posteriors,
// and Bayes-plausibility repair.

#include <optional>
#include <utility>

#include "persuasion/core.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/receiver.hpp"

namespace persuasion::geometry {

/// Weak incentive-compatibility constraint "winner weakly beats loser":
/// normal . nu >= rhs, where normal = u_R(winner,.) - u_R(loser,.).
struct IcConstraint {
  int winner;
  int loser;
  Vec normal;
  double c_coeff;  // normal . mu0; the boundary moves with alpha iff nonzero

  bool movable() const { return std::abs(c_coeff) > kTolTie; }
};

enum class Endpoint { Lower, Upper };

/// Right-hand side of the IC constraint at a single bias level.
inline double rhs(int a, int a_prime, double alpha, const Instance& inst) {
  double c = 0.0;
  for (int w = 0; w < inst.n_states(); ++w)
    c += (inst.u_receiver[a][w] - inst.u_receiver[a_prime][w]) * inst.prior[w];
  return (alpha - 1.0) / alpha * c;
}

/// Interval RHS: the endpoint with the larger (tighter) value binds. The
/// binding endpoint is hi when normal . mu0 > 0 and lo when it is negative.
inline double interval_rhs(int a, int a_prime, const BiasInterval& J,
                           const Instance& inst) {
  return std::max(rhs(a, a_prime, J.lo, inst), rhs(a, a_prime, J.hi, inst));
}

/// Polytope of posteriors that weakly induce `action` for every alpha in the
/// interval: all IC rows at their interval RHS, intersected with the simplex.
struct SafeRegion {
  int action;
  BiasInterval interval;
  std::vector<IcConstraint> constraints;
  Vec rhs_values;  // aligned with constraints
  int n;

  /// Endpoint of the interval that determines constraint `id`.
  Endpoint binding_endpoint(int id) const {
    return constraints[id].c_coeff > 0.0 ? Endpoint::Upper : Endpoint::Lower;
  }
};

inline SafeRegion make_region(int action, const BiasInterval& J,
                              const Instance& inst) {
  SafeRegion r{action, J, {}, {}, inst.n_states()};
  for (int a2 = 0; a2 < inst.n_actions(); ++a2) {
    if (a2 == action) continue;
    IcConstraint c;
    c.winner = action;
    c.loser = a2;
    c.normal.resize(inst.n_states());
    for (int w = 0; w < inst.n_states(); ++w)
      c.normal[w] = inst.u_receiver[action][w] - inst.u_receiver[a2][w];
    c.c_coeff = dot(c.normal, inst.prior);
    r.rhs_values.push_back(interval_rhs(action, a2, J, inst));
    r.constraints.push_back(std::move(c));
  }
  return r;
}

inline bool contains(const SafeRegion& r, const Posterior& nu,
                     double tol = kTolLp) {
  for (std::size_t i = 0; i < r.constraints.size(); ++i)
    if (dot(r.constraints[i].normal, nu.probs) < r.rhs_values[i] - tol)
      return false;
  return true;
}

namespace detail {

// Gaussian elimination with partial pivoting for the small systems here.
inline Vec solve_linear(Mat a, Vec b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
    if (std::abs(a[piv][col]) < 1e-12)
      throw NumericalFailure("singular linear system");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (int i = col + 1; i < n; ++i) {
      const double f = a[i][col] / a[col][col];
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a[i][j] -= f * a[col][j];
      b[i] -= f * b[col];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Orthonormal basis (Helmert) of the sum-zero subspace, as n-1 columns.
inline Mat sum_zero_basis(int n) {
  Mat q(n - 1, Vec(n, 0.0));  // stored row-wise: q[k] is the k-th column
  for (int k = 1; k < n; ++k) {
    const double s = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) q[k - 1][i] = s;
    q[k - 1][k] = -s * k;
  }
  return q;
}

// LP over the region: variables are the n posterior coordinates.
inline lp::LinearProgram region_lp(const SafeRegion& r) {
  lp::LinearProgram p(r.n);
  p.add_eq(Vec(r.n, 1.0), 1.0);
  for (std::size_t i = 0; i < r.constraints.size(); ++i)
    p.add_ge(r.constraints[i].normal, r.rhs_values[i]);
  return p;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// True iff the region's strict interior (all IC rows with positive slack)
/// meets the simplex: maximizes the common slack s and checks s > kTolStrict.
inline bool strict_interior_feasible(int action, const BiasInterval& J,
                                     const Instance& inst) {
  const SafeRegion r = make_region(action, J, inst);
  lp::LinearProgram p(r.n + 1);  // posterior coordinates plus the slack
  p.lower[r.n] = -kInf;
  Vec sum_row(r.n + 1, 1.0);
  sum_row[r.n] = 0.0;
  p.add_eq(sum_row, 1.0);
  for (std::size_t i = 0; i < r.constraints.size(); ++i) {
    Vec row(r.n + 1, 0.0);
    for (int w = 0; w < r.n; ++w) row[w] = r.constraints[i].normal[w];
    row[r.n] = -1.0;
    p.add_ge(std::move(row), r.rhs_values[i]);
  }
  // s <= min_i(normal_i . nu - rhs_i) over the compact simplex, so the LP is
  // bounded whenever the action has at least one competitor (k >= 2).
  p.objective[r.n] = 1.0;
  const auto sol = lp::solve(p);
  return sol.status == lp::Status::Optimal && sol.objective_value > kTolStrict;
}

/// Actions whose interval-safe region has nonempty strict interior.
inline std::vector<int> relevant_actions(const BiasInterval& J,
                                         const Instance& inst) {
  std::vector<int> out;
  for (int a = 0; a < inst.n_actions(); ++a)
    if (strict_interior_feasible(a, J, inst)) out.push_back(a);
  return out;
}

/// Distance from the prior to the nearest default-region boundary at
/// alpha = 1 or to the simplex boundary, measured inside the affine hull.
inline double delta_mu0(const Instance& inst) {
  const int a0 = receiver::default_action(inst);
  const int n = inst.n_states();
  const Mat q = detail::sum_zero_basis(n);
  double d = kInf;
  for (int a2 = 0; a2 < inst.n_actions(); ++a2) {
    if (a2 == a0) continue;
    Vec normal(n);
    for (int w = 0; w < n; ++w)
      normal[w] = inst.u_receiver[a0][w] - inst.u_receiver[a2][w];
    double proj_sq = 0.0;
    for (const auto& col : q) {
      const double t = dot(normal, col);
      proj_sq += t * t;
    }
    if (proj_sq < 1e-24) continue;  // boundary parallel to the affine hull
    d = std::min(d, dot(normal, inst.prior) / std::sqrt(proj_sq));
  }
  // Simplex faces: distance to {nu_w = 0} within the affine hull.
  const double face_scale = std::sqrt(static_cast<double>(n) / (n - 1));
  for (int w = 0; w < n; ++w) d = std::min(d, inst.prior[w] * face_scale);
  return d;
}

struct MovableBinding {
  int constraint_id;
  Endpoint endpoint;
};

/// Vertex of a safe region with its active constraints. Constraint ids
/// 0..m-1 are the region's IC rows, m+w denotes the simplex face nu_w = 0.
struct VertexAtom {
  Posterior vertex;
  int action;
  std::vector<int> binding;
  std::optional<MovableBinding> movable_binding;
};

inline std::vector<int> binding_set(const SafeRegion& r, const Posterior& v) {
  std::vector<int> out;
  const int m = static_cast<int>(r.constraints.size());
  for (int i = 0; i < m; ++i)
    if (std::abs(dot(r.constraints[i].normal, v.probs) - r.rhs_values[i]) <=
        kTolActive)
      out.push_back(i);
  for (int w = 0; w < r.n; ++w)
    if (v[w] <= kTolActive) out.push_back(m + w);
  return out;
}

/// Writes nu as a convex combination of at most n vertices of the region,
/// growing a working vertex set with the membership / separation / pricing
/// LP loop until membership succeeds.
inline std::vector<std::pair<double, VertexAtom>> vertex_decompose(
    const Posterior& nu, const SafeRegion& region) {
  if (!contains(region, nu)) throw NotInRegion("posterior outside the region");
  const int n = region.n;

  auto vertex_of = [&](const Vec& objective) {
    lp::LinearProgram p = detail::region_lp(region);
    p.objective = objective;
    const auto sol = lp::solve(p);
    if (sol.status != lp::Status::Optimal)
      throw NumericalFailure("region LP not optimal in decomposition");
    return sol;
  };

  // Initialization LP with a fixed generic direction.
  Vec r0(n);
  for (int w = 0; w < n; ++w)
    r0[w] = 2.0 * (detail::mix64(w + 1) >> 11) * 0x1.0p-53 - 1.0;
  std::vector<Posterior> verts;
  verts.emplace_back(vertex_of(r0).point);

  for (int round = 0; round < 256; ++round) {
    // Restricted membership LP over weights on the current vertex set.
    const int m = static_cast<int>(verts.size());
    lp::LinearProgram mem(m);
    mem.add_eq(Vec(m, 1.0), 1.0);
    for (int w = 0; w < n; ++w) {
      Vec row(m);
      for (int j = 0; j < m; ++j) row[j] = verts[j][w];
      mem.add_eq(std::move(row), nu[w]);
    }
    const auto ms = lp::feasibility(mem);
    if (ms.status == lp::Status::Optimal) {
      std::vector<std::pair<double, VertexAtom>> out;
      for (int j = 0; j < m; ++j) {
        if (ms.point[j] <= 1e-12) continue;
        VertexAtom atom{verts[j], region.action, binding_set(region, verts[j]), {}};
        out.emplace_back(ms.point[j], std::move(atom));
      }
      if (static_cast<int>(out.size()) > n)
        throw NumericalFailure("decomposition exceeded Caratheodory bound");
      return out;
    }

    // Separation LP: a direction along which nu beats every current vertex.
    lp::LinearProgram sep(n + 1);  // c in [-1,1]^n, free threshold gamma
    for (int w = 0; w < n; ++w) {
      sep.lower[w] = -1.0;
      sep.upper[w] = 1.0;
      sep.objective[w] = nu[w];
    }
    sep.lower[n] = -kInf;
    sep.objective[n] = -1.0;
    for (const auto& v : verts) {
      Vec row(n + 1, 0.0);
      for (int w = 0; w < n; ++w) row[w] = -v[w];
      row[n] = 1.0;
      sep.add_ge(std::move(row), 0.0);  // c.v <= gamma
    }
    const auto ss = lp::solve(sep);
    if (ss.status != lp::Status::Optimal || ss.objective_value <= 1e-10)
      throw NumericalFailure("separation failed while nu not in hull");
    Vec dir(ss.point.begin(), ss.point.begin() + n);

    // Pricing LP: the region vertex extreme in that direction.
    const auto ps = vertex_of(dir);
    if (dot(dir, ps.point) <= dot(dir, nu.probs) - 1e-10)
      throw NotInRegion("separating hyperplane excludes the whole region");
    bool fresh = true;
    for (const auto& v : verts) {
      double dist = 0.0;
      for (int w = 0; w < n; ++w) dist = std::max(dist, std::abs(v[w] - ps.point[w]));
      if (dist <= kVertexDedup) { fresh = false; break; }
    }
    if (!fresh) throw NumericalFailure("pricing repeated a known vertex");
    verts.emplace_back(ps.point);
  }
  throw NumericalFailure("vertex decomposition did not terminate");
}

/// Closest point to nu (Euclidean) that satisfies the simplex, every
/// non-pinned region constraint, and the pinned constraint as an equality
/// with the given right-hand side. Active-set projection in the affine hull.
inline Posterior project_to_modified_region(const Posterior& nu,
                                            const SafeRegion& region,
                                            int pinned, double new_rhs) {
  const int n = region.n;
  const int m = static_cast<int>(region.constraints.size());

  // Feasibility of the modified set first.
  {
    lp::LinearProgram p(n);
    p.add_eq(Vec(n, 1.0), 1.0);
    p.add_eq(region.constraints[pinned].normal, new_rhs);
    for (int i = 0; i < m; ++i)
      if (i != pinned) p.add_ge(region.constraints[i].normal, region.rhs_values[i]);
    if (lp::feasibility(p).status != lp::Status::Optimal)
      throw InfeasibleProjection("modified region is empty");
  }

  const Mat q = detail::sum_zero_basis(n);
  const int d = n - 1;
  // Rows in z coordinates: nu' = nu + Q z.
  auto to_z = [&](const Vec& normal) {
    Vec row(d);
    for (int j = 0; j < d; ++j) row[j] = dot(normal, q[j]);
    return row;
  };
  struct ZRow {
    Vec g;
    double h;     // g . z >= h (or == for the pinned row)
    bool pinned;
  };
  std::vector<ZRow> rows;
  rows.push_back({to_z(region.constraints[pinned].normal),
                  new_rhs - dot(region.constraints[pinned].normal, nu.probs), true});
  for (int i = 0; i < m; ++i) {
    if (i == pinned) continue;
    rows.push_back({to_z(region.constraints[i].normal),
                    region.rhs_values[i] - dot(region.constraints[i].normal, nu.probs),
                    false});
  }
  for (int w = 0; w < n; ++w) {
    Vec e(n, 0.0);
    e[w] = 1.0;
    rows.push_back({to_z(e), -nu[w], false});  // nu'(w) >= 0
  }

  // Minimize ||z|| subject to the active rows as equalities; multipliers of
  // inequality rows must be nonnegative at the optimum.
  std::vector<int> active{0};  // the pinned row is always active
  Vec z(d, 0.0);
  for (int iter = 0; iter < 512; ++iter) {
    const int na = static_cast<int>(active.size());
    Mat gram(na, Vec(na, 0.0));
    Vec rhs_a(na);
    for (int i = 0; i < na; ++i) {
      rhs_a[i] = rows[active[i]].h;
      for (int j = 0; j < na; ++j)
        gram[i][j] = dot(rows[active[i]].g, rows[active[j]].g);
    }
    Vec lambda;
    try {
      lambda = detail::solve_linear(gram, rhs_a);
    } catch (const NumericalFailure&) {
      // Dependent active set: drop the most recent inequality row.
      if (na <= 1) throw;
      active.pop_back();
      continue;
    }
    z.assign(d, 0.0);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < d; ++j) z[j] += lambda[i] * rows[active[i]].g[j];

    // Most violated inactive inequality.
    int worst = -1;
    double worst_v = -1e-11;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (std::find(active.begin(), active.end(), static_cast<int>(i)) !=
          active.end())
        continue;
      const double v = dot(rows[i].g, z) - rows[i].h;
      if (v < worst_v) {
        worst_v = v;
        worst = static_cast<int>(i);
      }
    }
    if (worst >= 0) {
      active.push_back(worst);
      continue;
    }
    // Check multiplier signs on the active inequalities.
    int drop = -1;
    double most_neg = -1e-11;
    for (int i = 0; i < na; ++i) {
      if (rows[active[i]].pinned) continue;
      if (lambda[i] < most_neg) {
        most_neg = lambda[i];
        drop = i;
      }
    }
    if (drop < 0) {
      Vec out = nu.probs;
      for (int w = 0; w < n; ++w)
        for (int j = 0; j < d; ++j) out[w] += q[j][w] * z[j];
      return Posterior(std::move(out));
    }
    active.erase(active.begin() + drop);
  }
  throw NumericalFailure("active-set projection did not converge");
}

/// Restores exact Bayes plausibility after posterior perturbations by adding
/// one correction atom in the default region, rescaling old weights.
inline Scheme repair_bayes(const Scheme& perturbed, const Posterior& prior,
                           const SafeRegion& default_region, double delta_mu0) {
  const int n = static_cast<int>(prior.dim());
  Vec mean(n, 0.0);
  for (const auto& a : perturbed.atoms)
    for (int w = 0; w < n; ++w) mean[w] += a.weight * a.posterior[w];
  Vec r(n);
  double ones = 0.0;
  for (int w = 0; w < n; ++w) {
    r[w] = prior[w] - mean[w];
    ones += r[w];
  }
  if (std::abs(ones) > 1e-9)
    throw Error("repair requires a sum-zero residual");
  const double rn = norm2(r);
  if (rn <= kTolBayes) return perturbed;
  if (!(delta_mu0 > 0.0)) throw Error("repair requires a positive margin");

  const double lam = 2.0 * rn / (delta_mu0 + 2.0 * rn);
  Vec corr(n);
  for (int w = 0; w < n; ++w)
    corr[w] = prior[w] + (1.0 - lam) / lam * r[w];
  for (double c : corr)
    if (c < -kTolProb)
      throw RepairOutOfSimplex("correction posterior leaves the simplex");
  Posterior nu_plus(std::move(corr));
  if (!contains(default_region, nu_plus, kTolLp))
    throw RepairOutOfSimplex("correction posterior leaves the default region");

  Scheme out;
  out.atoms.reserve(perturbed.atoms.size() + 1);
  for (const auto& a : perturbed.atoms)
    out.atoms.push_back({(1.0 - lam) * a.weight, a.posterior, a.rec_action});
  out.atoms.push_back({lam, std::move(nu_plus), default_region.action});
  return out;
}

}  // namespace persuasion::geometry
