#pragma once

// General Safe Exploration: localization via threshold tests, safe
// exploration through interval-safe vertex-supported schemes with
// movable-constraint probes, and commitment.

#include <map>
#include <optional>

#include "persuasion/core.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/receiver.hpp"

namespace persuasion::general {

using geometry::Endpoint;
using geometry::SafeRegion;
using geometry::VertexAtom;

/// Interval-safe scheme supported on vertices of the safe polytopes, with
/// the informative atoms (those carrying a movable binding constraint).
struct VertexScheme {
  std::vector<std::pair<double, VertexAtom>> atoms;
  std::vector<int> informative_ids;
  double p_info = 0.0;

  Scheme to_scheme() const {
    Scheme s;
    s.atoms.reserve(atoms.size());
    for (const auto& [w, atom] : atoms)
      s.atoms.push_back({w, atom.vertex, atom.action});
    return s;
  }
};

namespace detail {

struct SafeLp {
  std::vector<int> relevant;
  lp::LpSolution solution;
};

// Direct-recommendation LP over the interval-safe regions: variables are the
// joint masses x_{a,w} for relevant actions, with per-state mass rows and
// interval-IC rows against every other action.
inline SafeLp solve_safe_lp(const BiasInterval& J, const Instance& inst) {
  SafeLp out;
  out.relevant = geometry::relevant_actions(J, inst);
  const int n = inst.n_states();
  const int k = static_cast<int>(out.relevant.size());
  lp::LinearProgram p(k * n);
  for (int i = 0; i < k; ++i)
    for (int w = 0; w < n; ++w)
      p.objective[i * n + w] = inst.u_sender[out.relevant[i]][w];
  for (int w = 0; w < n; ++w) {
    Vec row(k * n, 0.0);
    for (int i = 0; i < k; ++i) row[i * n + w] = 1.0;
    p.add_eq(std::move(row), inst.prior[w]);
  }
  for (int i = 0; i < k; ++i) {
    const int a = out.relevant[i];
    for (int a2 = 0; a2 < inst.n_actions(); ++a2) {
      if (a2 == a) continue;
      const double b = geometry::interval_rhs(a, a2, J, inst);
      Vec row(k * n, 0.0);
      for (int w = 0; w < n; ++w)
        row[i * n + w] =
            inst.u_receiver[a][w] - inst.u_receiver[a2][w] - b;
      p.add_ge(std::move(row), 0.0);
    }
  }
  out.solution = lp::solve(p);
  if (out.solution.status != lp::Status::Optimal)
    throw NumericalFailure("interval-safe LP did not solve");
  return out;
}

}  // namespace detail

/// Sender value of the optimal interval-safe direct scheme on J. With a
/// singleton interval this is the full-information benchmark.
inline double safe_scheme_lp_value(const BiasInterval& J, const Instance& inst) {
  return detail::solve_safe_lp(J, inst).solution.objective_value;
}

struct ThresholdScheme {
  Scheme scheme;
  double objective;  // total mass on non-default recommendations
};

/// Threshold-test LP at candidate bias beta: a direct scheme whose
/// non-default recommendations sit exactly on the default-action
/// indifference boundary at beta, with maximal informative mass. Returns
/// nullopt when beta is below the detectable threshold (zero mass).
inline std::optional<ThresholdScheme> threshold_test_lp(double beta,
                                                        const Instance& inst) {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error("beta outside (0, 1]");
  const int a0 = receiver::default_action(inst);
  const int n = inst.n_states();
  const int k = inst.n_actions();

  auto coef = [&](int a, int a2, int w) {
    double delta_mu = 0.0;
    for (int w2 = 0; w2 < n; ++w2)
      delta_mu +=
          (inst.u_receiver[a][w2] - inst.u_receiver[a2][w2]) * inst.prior[w2];
    return beta * (inst.u_receiver[a][w] - inst.u_receiver[a2][w]) +
           (1.0 - beta) * delta_mu;
  };

  lp::LinearProgram p(k * n);
  for (int a = 0; a < k; ++a)
    if (a != a0)
      for (int w = 0; w < n; ++w) p.objective[a * n + w] = 1.0;
  for (int w = 0; w < n; ++w) {
    Vec row(k * n, 0.0);
    for (int a = 0; a < k; ++a) row[a * n + w] = 1.0;
    p.add_eq(std::move(row), inst.prior[w]);
  }
  for (int a = 0; a < k; ++a) {
    for (int a2 = 0; a2 < k; ++a2) {
      if (a2 == a) continue;
      Vec row(k * n, 0.0);
      for (int w = 0; w < n; ++w) row[a * n + w] = coef(a, a2, w);
      if (a2 == a0 && a != a0)
        p.add_eq(std::move(row), 0.0);  // exact indifference with the default
      else
        p.add_ge(std::move(row), 0.0);
    }
  }
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::Optimal)
    throw NumericalFailure("threshold-test LP did not solve");
  if (sol.objective_value <= 1e-9) return std::nullopt;

  ThresholdScheme out;
  out.objective = sol.objective_value;
  for (int a = 0; a < k; ++a) {
    double mass = 0.0;
    for (int w = 0; w < n; ++w) mass += sol.point[a * n + w];
    if (mass <= 1e-10) continue;
    Vec nu(n);
    for (int w = 0; w < n; ++w) nu[w] = std::max(0.0, sol.point[a * n + w]) / mass;
    out.scheme.atoms.push_back({mass, Posterior(std::move(nu)), a});
  }
  double total = 0.0;
  for (const auto& atom : out.scheme.atoms) total += atom.weight;
  for (auto& atom : out.scheme.atoms) atom.weight /= total;
  return out;
}

struct ThresholdTestResult {
  BiasInterval interval;
  bool informative;
  bool accepted;  // the receiver followed a non-default recommendation
  long long rounds_used;
};

/// Plays the given threshold scheme until a non-default recommendation is
/// realized, then splits the interval at beta according to the receiver's
/// reaction. Leaves J unchanged when the budget runs out.
template <PlayEnv E>
ThresholdTestResult run_threshold_test(const BiasInterval& J, double beta,
                                       E& env, long long budget,
                                       const Instance& inst,
                                       const ThresholdScheme& test) {
  const int a0 = receiver::default_action(inst);
  long long used = 0;
  while (used < budget && env.rounds_left() > 0) {
    const StepOutcome out = env.play(test.scheme);
    ++used;
    const int rec = test.scheme.atoms[out.atom].rec_action;
    if (rec == a0) continue;
    if (out.action == a0) return {BiasInterval(J.lo, beta), true, false, used};
    return {BiasInterval(beta, J.hi), true, true, used};
  }
  return {J, false, false, used};
}

template <PlayEnv E>
ThresholdTestResult run_threshold_test(const BiasInterval& J, double beta,
                                       E& env, long long budget,
                                       const Instance& inst) {
  const auto test = threshold_test_lp(beta, inst);
  if (!test) throw InfeasibleBias("threshold test infeasible at beta");
  return run_threshold_test(J, beta, env, budget, inst, *test);
}

/// Smallest testable bias, located by bisection on threshold-test
/// feasibility (an upper interval in beta) and returned from the feasible
/// side. Returns nullopt when even beta = 1 is untestable, in which case the
/// default action is optimal at every belief and persuasion is moot.
inline std::optional<double> alpha_min_general(const Instance& inst,
                                               double tol = 1e-6) {
  if (!threshold_test_lp(1.0, inst)) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (threshold_test_lp(mid, inst))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

struct LocalizeResult {
  BiasInterval interval{1.0, 1.0};
  bool persuasion_feasible = false;
  double alpha_min = 1.0;
  std::vector<BiasInterval> updates;
};

/// Stage 1: bisection by threshold tests from [alpha_min, 1] down to length
/// 1/log T. One initial test at alpha_min detects the infeasible regime.
/// Budget per test is 64 / (LP objective); one retry, then BudgetExhausted.
template <PlayEnv E>
LocalizeResult localize(const Instance& inst, E& env, long long T) {
  LocalizeResult res;
  const auto amin = alpha_min_general(inst);
  if (!amin) return res;  // untestable: no belief ever beats the default
  res.alpha_min = *amin;

  auto test_at = [&](const BiasInterval& J, double beta) {
    const auto test = threshold_test_lp(beta, inst);
    if (!test) throw NumericalFailure("threshold test lost feasibility");
    const long long budget =
        static_cast<long long>(std::ceil(64.0 / test->objective));
    auto r = run_threshold_test(J, beta, env, budget, inst, *test);
    if (!r.informative && env.rounds_left() > 0)
      r = run_threshold_test(J, beta, env, budget, inst, *test);
    if (!r.informative && env.rounds_left() > 0)
      throw BudgetExhausted("threshold test produced no informative round");
    return r;
  };

  BiasInterval J(res.alpha_min, 1.0);
  if (env.rounds_left() <= 0) return res;

  // Detect the infeasible regime with one test at the detectability edge.
  const auto first = test_at(J, res.alpha_min);
  if (!first.informative) return res;  // horizon ended; treat as infeasible
  if (!first.accepted) {
    res.interval = first.interval;
    return res;  // receiver rejected: alpha* below every testable level
  }
  res.persuasion_feasible = true;
  res.updates.push_back(J);

  const double target =
      T >= 3 ? 1.0 / std::log(static_cast<double>(T)) : 1.0;
  while (J.length() > target && env.rounds_left() > 0) {
    const auto r = test_at(J, J.midpoint());
    if (!r.informative) break;  // horizon ended mid-test
    J = r.interval;
    res.updates.push_back(J);
  }
  res.interval = J;
  return res;
}

/// Interval-safe vertex-supported scheme: solve the safe LP, decompose each
/// positive-mass recommendation posterior into vertices of its region, merge
/// and mark informative atoms with one chosen movable binding constraint
/// (largest |normal . prior| moves fastest; ties to the lowest loser index).
inline VertexScheme vertex_safe_scheme(const BiasInterval& J,
                                       const Instance& inst) {
  const auto safe = detail::solve_safe_lp(J, inst);
  const int n = inst.n_states();
  VertexScheme out;

  std::map<int, SafeRegion> regions;
  for (std::size_t i = 0; i < safe.relevant.size(); ++i) {
    const int a = safe.relevant[i];
    double mass = 0.0;
    for (int w = 0; w < n; ++w) mass += safe.solution.point[i * n + w];
    if (mass <= 1e-10) continue;
    Vec nu(n);
    for (int w = 0; w < n; ++w)
      nu[w] = std::max(0.0, safe.solution.point[i * n + w]) / mass;
    double s = 0.0;
    for (double x : nu) s += x;
    for (double& x : nu) x /= s;
    auto it = regions.emplace(a, geometry::make_region(a, J, inst)).first;
    const auto parts = geometry::vertex_decompose(Posterior(std::move(nu)), it->second);
    for (const auto& [gamma, atom] : parts)
      out.atoms.emplace_back(mass * gamma, atom);
  }

  // Merge duplicated vertices of the same action.
  std::vector<std::pair<double, VertexAtom>> merged;
  for (auto& [w, atom] : out.atoms) {
    bool found = false;
    for (auto& [mw, matom] : merged) {
      if (matom.action != atom.action) continue;
      double dist = 0.0;
      for (int i = 0; i < n; ++i)
        dist = std::max(dist, std::abs(matom.vertex[i] - atom.vertex[i]));
      if (dist <= kVertexDedup) {
        mw += w;
        found = true;
        break;
      }
    }
    if (!found) merged.emplace_back(w, std::move(atom));
  }
  out.atoms = std::move(merged);

  double total = 0.0;
  for (const auto& [w, atom] : out.atoms) total += w;
  for (auto& [w, atom] : out.atoms) w /= total;

  // Informative atoms: pick one movable binding IC constraint each.
  for (std::size_t i = 0; i < out.atoms.size(); ++i) {
    auto& [w, atom] = out.atoms[i];
    const SafeRegion& region = regions.at(atom.action);
    const int m = static_cast<int>(region.constraints.size());
    int pick = -1;
    for (int id : atom.binding) {
      if (id >= m) continue;  // simplex face
      if (!region.constraints[id].movable()) continue;
      if (pick < 0 ||
          std::abs(region.constraints[id].c_coeff) >
              std::abs(region.constraints[pick].c_coeff) + kTolTie)
        pick = id;
    }
    if (pick >= 0) {
      atom.movable_binding =
          geometry::MovableBinding{pick, region.binding_endpoint(pick)};
      out.informative_ids.push_back(static_cast<int>(i));
      out.p_info += w;
    }
  }
  return out;
}

struct Probe {
  double m;             // probed bias value
  Endpoint endpoint;
  int base_index;       // index into the base VertexScheme
  Posterior posterior;
};

/// Playable probe scheme: informative vertices moved across their chosen
/// boundary to the probe value, everything else unchanged, plus at most one
/// correction atom restoring exact Bayes plausibility.
struct ProbeScheme {
  Scheme scheme;
  std::map<int, Probe> probes;  // scheme atom index -> probe
  bool corrected = false;
};

inline ProbeScheme build_probe(const VertexScheme& base, double l, double r,
                               double eta, const BiasInterval& J,
                               const Instance& inst) {
  ProbeScheme out;
  std::map<int, SafeRegion> regions;
  for (std::size_t i = 0; i < base.atoms.size(); ++i) {
    const auto& [w, atom] = base.atoms[i];
    if (!atom.movable_binding) {
      out.scheme.atoms.push_back({w, atom.vertex, atom.action});
      continue;
    }
    const auto& mb = *atom.movable_binding;
    const double m = mb.endpoint == Endpoint::Lower ? l + eta : r - eta;
    auto it = regions.emplace(atom.action,
                              geometry::make_region(atom.action, J, inst)).first;
    const auto& region = it->second;
    const double new_rhs = geometry::rhs(
        atom.action, region.constraints[mb.constraint_id].loser, m, inst);
    Posterior moved = geometry::project_to_modified_region(
        atom.vertex, region, mb.constraint_id, new_rhs);
    const int idx = static_cast<int>(out.scheme.atoms.size());
    out.scheme.atoms.push_back({w, moved, atom.action});
    out.probes.emplace(idx,
                       Probe{m, mb.endpoint, static_cast<int>(i), std::move(moved)});
  }

  const Posterior prior(inst.prior);
  const double resid = out.scheme.bayes_residual(inst.prior);
  if (resid > 1e-12) {
    const int a0 = receiver::default_action(inst);
    const SafeRegion def = geometry::make_region(a0, J, inst);
    const Scheme repaired =
        geometry::repair_bayes(out.scheme, prior, def, geometry::delta_mu0(inst));
    out.corrected = repaired.atoms.size() > out.scheme.atoms.size();
    out.scheme = repaired;
  }
  return out;
}

struct SafeExploreResult {
  BiasInterval interval;
  VertexScheme base;
  std::vector<BiasInterval> updates;
  bool early_stop = false;  // no informative atoms: the safe scheme is optimal
  bool completed = false;   // phase finished (vs. horizon truncation)
};

/// One fixed-interval phase: with eta = |J|^2, probe Lower atoms at l + eta
/// and Upper atoms at r - eta until an informative atom fires; matching
/// actions move the endpoint inward, a mismatch localizes the bias to the
/// adjacent length-eta bracket.
template <PlayEnv E>
SafeExploreResult safe_explore(const BiasInterval& J, const Instance& inst,
                               E& env) {
  const double L = J.length();
  const double eta = std::max(L * L, 1e-12);
  VertexScheme base = vertex_safe_scheme(J, inst);
  if (base.p_info <= 1e-12) return {J, std::move(base), {}, true, true};

  double l = J.lo, r = J.hi;
  std::vector<BiasInterval> updates;
  while (r - l > eta && env.rounds_left() > 0) {
    const ProbeScheme probe = build_probe(base, l, r, eta, J, inst);
    bool fired = false;
    while (env.rounds_left() > 0) {
      const StepOutcome out = env.play(probe.scheme);
      const auto it = probe.probes.find(out.atom);
      if (it == probe.probes.end()) continue;
      const Probe& pr = it->second;
      const int want = probe.scheme.atoms[out.atom].rec_action;
      if (pr.endpoint == Endpoint::Lower) {
        if (out.action == want) {
          l += eta;
          updates.emplace_back(l, r);
        } else {
          updates.emplace_back(l, l + eta);
          return {BiasInterval(l, l + eta), std::move(base), std::move(updates),
                  false, true};
        }
      } else {
        if (out.action == want) {
          r -= eta;
          updates.emplace_back(l, r);
        } else {
          updates.emplace_back(r - eta, r);
          return {BiasInterval(r - eta, r), std::move(base), std::move(updates),
                  false, true};
        }
      }
      fired = true;
      break;
    }
    if (!fired) {
      return {BiasInterval(l, r), std::move(base), std::move(updates), false,
              false};  // horizon exhausted mid-phase
    }
  }
  return {BiasInterval(l, r), std::move(base), std::move(updates), false, true};
}

struct GseResult {
  BiasInterval final_interval{1.0, 1.0};
  bool persuasion_feasible = false;
  double alpha_min = 1.0;
  std::vector<BiasInterval> interval_updates;
  std::vector<double> phase_lengths;  // post-localization interval then each phase
  Scheme committed;
};

/// Three stages: localization to |J| <= 1/log T, safe-exploration phases
/// until |J| <= 1/T or an early stop, then commitment to the interval-safe
/// vertex scheme.
template <PlayEnv E>
GseResult run_gse(long long T, const Instance& inst, E& env) {
  GseResult res;
  const auto loc = localize(inst, env, T);
  res.persuasion_feasible = loc.persuasion_feasible;
  res.alpha_min = loc.alpha_min;
  res.interval_updates = loc.updates;

  if (!loc.persuasion_feasible) {
    Scheme s;
    s.atoms.push_back({1.0, Posterior(inst.prior), receiver::default_action(inst)});
    res.committed = s;
    res.final_interval = loc.interval;
    while (env.rounds_left() > 0) env.play(s);
    return res;
  }

  BiasInterval J = loc.interval;
  res.phase_lengths.push_back(J.length());
  while (J.length() > 1.0 / static_cast<double>(T) && env.rounds_left() > 0) {
    auto se = safe_explore(J, inst, env);
    for (const auto& u : se.updates) res.interval_updates.push_back(u);
    J = se.interval;
    if (se.early_stop) break;
    if (!se.completed) break;  // truncated at the horizon
    res.phase_lengths.push_back(J.length());
  }

  res.final_interval = J;
  res.committed = vertex_safe_scheme(J, inst).to_scheme();
  while (env.rounds_left() > 0) env.play(res.committed);
  return res;
}

}  // namespace persuasion::general
