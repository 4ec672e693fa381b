#pragma once

// Binary-case closed forms and the three binary learning algorithms:
// the Binary Search baseline, Safe Exploration, and the joint
// unknown-prior-and-bias scanner.

#include <concepts>

#include "persuasion/core.hpp"

namespace persuasion::binary {

/// Bayesian-posterior cutoff mu0 + (q_hat - mu0) / alpha. May exceed 1,
/// in which case no posterior induces action 1 at this bias.
inline double nu_cutoff(double alpha, const BinaryInstance& b) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha outside (0, 1]");
  return b.mu0 + (b.q_hat - b.mu0) / alpha;
}

/// Smallest bias for which persuasion is feasible: nu_cutoff(alpha) <= 1.
inline double alpha_min_binary(const BinaryInstance& b) {
  return (b.q_hat - b.mu0) / (1.0 - b.mu0);
}

/// Two-point scheme supported on {0, nu_cutoff(alpha)}: the low atom
/// recommends 0, the high atom recommends 1 and carries mass mu0 / cutoff.
inline Scheme two_point_scheme(double alpha, const BinaryInstance& b) {
  const double cut = nu_cutoff(alpha, b);
  if (cut > 1.0 + 1e-12)
    throw InfeasibleBias("no persuasive posterior at this bias");
  const double c = std::min(cut, 1.0);
  const double w_hi = b.mu0 / c;
  Scheme s;
  s.atoms.push_back({1.0 - w_hi, Posterior(Vec{1.0, 0.0}), 0});
  s.atoms.push_back({w_hi, Posterior(Vec{1.0 - c, c}), 1});
  return s;
}

/// Largest state-0 leakage m keeping the High recommendation persuasive in
/// the joint unknown prior-and-bias model.
inline double m_star(double alpha, double mu, double q_hat) {
  if (!(0.0 < mu && mu < 1.0)) throw Error("prior mass outside (0, 1)");
  if (mu < q_hat && alpha < (q_hat - mu) / (1.0 - mu) - 1e-15)
    throw InfeasibleBias("persuasion infeasible: bias below threshold");
  return mu * (mu * (1.0 - alpha) + alpha - q_hat) /
         ((1.0 - mu) * (q_hat - (1.0 - alpha) * mu));
}

/// Outcome of one round against the two-signal leakage family.
struct LeakOutcome {
  bool high;
  int action;
};

template <class E>
concept LeakEnv = requires(E& e, double m) {
  { e.play_leak(m) } -> std::same_as<LeakOutcome>;
  { e.rounds_left() } -> std::convertible_to<long long>;
};

/// Plain closed interval used for update logs (no positivity invariant, so
/// it can hold the joint scanner's [0, 1] brackets).
struct Bracket {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

/// Result of one learning run; the per-round trace and regret live in the
/// environment.
struct RunResult {
  Bracket final_interval{0.0, 1.0};
  std::vector<Bracket> interval_updates;
  std::vector<double> phase_lengths;  // interval length after each completed phase
  double committed_param = 0.0;       // probe value the commitment scheme uses
};

/// Binary search baseline: midpoint probes, halving on each informative
/// realization, commitment after ceil(2 log2 T) updates.
template <PlayEnv E>
RunResult run_bs(long long T, const BinaryInstance& b, E& env) {
  RunResult res;
  double lo = alpha_min_binary(b), hi = 1.0;
  const long long updates_target = static_cast<long long>(
      std::ceil(2.0 * std::log2(static_cast<double>(std::max<long long>(T, 2)))));
  long long k = 0;
  while (k < updates_target && env.rounds_left() > 0) {
    const double m = 0.5 * (lo + hi);
    const Scheme s = two_point_scheme(m, b);
    while (env.rounds_left() > 0) {
      const StepOutcome out = env.play(s);
      if (out.atom != 1) continue;  // low posterior: uninformative
      if (out.action == 1)
        lo = m;
      else
        hi = m;
      res.interval_updates.push_back({lo, hi});
      ++k;
      break;
    }
  }
  const Scheme commit = two_point_scheme(lo, b);
  while (env.rounds_left() > 0) env.play(commit);
  res.final_interval = {lo, hi};
  res.committed_param = lo;
  return res;
}

/// Safe Exploration: left-to-right scans with step eps starting at 1/2,
/// squared after each interval update; commitment once |J| <= 1/T. The lower
/// endpoint advances eagerly on accepted probes, so truncating at the
/// horizon commits the last accepted probe value.
template <PlayEnv E>
RunResult run_se(long long T, const BinaryInstance& b, E& env) {
  RunResult res;
  double lo = alpha_min_binary(b), hi = 1.0;
  double eps = 0.5;
  while (hi - lo > 1.0 / static_cast<double>(T) && env.rounds_left() > 0) {
    double m = lo + eps;
    bool bracketed = false;
    Scheme s;
    if (m <= hi + 1e-12) s = two_point_scheme(m, b);
    while (m <= hi + 1e-12 && env.rounds_left() > 0) {
      const StepOutcome out = env.play(s);
      if (out.atom != 1) continue;  // low posterior: uninformative
      if (out.action == 1) {
        lo = m;
        res.interval_updates.push_back({lo, hi});
        m += eps;
        if (m <= hi + 1e-12) s = two_point_scheme(m, b);
      } else {
        hi = m;
        res.interval_updates.push_back({lo, hi});
        eps *= eps;
        bracketed = true;
        res.phase_lengths.push_back(hi - lo);
        break;
      }
    }
    if (!bracketed) {
      if (m > hi + 1e-12) {  // scan left the interval without a rejection
        res.interval_updates.push_back({lo, hi});
        eps *= eps;
        res.phase_lengths.push_back(hi - lo);
      } else {
        break;  // horizon exhausted mid-phase
      }
    }
  }
  const Scheme commit = two_point_scheme(lo, b);
  while (env.rounds_left() > 0) env.play(commit);
  res.final_interval = {lo, hi};
  res.committed_param = lo;
  return res;
}

/// Joint unknown prior-and-bias scan over the leakage family pi_m with
/// pi_m(High | w=1) = 1 and pi_m(High | w=0) = m. Low realizations are
/// skipped; acceptance advances m, rejection brackets, eps squares. The scan
/// probes the left endpoint itself before stepping.
template <LeakEnv E>
RunResult run_sej(long long T, double /*q_hat*/, E& env) {
  RunResult res;
  double a = 0.0, b = 1.0;
  double eps = 0.5;
  while (b - a > 1.0 / static_cast<double>(T) && env.rounds_left() > 0) {
    double m = a;
    bool bracketed = false;
    while (m <= b + 1e-12 && env.rounds_left() > 0) {
      const LeakOutcome out = env.play_leak(m);
      if (!out.high) continue;
      if (out.action == 1) {
        a = m;  // eager: the accepted probe is the new safe lower endpoint
        res.interval_updates.push_back({a, b});
        m += eps;
      } else {
        b = m;
        res.interval_updates.push_back({a, b});
        eps *= eps;
        bracketed = true;
        res.phase_lengths.push_back(b - a);
        break;
      }
    }
    if (!bracketed) {
      if (m > b + 1e-12) {
        res.interval_updates.push_back({a, b});
        eps *= eps;
        res.phase_lengths.push_back(b - a);
      } else {
        break;
      }
    }
  }
  const double m_hat = a;
  while (env.rounds_left() > 0) env.play_leak(m_hat);
  res.final_interval = {a, b};
  res.committed_param = m_hat;
  return res;
}

}  // namespace persuasion::binary
