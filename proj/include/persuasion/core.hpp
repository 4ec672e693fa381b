#pragma once

// Core domain types for repeated persuasion against a receiver with an
// unknown linear belief bias: instances, posteriors, posterior-form
// signaling schemes, bias intervals and per-round traces.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // one row per action, one column per state

// Numeric tolerances shared across the library.
inline constexpr double kTolProb = 1e-9;    // simplex membership
inline constexpr double kTolBayes = 1e-9;   // Bayes-plausibility residual
inline constexpr double kTolLp = 1e-9;      // LP constraint residual
inline constexpr double kTolTie = 1e-9;     // utility indifference
inline constexpr double kTolActive = 1e-8;  // binding-constraint detection
inline constexpr double kTolStrict = 1e-7;  // strict-interior slack
inline constexpr double kVertexDedup = 1e-7;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSimplexPrior : Error { using Error::Error; };
struct ZeroMassState : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };
struct NonUniqueDefault : Error { using Error::Error; };
struct InfeasibleBias : Error { using Error::Error; };
struct NotInRegion : Error { using Error::Error; };
struct InfeasibleProjection : Error { using Error::Error; };
struct RepairOutOfSimplex : Error { using Error::Error; };
struct BudgetExhausted : Error { using Error::Error; };
struct MixedHorizons : Error { using Error::Error; };

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

/// Point in the probability simplex over states. Entries in [-kTolProb, 1]
/// are clamped to [0, 1]; the sum must be 1 within kTolProb.
struct Posterior {
  Vec probs;

  Posterior() = default;
  explicit Posterior(Vec p) : probs(std::move(p)) {
    double sum = 0.0;
    for (double& x : probs) {
      if (x < 0.0) {
        if (x < -kTolProb)
          throw NonSimplexPrior("posterior entry below zero: " + std::to_string(x));
        x = 0.0;
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-7)
      throw NonSimplexPrior("posterior does not sum to 1: " + std::to_string(sum));
  }

  std::size_t dim() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

/// Known persuasion instance: finite states/actions, full-support prior and
/// public utility matrices for sender and receiver.
struct Instance {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  Vec prior;      // full support, sums to 1
  Mat u_sender;   // k x n
  Mat u_receiver; // k x n
  double u_max = 0.0;  // max |u_sender|, recorded at validation

  int n_states() const { return static_cast<int>(states.size()); }
  int n_actions() const { return static_cast<int>(actions.size()); }
};

/// Binary specialization (mu0, q_hat): state-1 prior mass and the
/// distorted-belief cutoff above which the receiver takes action 1.
struct BinaryInstance {
  double mu0;
  double q_hat;

  BinaryInstance(double mu0_, double q_hat_) : mu0(mu0_), q_hat(q_hat_) {
    if (!(0.0 < mu0 && mu0 < q_hat && q_hat < 1.0))
      throw Error("binary instance requires 0 < mu0 < q_hat < 1");
  }
};

struct SchemeAtom {
  double weight;
  Posterior posterior;
  int rec_action;
};

/// Finite distribution over posteriors with recommended actions.
struct Scheme {
  std::vector<SchemeAtom> atoms;

  /// Max-norm of sum(weight * posterior) - prior.
  double bayes_residual(const Vec& prior) const {
    Vec mean(prior.size(), 0.0);
    for (const auto& a : atoms)
      for (std::size_t w = 0; w < mean.size(); ++w)
        mean[w] += a.weight * a.posterior[w];
    double r = 0.0;
    for (std::size_t w = 0; w < mean.size(); ++w)
      r = std::max(r, std::abs(mean[w] - prior[w]));
    return r;
  }

  bool bayes_plausible(const Vec& prior, double tol = kTolBayes) const {
    double wsum = 0.0;
    for (const auto& a : atoms) {
      if (a.weight < -tol) return false;
      wsum += a.weight;
    }
    if (std::abs(wsum - 1.0) > tol) return false;
    return bayes_residual(prior) <= tol;
  }

  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto feed = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
      }
    };
    auto feed_d = [&](double x) {
      std::uint64_t v;
      static_assert(sizeof(v) == sizeof(x));
      std::memcpy(&v, &x, sizeof(v));
      feed(v);
    };
    for (const auto& a : atoms) {
      feed_d(a.weight);
      feed(static_cast<std::uint64_t>(a.rec_action));
      for (double p : a.posterior.probs) feed_d(p);
    }
    return h;
  }
};

/// Closed uncertainty interval for the unknown bias, within (0, 1].
struct BiasInterval {
  double lo;
  double hi;

  BiasInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(0.0 < lo && lo <= hi && hi <= 1.0))
      throw Error("bias interval requires 0 < lo <= hi <= 1");
  }

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double a, double tol = 0.0) const {
    return a >= lo - tol && a <= hi + tol;
  }
};

struct TraceRound {
  long long round;
  std::uint64_t scheme_digest;
  int state;
  int atom;        // realized posterior index within the played scheme
  int action;
  double u_sender;
  double u_receiver;
  double benchmark;  // full-information per-round value
};

/// Per-round record of one trial, sufficient to reconstruct realized regret.
struct Trace {
  std::vector<TraceRound> rounds;

  double cumulative_realized_regret() const {
    double r = 0.0;
    for (const auto& t : rounds) r += t.benchmark - t.u_sender;
    return r;
  }
};

/// Outcome of one environment round.
struct StepOutcome {
  int state;
  int atom;
  int action;
  double u_sender;
  double u_receiver;
};

/// Anything the learning algorithms can play posterior-form schemes against.
template <class E>
concept PlayEnv = requires(E& e, const Scheme& s) {
  { e.play(s) } -> std::same_as<StepOutcome>;
  { e.rounds_left() } -> std::convertible_to<long long>;
};

/// Checks the raw pieces of an instance description and returns a validated
/// Instance with U_max recorded.
inline Instance validate_instance(std::vector<std::string> states,
                                  std::vector<std::string> actions, Vec prior,
                                  Mat u_sender, Mat u_receiver) {
  const std::size_t n = states.size();
  const std::size_t k = actions.size();
  if (n < 2 || k < 2)
    throw DimensionMismatch("need at least 2 states and 2 actions");
  if (prior.size() != n)
    throw DimensionMismatch("prior size mismatch");
  if (u_sender.size() != k || u_receiver.size() != k)
    throw DimensionMismatch("utility matrix must have one row per action");
  for (const auto& m : {std::cref(u_sender), std::cref(u_receiver)})
    for (const auto& row : m.get())
      if (row.size() != n) throw DimensionMismatch("utility row size mismatch");

  double sum = 0.0;
  for (double p : prior) {
    if (!(p > 0.0)) throw ZeroMassState("prior must have full support");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTolProb)
    throw NonSimplexPrior("prior sums to " + std::to_string(sum));

  Instance inst;
  inst.states = std::move(states);
  inst.actions = std::move(actions);
  inst.prior = std::move(prior);
  inst.u_sender = std::move(u_sender);
  inst.u_receiver = std::move(u_receiver);
  for (const auto& m : {std::cref(inst.u_sender), std::cref(inst.u_receiver)})
    for (const auto& row : m.get())
      for (double u : row)
        if (!std::isfinite(u)) throw Error("utility entries must be finite");
  for (const auto& row : inst.u_sender)
    for (double u : row) inst.u_max = std::max(inst.u_max, std::abs(u));
  return inst;
}

/// Embeds a binary instance as a 2-state 2-action general instance with the
/// canonical sender utility u_S(a, w) = 1{a = 1} and receiver utilities whose
/// cutoff in distorted belief is exactly q_hat. Action 0 is the default.
inline Instance binary_as_general(const BinaryInstance& b) {
  // u_R(1, w) = 1{w = 1} - q_hat, u_R(0, .) = 0: action 1 preferred iff the
  // receiver's belief in state 1 is at least q_hat.
  return validate_instance(
      {"omega0", "omega1"}, {"a0", "a1"}, {1.0 - b.mu0, b.mu0},
      {{0.0, 0.0}, {1.0, 1.0}}, {{0.0, 0.0}, {-b.q_hat, 1.0 - b.q_hat}});
}

}  // namespace persuasion
