#pragma once

// Biased belief distortion, receiver best response with the two-level
// tie-breaking convention, and the sender's reduced-form value.

#include <span>

#include "persuasion/core.hpp"

namespace persuasion::receiver {

/// Bias level: weight the receiver puts on the Bayesian posterior.
struct Bias {
  double alpha;
  explicit Bias(double a) : alpha(a) {
    if (!(0.0 < alpha && alpha <= 1.0))
      throw Error("bias level must lie in (0, 1]");
  }
};

/// Distorted posterior (1 - alpha) * prior + alpha * nu.
inline Posterior distort(const Posterior& nu, const Vec& prior, double alpha) {
  if (nu.dim() != prior.size()) throw DimensionMismatch("distort: size mismatch");
  Vec out(prior.size());
  for (std::size_t w = 0; w < out.size(); ++w)
    out[w] = (1.0 - alpha) * prior[w] + alpha * nu[w];
  return Posterior(std::move(out));
}

/// Receiver's action at Bayesian posterior nu under bias alpha, restricted to
/// `allowed`. Maximizes expected receiver utility at the distorted belief;
/// within kTolTie of the best, prefers the action with the highest expected
/// sender utility at nu; remaining ties go to the lowest action index.
inline int best_response(const Posterior& nu, double alpha, const Instance& inst,
                         std::span<const int> allowed = {}) {
  std::vector<int> all;
  if (allowed.empty()) {
    all.resize(inst.n_actions());
    for (int a = 0; a < inst.n_actions(); ++a) all[a] = a;
    allowed = all;
  }
  const Posterior hat = distort(nu, inst.prior, alpha);
  double best_r = -kInf;
  for (int a : allowed) best_r = std::max(best_r, dot(hat.probs, inst.u_receiver[a]));
  double best_s = -kInf;
  for (int a : allowed) {
    if (dot(hat.probs, inst.u_receiver[a]) < best_r - kTolTie) continue;
    best_s = std::max(best_s, dot(nu.probs, inst.u_sender[a]));
  }
  for (int a : allowed) {
    if (dot(hat.probs, inst.u_receiver[a]) < best_r - kTolTie) continue;
    if (dot(nu.probs, inst.u_sender[a]) >= best_s - kTolTie) return a;
  }
  return -1;  // unreachable for nonempty allowed
}

/// The unique receiver-optimal action at the prior. Throws NonUniqueDefault
/// when two actions are within kTolTie of the prior optimum.
inline int default_action(const Instance& inst) {
  int best = 0;
  double bv = dot(inst.prior, inst.u_receiver[0]);
  for (int a = 1; a < inst.n_actions(); ++a) {
    const double v = dot(inst.prior, inst.u_receiver[a]);
    if (v > bv) {
      best = a;
      bv = v;
    }
  }
  for (int a = 0; a < inst.n_actions(); ++a) {
    if (a == best) continue;
    if (dot(inst.prior, inst.u_receiver[a]) >= bv - kTolTie)
      throw NonUniqueDefault("prior-optimal receiver action is not unique");
  }
  return best;
}

/// Sender's reduced-form expected utility at Bayesian posterior nu.
inline double sender_value(const Posterior& nu, double alpha, const Instance& inst,
                           std::span<const int> allowed = {}) {
  return dot(nu.probs, inst.u_sender[best_response(nu, alpha, inst, allowed)]);
}

/// Expected sender value of a posterior-form scheme under bias alpha.
inline double scheme_value(const Scheme& s, double alpha, const Instance& inst,
                           std::span<const int> allowed = {}) {
  double v = 0.0;
  for (const auto& atom : s.atoms)
    v += atom.weight * sender_value(atom.posterior, alpha, inst, allowed);
  return v;
}

/// Receiver's expected utility (measured at true posteriors) of a scheme.
inline double receiver_welfare(const Scheme& s, double alpha, const Instance& inst,
                               std::span<const int> allowed = {}) {
  double v = 0.0;
  for (const auto& atom : s.atoms) {
    const int a = best_response(atom.posterior, alpha, inst, allowed);
    v += atom.weight * dot(atom.posterior.probs, inst.u_receiver[a]);
  }
  return v;
}

}  // namespace persuasion::receiver
