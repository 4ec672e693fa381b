#pragma once

// Shared instances used across the unit and acceptance suites.

#include "persuasion/core.hpp"
#include "persuasion/sim.hpp"

namespace fixtures {

using namespace persuasion;

inline BinaryInstance binary_quarter() { return BinaryInstance(0.25, 0.60); }

/// Three-state, three-action instance whose middle action's region is empty
/// at low bias and opens up at high bias. Sender prefers a1, then a2.
inline Instance three_state() {
  return validate_instance(
      {"e0", "e1", "e2"}, {"a0", "a1", "a2"}, {0.50, 0.27, 0.23},
      {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {0.4, 0.4, 0.4}},
      {{0.0, 0.0, 0.0}, {-2.1, 0.3, 0.9}, {-2.1, -0.3, 1.5}});
}

/// Two-state, three-action instance with action-only sender utility where a
/// bias-aware sender at alpha = 0.2 induces the middle action via the
/// posterior pair {0, 0.6}.
inline Instance welfare_example() {
  return validate_instance(
      {"w0", "w1"}, {"a1", "a2", "a3"}, {0.9, 0.1},
      {{0.0, 0.0}, {2.0, 2.0}, {10.0, 10.0}},
      {{0.0, 0.0}, {-1.0, 4.0}, {-51.0, 54.0}});
}

/// Deterministic random instances for property checks: full-support prior,
/// utilities in [-1, 1], unique default action.
inline Instance random_instance(std::uint64_t seed, int n = 3, int k = 3) {
  sim::CounterRng rng = sim::CounterRng::stream(seed, 7);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vec prior(n);
    double s = 0.0;
    for (auto& p : prior) {
      p = 0.05 + rng.uniform();
      s += p;
    }
    for (auto& p : prior) p /= s;
    Mat us(k, Vec(n)), ur(k, Vec(n));
    for (int a = 0; a < k; ++a)
      for (int w = 0; w < n; ++w) {
        us[a][w] = 2.0 * rng.uniform() - 1.0;
        ur[a][w] = 2.0 * rng.uniform() - 1.0;
      }
    std::vector<std::string> states, actions;
    for (int w = 0; w < n; ++w) states.push_back("s" + std::to_string(w));
    for (int a = 0; a < k; ++a) actions.push_back("a" + std::to_string(a));
    try {
      Instance inst = validate_instance(states, actions, prior, us, ur);
      receiver::default_action(inst);  // reject near-tied defaults
      return inst;
    } catch (const NonUniqueDefault&) {
      continue;
    }
  }
  throw Error("could not draw an instance with a unique default");
}

}  // namespace fixtures
