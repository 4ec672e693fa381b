#pragma once

// Seeded interaction environment, full-information benchmark, regret
// accounting and multi-trial aggregation.

#include <utility>

#include "persuasion/binary.hpp"
#include "persuasion/core.hpp"
#include "persuasion/general.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/receiver.hpp"

namespace persuasion::sim {

/// Counter-based splittable generator: every draw is a hash of
/// (key, counter), so streams keyed by (seed, trial, stream id) never
/// collide and trials are reproducible under any thread schedule.
struct CounterRng {
  std::uint64_t key = 0;
  std::uint64_t ctr = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return {mix(mix(seed) ^ mix(0x5851f42d4c957f2dull * (stream_id + 1))), 0};
  }

  double uniform() {
    const std::uint64_t x = mix(key ^ mix(ctr++));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  /// Index sampled from an (unnormalized) nonnegative weight vector.
  int categorical(const Vec& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      u -= w[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }
};

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return CounterRng::mix(CounterRng::mix(master) ^ CounterRng::mix(index));
}

enum class RegretForm { Expected, Realized };

/// Cumulative regret path of one trial against the per-round benchmark.
struct RegretSeries {
  long long horizon = 0;
  Vec cumulative;  // length horizon
  double opt = 0.0;
};

/// Full-information one-round benchmark: the pointwise direct scheme LP at
/// the true bias, restricted to actions relevant there.
inline double benchmark_value(const Instance& inst, double alpha_star) {
  const BiasInterval point(alpha_star, alpha_star);
  return general::safe_scheme_lp_value(point, inst);
}

/// Interaction protocol of one trial: draws states from the prior, samples
/// the scheme atom conditionally on the state, and answers with the biased
/// receiver's action restricted to the actions relevant at the true bias.
class Environment {
 public:
  Environment(Instance inst, double alpha_star, std::uint64_t seed,
              long long horizon, RegretForm form = RegretForm::Expected,
              bool record_trace = false)
      : inst_(std::move(inst)),
        alpha_star_(receiver::Bias(alpha_star).alpha),
        state_rng_(CounterRng::stream(seed, 0)),
        signal_rng_(CounterRng::stream(seed, 1)),
        horizon_(horizon),
        form_(form),
        record_trace_(record_trace) {
    relevant_ = geometry::relevant_actions(BiasInterval(alpha_star_, alpha_star_),
                                           inst_);
    opt_ = benchmark_value(inst_, alpha_star_);
    cumulative_.reserve(static_cast<std::size_t>(horizon_));
  }

  long long rounds_left() const { return horizon_ - t_; }
  long long round() const { return t_; }
  double opt() const { return opt_; }
  const Instance& instance() const { return inst_; }
  double alpha_star() const { return alpha_star_; }
  const std::vector<int>& relevant() const { return relevant_; }
  const Trace& trace() const { return trace_; }
  int plausibility_failures() const { return plausibility_failures_; }
  double max_bayes_residual() const { return max_bayes_residual_; }
  long long schemes_seen() const { return schemes_seen_; }

  StepOutcome play(const Scheme& s) {
    if (t_ >= horizon_) throw Error("environment horizon exhausted");
    const std::uint64_t dig = s.digest();
    if (dig != cached_digest_) prepare(s, dig);

    const int state = state_rng_.categorical(inst_.prior);
    const int atom = signal_rng_.categorical(atom_weight_by_state_[state]);
    const int action = atom_action_[atom];
    StepOutcome out{state, atom, action, inst_.u_sender[action][state],
                    inst_.u_receiver[action][state]};
    const double regret = form_ == RegretForm::Expected
                              ? opt_ - cached_value_
                              : opt_ - out.u_sender;
    cumsum_ += regret;
    cumulative_.push_back(cumsum_);
    if (record_trace_)
      trace_.rounds.push_back({t_, dig, state, atom, action, out.u_sender,
                               out.u_receiver, opt_});
    ++t_;
    return out;
  }

  RegretSeries series() const {
    return RegretSeries{horizon_, cumulative_, opt_};
  }

  /// Expected sender value of a scheme under the true bias and the
  /// receiver's relevant-action restriction.
  double scheme_value(const Scheme& s) const {
    return receiver::scheme_value(s, alpha_star_, inst_, relevant_);
  }

 private:
  void prepare(const Scheme& s, std::uint64_t dig) {
    ++schemes_seen_;
    const double resid = s.bayes_residual(inst_.prior);
    max_bayes_residual_ = std::max(max_bayes_residual_, resid);
    if (resid > kTolBayes) ++plausibility_failures_;

    const int n = inst_.n_states();
    const int m = static_cast<int>(s.atoms.size());
    atom_action_.resize(m);
    atom_weight_by_state_.assign(n, Vec(m, 0.0));
    cached_value_ = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto& atom = s.atoms[i];
      atom_action_[i] =
          receiver::best_response(atom.posterior, alpha_star_, inst_, relevant_);
      cached_value_ +=
          atom.weight * dot(atom.posterior.probs, inst_.u_sender[atom_action_[i]]);
      // P(atom | state w) proportional to weight * posterior(w) / prior(w).
      for (int w = 0; w < n; ++w)
        atom_weight_by_state_[w][i] =
            std::max(0.0, atom.weight * atom.posterior[w] / inst_.prior[w]);
    }
    cached_digest_ = dig;
  }

  Instance inst_;
  double alpha_star_;
  std::vector<int> relevant_;
  CounterRng state_rng_, signal_rng_;
  long long horizon_;
  long long t_ = 0;
  RegretForm form_;
  bool record_trace_;
  double opt_ = 0.0;

  std::uint64_t cached_digest_ = 0;
  double cached_value_ = 0.0;
  std::vector<int> atom_action_;
  std::vector<Vec> atom_weight_by_state_;  // per state: weights over atoms

  Vec cumulative_;
  double cumsum_ = 0.0;
  Trace trace_;
  int plausibility_failures_ = 0;
  double max_bayes_residual_ = 0.0;
  long long schemes_seen_ = 0;
};

/// Environment for the joint unknown prior-and-bias protocol: the sender
/// only chooses the leakage m; the prior and bias stay hidden inside.
class SejEnvironment {
 public:
  SejEnvironment(double mu_star, double alpha_star, double q_hat,
                 std::uint64_t seed, long long horizon,
                 RegretForm form = RegretForm::Expected)
      : mu_(mu_star),
        alpha_(alpha_star),
        q_(q_hat),
        state_rng_(CounterRng::stream(seed, 0)),
        signal_rng_(CounterRng::stream(seed, 1)),
        horizon_(horizon),
        form_(form) {
    if (!(0.0 < mu_ && mu_ < 1.0 && 0.0 < q_ && q_ < 1.0))
      throw Error("sej environment parameters outside (0, 1)");
    if (mu_ >= q_) {
      opt_ = 1.0;  // the no-information scheme already persuades
    } else if (alpha_ < (q_ - mu_) / (1.0 - mu_)) {
      opt_ = 0.0;
    } else {
      opt_ = std::min(1.0, mu_ + (1.0 - mu_) * binary::m_star(alpha_, mu_, q_));
    }
    cumulative_.reserve(static_cast<std::size_t>(horizon_));
  }

  long long rounds_left() const { return horizon_ - t_; }
  double opt() const { return opt_; }
  double true_m_star() const {
    return binary::m_star(alpha_, mu_, q_);
  }

  binary::LeakOutcome play_leak(double m) {
    if (t_ >= horizon_) throw Error("environment horizon exhausted");
    m = std::clamp(m, 0.0, 1.0);
    const int state = state_rng_.uniform() < mu_ ? 1 : 0;
    const bool high = state == 1 ? true : signal_rng_.uniform() < m;
    int action = 0;
    double nu = 0.0;
    if (high) {
      nu = mu_ / (mu_ + (1.0 - mu_) * m);
      action = accepts(nu) ? 1 : 0;
    } else {
      action = accepts(0.0) ? 1 : 0;
    }
    double value;
    if (form_ == RegretForm::Expected) {
      const double p_high = mu_ + (1.0 - mu_) * m;
      const double nu_high = mu_ / p_high;
      value = p_high * (accepts(nu_high) ? 1.0 : 0.0) +
              (1.0 - p_high) * (accepts(0.0) ? 1.0 : 0.0);
    } else {
      value = action == 1 ? 1.0 : 0.0;
    }
    cumsum_ += opt_ - value;
    cumulative_.push_back(cumsum_);
    ++t_;
    return {high, action};
  }

  RegretSeries series() const { return RegretSeries{horizon_, cumulative_, opt_}; }

 private:
  bool accepts(double nu) const {
    return (1.0 - alpha_) * mu_ + alpha_ * nu >= q_ - kTolTie;
  }

  double mu_, alpha_, q_;
  CounterRng state_rng_, signal_rng_;
  long long horizon_;
  long long t_ = 0;
  RegretForm form_;
  double opt_ = 0.0;
  Vec cumulative_;
  double cumsum_ = 0.0;
};

enum class Algo { BS, SE, GSE, SEJ };

struct TrialResult {
  RegretSeries series;
  binary::Bracket final_interval{0.0, 1.0};
  std::vector<double> phase_lengths;
  std::vector<binary::Bracket> interval_updates;
  double committed_value = 0.0;
  int plausibility_failures = 0;
  double max_bayes_residual = 0.0;
};

/// Runs one seeded trial of a binary algorithm on its binary instance.
inline TrialResult run_trial_binary(Algo algo, long long T,
                                    const BinaryInstance& b, double alpha_star,
                                    std::uint64_t seed,
                                    RegretForm form = RegretForm::Expected) {
  Environment env(binary_as_general(b), alpha_star, seed, T, form);
  binary::RunResult r;
  if (algo == Algo::BS)
    r = binary::run_bs(T, b, env);
  else if (algo == Algo::SE)
    r = binary::run_se(T, b, env);
  else
    throw Error("run_trial_binary expects BS or SE");
  TrialResult out{env.series(), r.final_interval, r.phase_lengths,
                  r.interval_updates,
                  env.scheme_value(binary::two_point_scheme(r.committed_param, b)),
                  env.plausibility_failures(), env.max_bayes_residual()};
  return out;
}

/// Runs one seeded trial of the general algorithm.
inline TrialResult run_trial_gse(long long T, const Instance& inst,
                                 double alpha_star, std::uint64_t seed,
                                 RegretForm form = RegretForm::Expected) {
  Environment env(inst, alpha_star, seed, T, form);
  auto r = general::run_gse(T, inst, env);
  TrialResult out{env.series(),
                  {r.final_interval.lo, r.final_interval.hi},
                  r.phase_lengths,
                  {},
                  env.scheme_value(r.committed),
                  env.plausibility_failures(),
                  env.max_bayes_residual()};
  out.interval_updates.reserve(r.interval_updates.size());
  for (const auto& u : r.interval_updates)
    out.interval_updates.push_back({u.lo, u.hi});
  return out;
}

/// Runs one seeded trial of the joint unknown prior-and-bias scanner.
inline TrialResult run_trial_sej(long long T, double mu_star, double q_hat,
                                 double alpha_star, std::uint64_t seed,
                                 RegretForm form = RegretForm::Expected) {
  SejEnvironment env(mu_star, alpha_star, q_hat, seed, T, form);
  auto r = binary::run_sej(T, q_hat, env);
  const double m_hat = r.committed_param;
  const double p_high = mu_star + (1.0 - mu_star) * m_hat;
  const double nu_high = mu_star / p_high;
  const bool ok =
      (1.0 - alpha_star) * mu_star + alpha_star * nu_high >= q_hat - kTolTie;
  TrialResult out{env.series(), r.final_interval, r.phase_lengths,
                  r.interval_updates, p_high * (ok ? 1.0 : 0.0), 0, 0.0};
  return out;
}

/// Spec-facing entry point: (algo, T, instance, alpha*, seed) -> series.
inline RegretSeries run_trial(Algo algo, long long T, const Instance& inst,
                              double alpha_star, std::uint64_t seed,
                              RegretForm form = RegretForm::Expected) {
  if (algo == Algo::GSE) return run_trial_gse(T, inst, alpha_star, seed, form).series;
  throw Error("run_trial on a general instance supports GSE; use the binary overloads");
}

struct Aggregate {
  long long horizon = 0;
  Vec mean, ci_lo, ci_hi;
  std::size_t count = 0;
};

/// Streaming per-round mean and 95% normal-approximation CI.
class SeriesAccumulator {
 public:
  void add(const RegretSeries& s) {
    if (count_ == 0) {
      horizon_ = s.horizon;
      sum_.assign(s.cumulative.size(), 0.0);
      sumsq_.assign(s.cumulative.size(), 0.0);
    }
    if (s.horizon != horizon_ || s.cumulative.size() != sum_.size())
      throw MixedHorizons("aggregate requires equal horizons");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      sum_[i] += s.cumulative[i];
      sumsq_[i] += s.cumulative[i] * s.cumulative[i];
    }
    ++count_;
  }

  Aggregate finalize() const {
    Aggregate a;
    a.horizon = horizon_;
    a.count = count_;
    a.mean.resize(sum_.size());
    a.ci_lo.resize(sum_.size());
    a.ci_hi.resize(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      const double m = sum_[i] / static_cast<double>(count_);
      double half = 0.0;
      if (count_ > 1) {
        const double var = std::max(
            0.0, (sumsq_[i] - static_cast<double>(count_) * m * m) /
                     static_cast<double>(count_ - 1));
        half = 1.96 * std::sqrt(var / static_cast<double>(count_));
      }
      a.mean[i] = m;
      a.ci_lo[i] = m - half;
      a.ci_hi[i] = m + half;
    }
    return a;
  }

 private:
  long long horizon_ = 0;
  Vec sum_, sumsq_;
  std::size_t count_ = 0;
};

inline Aggregate aggregate(const std::vector<RegretSeries>& all) {
  if (all.empty()) throw MixedHorizons("aggregate of an empty series list");
  SeriesAccumulator acc;
  for (const auto& s : all) acc.add(s);
  return acc.finalize();
}

}  // namespace persuasion::sim
