#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "persuasion/binary.hpp"
#include "persuasion/general.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/sim.hpp"

using namespace persuasion;
using geometry::Endpoint;

namespace {

const BinaryInstance kB = fixtures::binary_quarter();
const Instance kBin = binary_as_general(kB);

// Environment stub whose receiver always lands on the default atom.
struct DefaultOnlyEnv {
  long long left;
  StepOutcome play(const Scheme& s) {
    --left;
    for (std::size_t i = 0; i < s.atoms.size(); ++i)
      if (s.atoms[i].rec_action == 0)
        return {0, static_cast<int>(i), 0, 0.0, 0.0};
    return {0, 0, 0, 0.0, 0.0};
  }
  long long rounds_left() const { return left; }
};

// Instance with a uniformly dominated alternative: every optimizer is
// supported on simplex corners, so no atom has a movable binding constraint.
Instance no_probe_instance() {
  return validate_instance(
      {"w0", "w1"}, {"keep", "drop"}, {0.5, 0.5},
      {{0.5, 0.5}, {0.5, 0.5}}, {{1.0, 1.0}, {0.0, 0.0}});
}

}  // namespace

TEST_CASE("threshold-test LP on the binary embedding") {
  const auto at_half = general::threshold_test_lp(0.5, kBin);
  REQUIRE(at_half.has_value());
  CHECK(at_half->objective ==
        Catch::Approx(0.25 / binary::nu_cutoff(0.5, kB)).margin(1e-9));
  // The informative atom sits exactly on the beta-cutoff.
  bool found = false;
  for (const auto& atom : at_half->scheme.atoms)
    if (atom.rec_action == 1) {
      found = true;
      CHECK(atom.posterior[1] ==
            Catch::Approx(binary::nu_cutoff(0.5, kB)).margin(1e-9));
    }
  CHECK(found);

  CHECK_FALSE(general::threshold_test_lp(0.40, kBin).has_value());

  // Feasible tests are informative with the guaranteed margin.
  const double bound = geometry::delta_mu0(kBin) / std::sqrt(2.0);
  for (int i = 0; i <= 10; ++i) {
    const double beta = 7.0 / 15.0 + 1e-6 + (1.0 - 7.0 / 15.0 - 1e-6) * i / 10.0;
    const auto t = general::threshold_test_lp(beta, kBin);
    REQUIRE(t.has_value());
    CHECK(t->objective >= bound - 1e-9);
  }
}

TEST_CASE("threshold test splits the interval by the receiver's reaction") {
  const BiasInterval J(7.0 / 15.0, 1.0);
  {
    sim::Environment env(kBin, 0.70, 555, 4000);
    const auto r = general::run_threshold_test(J, 0.55, env, 2000, kBin);
    REQUIRE(r.informative);
    CHECK(r.accepted);
    CHECK(r.interval.lo == Catch::Approx(0.55));
    CHECK(r.interval.hi == Catch::Approx(1.0));
  }
  {
    sim::Environment env(kBin, 0.70, 556, 4000);
    const auto r = general::run_threshold_test(J, 0.80, env, 2000, kBin);
    REQUIRE(r.informative);
    CHECK_FALSE(r.accepted);
    CHECK(r.interval.hi == Catch::Approx(0.80));
  }
  {
    DefaultOnlyEnv env{100};
    const auto r = general::run_threshold_test(J, 0.55, env, 50, kBin);
    CHECK_FALSE(r.informative);
    CHECK(r.interval.lo == Catch::Approx(J.lo));
    CHECK(r.interval.hi == Catch::Approx(J.hi));
  }
}

TEST_CASE("detectability threshold by bisection") {
  const auto amin = general::alpha_min_general(kBin);
  REQUIRE(amin.has_value());
  CHECK(*amin == Catch::Approx(7.0 / 15.0).margin(2e-6));

  // A dominated-alternative instance is untestable at every beta.
  CHECK_FALSE(general::alpha_min_general(no_probe_instance()).has_value());
}

TEST_CASE("localization shrinks the interval and keeps the bias") {
  const long long T = 22026;  // log T = 10, so the target width is 0.1
  sim::Environment env(kBin, 0.70, 808, T);
  const auto loc = general::localize(kBin, env, T);
  REQUIRE(loc.persuasion_feasible);
  CHECK(loc.interval.length() <= 0.1 + 1e-9);
  CHECK(loc.interval.contains(0.70, 1e-8));
  CHECK(loc.updates.size() <= 6);

  // Infeasible regime: the first test at alpha_min rejects.
  sim::Environment env2(kBin, 0.30, 809, T);
  const auto loc2 = general::localize(kBin, env2, T);
  CHECK_FALSE(loc2.persuasion_feasible);
}

TEST_CASE("vertex-safe scheme on the binary embedding") {
  const BiasInterval J(0.65, 0.75);
  const auto vs = general::vertex_safe_scheme(J, kBin);
  const double cut = binary::nu_cutoff(0.65, kB);

  REQUIRE(vs.atoms.size() == 2);
  const Scheme s = vs.to_scheme();
  CHECK(s.bayes_residual(kBin.prior) <= kTolBayes);
  CHECK(receiver::scheme_value(s, 0.70, kBin) ==
        Catch::Approx(0.25 / cut).margin(1e-9));

  REQUIRE(vs.informative_ids.size() == 1);
  const auto& info = vs.atoms[vs.informative_ids[0]];
  CHECK(info.second.vertex[1] == Catch::Approx(cut).margin(1e-9));
  REQUIRE(info.second.movable_binding.has_value());
  CHECK(info.second.movable_binding->endpoint == Endpoint::Lower);
  CHECK(vs.p_info == Catch::Approx(0.25 / cut).margin(1e-9));
}

TEST_CASE("singleton interval recovers the full-information optimum") {
  const BiasInterval J(0.70, 0.70);
  const auto vs = general::vertex_safe_scheme(J, kBin);
  CHECK(receiver::scheme_value(vs.to_scheme(), 0.70, kBin) ==
        Catch::Approx(1.0 / 3.0).margin(1e-9));

  const Instance fig = fixtures::three_state();
  const auto vf = general::vertex_safe_scheme(BiasInterval(0.85, 0.85), fig);
  CHECK(receiver::scheme_value(vf.to_scheme(), 0.85, fig,
                               geometry::relevant_actions(
                                   BiasInterval(0.85, 0.85), fig)) ==
        Catch::Approx(sim::benchmark_value(fig, 0.85)).margin(1e-7));
}

TEST_CASE("safe value approaches the optimum linearly in the interval width") {
  const double opt = sim::benchmark_value(kBin, 0.70);
  Vec ratios;
  for (double width : {0.1, 0.05, 0.025, 0.0125}) {
    const BiasInterval J(0.70 - width / 2, 0.70 + width / 2);
    const double safe = general::safe_scheme_lp_value(J, kBin);
    ratios.push_back((opt - safe) / width);
    CHECK(opt - safe >= -1e-9);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / std::max(*lo, 1e-12) <= 4.0);
}

TEST_CASE("probes move the informative atom to the probed cutoff") {
  const BiasInterval J(0.65, 0.75);
  const auto base = general::vertex_safe_scheme(J, kBin);

  // Zero move: pinning the constraint at its current value changes nothing.
  const auto same = general::build_probe(base, J.lo, J.hi, 0.0, J, kBin);
  REQUIRE(same.scheme.atoms.size() >= base.atoms.size());
  for (std::size_t i = 0; i < base.atoms.size(); ++i)
    for (int w = 0; w < 2; ++w)
      CHECK(same.scheme.atoms[i].posterior[w] ==
            Catch::Approx(base.atoms[i].second.vertex[w]).margin(1e-9));

  // m = 0.66 lands the probe atom on nu_B(0.66); the receiver follows the
  // recommendation exactly when alpha* >= m.
  const auto probe = general::build_probe(base, J.lo, J.hi, 0.01, J, kBin);
  REQUIRE(probe.probes.size() == 1);
  const auto& [idx, pr] = *probe.probes.begin();
  CHECK(pr.m == Catch::Approx(0.66).margin(1e-12));
  CHECK(probe.scheme.atoms[idx].posterior[1] ==
        Catch::Approx(binary::nu_cutoff(0.66, kB)).margin(1e-9));
  CHECK(probe.scheme.bayes_residual(kBin.prior) <= 1e-12);
  for (double alpha : {0.67, 0.70, 0.74}) {
    CHECK(receiver::best_response(probe.scheme.atoms[idx].posterior, alpha,
                                  kBin) == 1);
  }
  for (double alpha : {0.65, 0.655}) {
    CHECK(receiver::best_response(probe.scheme.atoms[idx].posterior, alpha,
                                  kBin) == 0);
  }
}

TEST_CASE("probe utility cost scales with informative mass and width") {
  Vec ratios;
  for (double width : {0.1, 0.05, 0.025, 0.0125}) {
    const BiasInterval J(0.70 - width / 2, 0.70 + width / 2);
    const auto base = general::vertex_safe_scheme(J, kBin);
    const double eta = width * width;
    const auto probe = general::build_probe(base, J.lo, J.hi, eta, J, kBin);
    const double vb = receiver::scheme_value(base.to_scheme(), 0.70, kBin);
    const double vp = receiver::scheme_value(probe.scheme, 0.70, kBin);
    ratios.push_back(std::abs(vb - vp) / (base.p_info * width));
  }
  for (double r : ratios) CHECK(r <= 10.0);
}

TEST_CASE("safe exploration narrows to the probing step") {
  const BiasInterval J(0.65, 0.75);
  sim::Environment env(kBin, 0.70, 606, 100000);
  const auto res = general::safe_explore(J, kBin, env);
  REQUIRE(res.completed);
  CHECK_FALSE(res.early_stop);
  CHECK(res.interval.length() <= 0.01 + 1e-12);
  CHECK(res.interval.contains(0.70, 1e-8));
}

TEST_CASE("safe exploration stops early without informative atoms") {
  const Instance inst = no_probe_instance();
  const BiasInterval J(0.5, 0.6);
  sim::Environment env(inst, 0.55, 607, 1000);
  const auto res = general::safe_explore(J, inst, env);
  CHECK(res.early_stop);
  CHECK(res.interval.lo == J.lo);
  CHECK(res.interval.hi == J.hi);
  CHECK(env.round() == 0);  // no rounds spent
}

TEST_CASE("general safe exploration on the binary embedding") {
  const long long T = 20000;
  sim::Environment env(kBin, 0.70, 1001, T);
  const auto res = general::run_gse(T, kBin, env);
  REQUIRE(res.persuasion_feasible);
  CHECK(res.final_interval.contains(0.70, 1e-8));
  CHECK(env.plausibility_failures() == 0);

  // Committed scheme is the two-point scheme at the final lower endpoint.
  const double v_commit = env.scheme_value(res.committed);
  const double v_two_point =
      env.scheme_value(binary::two_point_scheme(res.final_interval.lo, kB));
  CHECK(v_commit == Catch::Approx(v_two_point).margin(1e-6));

  // Quadratic phase shrinkage, including the post-localization interval.
  for (std::size_t r = 0; r + 1 < res.phase_lengths.size(); ++r)
    CHECK(res.phase_lengths[r + 1] <=
          res.phase_lengths[r] * res.phase_lengths[r] + 1e-12);

  // Every interval update keeps the true bias (up to the tie zone).
  for (const auto& J : res.interval_updates) {
    CHECK(J.lo <= 0.70 + 1e-8);
    CHECK(J.hi >= 0.70 - 1e-8);
  }

  const double regret = env.series().cumulative.back();
  CHECK(regret >= -1e-9);
  CHECK(regret < 50.0);
}

TEST_CASE("general safe exploration opens the middle action at high bias") {
  const Instance fig = fixtures::three_state();
  const long long T = 4096;
  sim::Environment env(fig, 0.85, 2024, T);
  const auto res = general::run_gse(T, fig, env);
  REQUIRE(res.persuasion_feasible);
  CHECK(res.final_interval.contains(0.85, 1e-8));
  CHECK(env.plausibility_failures() == 0);

  // Once localized near 0.85 the middle action is relevant again.
  const auto rel = geometry::relevant_actions(res.final_interval, fig);
  CHECK(std::find(rel.begin(), rel.end(), 1) != rel.end());

  // The sender leans on a1 whenever it improves the value; with u_S(a1) = 1
  // dominating, the committed scheme must use it.
  double a1_mass = 0.0;
  for (const auto& atom : res.committed.atoms)
    if (atom.rec_action == 1) a1_mass += atom.weight;
  CHECK(a1_mass > 0.0);

  for (std::size_t r = 0; r + 1 < res.phase_lengths.size(); ++r)
    CHECK(res.phase_lengths[r + 1] <=
          res.phase_lengths[r] * res.phase_lengths[r] + 1e-12);
}

TEST_CASE("general safe exploration detects the infeasible regime") {
  const long long T = 4096;
  sim::Environment env(kBin, 0.30, 3333, T);
  const auto res = general::run_gse(T, kBin, env);
  CHECK_FALSE(res.persuasion_feasible);
  // The no-persuasion scheme has zero regret against the zero benchmark.
  CHECK(env.series().cumulative.back() == Catch::Approx(0.0).margin(1e-9));
}
