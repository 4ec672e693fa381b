#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "persuasion/binary.hpp"
#include "persuasion/oracle.hpp"
#include "persuasion/sim.hpp"

using namespace persuasion;

namespace {
const BinaryInstance kB = fixtures::binary_quarter();
}

TEST_CASE("uninformative scheme always realizes its only atom") {
  const Instance inst = binary_as_general(kB);
  sim::Environment env(inst, 0.70, 1, 500, sim::RegretForm::Expected, true);
  Scheme s;
  s.atoms.push_back({1.0, Posterior(inst.prior), 0});
  for (int i = 0; i < 500; ++i) {
    const auto out = env.play(s);
    REQUIRE(out.atom == 0);
    REQUIRE(out.action == 0);
  }
  CHECK(env.trace().rounds.size() == 500);
}

TEST_CASE("atom and state frequencies match the signal law") {
  const Instance inst = binary_as_general(kB);
  sim::Environment env(inst, 0.70, 99, 100000);
  const Scheme s = binary::two_point_scheme(0.70, kB);
  long long high = 0;
  long long state1 = 0;
  // Conditional counts for the signal law P(atom | state).
  long long n_state[2] = {0, 0};
  long long high_given_state[2] = {0, 0};
  for (int i = 0; i < 100000; ++i) {
    const auto out = env.play(s);
    high += out.atom == 1;
    state1 += out.state == 1;
    ++n_state[out.state];
    high_given_state[out.state] += out.atom == 1;
  }
  CHECK(std::abs(high / 1e5 - 1.0 / 3.0) < 0.01);
  CHECK(std::abs(state1 / 1e5 - 0.25) < 0.01);

  // P(high | w) = w_hi nu(w) / mu0(w), within 3 binomial sigmas.
  for (int w = 0; w < 2; ++w) {
    const double p = s.atoms[1].weight * s.atoms[1].posterior[w] / inst.prior[w];
    const double phat = static_cast<double>(high_given_state[w]) / n_state[w];
    const double sigma = std::sqrt(p * (1.0 - p) / n_state[w]);
    CHECK(std::abs(phat - p) <= 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("benchmark value closed forms") {
  const Instance inst = binary_as_general(kB);
  CHECK(sim::benchmark_value(inst, 0.70) == Catch::Approx(1.0 / 3.0).margin(1e-9));
  CHECK(sim::benchmark_value(inst, 1.0) == Catch::Approx(0.25 / 0.60).margin(1e-9));
  // Below the persuasion threshold the benchmark is the default value.
  CHECK(sim::benchmark_value(inst, 0.30) == Catch::Approx(0.0).margin(1e-12));

  const Instance fig = fixtures::three_state();
  for (double alpha : {0.55, 0.85}) {
    CHECK(sim::benchmark_value(fig, alpha) ==
          Catch::Approx(oracle::brute_opt_general(fig, alpha)).margin(1e-7));
  }
}

TEST_CASE("same seed reproduces the series bit for bit") {
  const auto a = sim::run_trial_binary(sim::Algo::SE, 5000, kB, 0.70, 314159);
  const auto b = sim::run_trial_binary(sim::Algo::SE, 5000, kB, 0.70, 314159);
  REQUIRE(a.series.cumulative.size() == b.series.cumulative.size());
  for (std::size_t i = 0; i < a.series.cumulative.size(); ++i)
    REQUIRE(a.series.cumulative[i] == b.series.cumulative[i]);
  CHECK(a.final_interval.lo == b.final_interval.lo);
}

TEST_CASE("zero horizon gives an empty series") {
  const auto r = sim::run_trial_binary(sim::Algo::SE, 0, kB, 0.70, 5);
  CHECK(r.series.cumulative.empty());
}

TEST_CASE("aggregation of series") {
  sim::RegretSeries one{3, {1.0, 2.0, 3.0}, 0.5};
  const auto single = sim::aggregate({one});
  CHECK(single.mean == one.cumulative);
  CHECK(single.ci_lo == one.cumulative);

  sim::RegretSeries c1{2, {1.0, 1.0}, 0.5};
  sim::RegretSeries c3{2, {3.0, 3.0}, 0.5};
  const auto two = sim::aggregate({c1, c3});
  CHECK(two.mean[0] == Catch::Approx(2.0));
  // Sample sd of {1, 3} is sqrt(2); the half-width is 1.96 sd / sqrt(2).
  CHECK(two.ci_hi[0] - two.mean[0] == Catch::Approx(1.96).margin(1e-12));

  sim::RegretSeries other{3, {1.0, 1.0, 1.0}, 0.5};
  CHECK_THROWS_AS(sim::aggregate({c1, other}), MixedHorizons);
}

TEST_CASE("mean expected regret stays nonnegative") {
  sim::SeriesAccumulator acc;
  const int seeds = 100;
  for (int i = 0; i < seeds; ++i)
    acc.add(sim::run_trial_binary(sim::Algo::SE, 2000, kB, 0.70,
                                  sim::trial_seed(21, i))
                .series);
  const auto agg = acc.finalize();
  for (std::size_t t = 0; t < agg.mean.size(); ++t)
    REQUIRE(agg.mean[t] >= agg.ci_lo[t] - 1e-9);
  CHECK(agg.mean.back() >= -(agg.ci_hi.back() - agg.mean.back()));
}

TEST_CASE("realized-form regret averages to the expected form") {
  const long long T = 20000;
  double realized = 0.0, expected = 0.0;
  for (int i = 0; i < 20; ++i) {
    realized += sim::run_trial_binary(sim::Algo::SE, T, kB, 0.70,
                                      sim::trial_seed(31, i),
                                      sim::RegretForm::Realized)
                    .series.cumulative.back();
    expected += sim::run_trial_binary(sim::Algo::SE, T, kB, 0.70,
                                      sim::trial_seed(31, i),
                                      sim::RegretForm::Expected)
                    .series.cumulative.back();
  }
  realized /= 20;
  expected /= 20;
  CHECK(std::abs(realized - expected) < 0.1 * T * 0.01 + 5.0);
}
