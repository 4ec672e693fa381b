#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "persuasion/core.hpp"
#include "persuasion/io.hpp"
#include "persuasion/receiver.hpp"

using namespace persuasion;

TEST_CASE("validate_instance accepts well-formed input") {
  const Instance inst = validate_instance(
      {"w0", "w1"}, {"a0", "a1"}, {0.5, 0.5},
      {{0.0, 0.0}, {1.0, 1.0}}, {{0.0, 0.0}, {-0.6, 0.4}});
  CHECK(inst.n_states() == 2);
  CHECK(inst.n_actions() == 2);
  CHECK(inst.u_max == 1.0);
}

TEST_CASE("validate_instance checks the simplex and dimensions") {
  CHECK_NOTHROW(validate_instance({"a", "b", "c"}, {"x", "y"},
                                  {0.50, 0.27, 0.23},
                                  {{0, 0, 0}, {1, 1, 1}},
                                  {{0, 0, 0}, {-2.1, 0.3, 0.9}}));
  CHECK_THROWS_AS(validate_instance({"a", "b"}, {"x", "y"}, {0.6, 0.5},
                                    {{0, 0}, {1, 1}}, {{0, 0}, {0, 1}}),
                  NonSimplexPrior);
  CHECK_THROWS_AS(validate_instance({"a", "b"}, {"x", "y"}, {1.0, 0.0},
                                    {{0, 0}, {1, 1}}, {{0, 0}, {0, 1}}),
                  ZeroMassState);
  CHECK_THROWS_AS(validate_instance({"a", "b"}, {"x", "y"}, {0.5, 0.5},
                                    {{0, 0, 0}, {1, 1, 1}}, {{0, 0}, {0, 1}}),
                  DimensionMismatch);
}

TEST_CASE("fig-2-style instance validates") {
  const Instance inst = fixtures::three_state();
  CHECK(inst.prior[0] == 0.50);
  CHECK(inst.n_actions() == 3);
}

TEST_CASE("binary_as_general switches actions exactly at the distorted cutoff") {
  const BinaryInstance b(0.25, 0.60);
  const Instance inst = binary_as_general(b);
  // The receiver takes action 1 iff (1-alpha) mu0 + alpha nu >= q_hat, for
  // all (nu, alpha) on a grid.
  for (int ia = 1; ia <= 20; ++ia) {
    const double alpha = ia / 20.0;
    for (int iv = 0; iv <= 10000; iv += 7) {
      const double nu = iv / 10000.0;
      const double distorted = (1.0 - alpha) * b.mu0 + alpha * nu;
      const int want = distorted >= b.q_hat - kTolTie ? 1 : 0;
      const int got =
          receiver::best_response(Posterior(Vec{1.0 - nu, nu}), alpha, inst);
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("binary_as_general default action at the prior is 0") {
  const Instance inst = binary_as_general(BinaryInstance(0.25, 0.60));
  CHECK(receiver::default_action(inst) == 0);
}

TEST_CASE("binary instance invariant excludes the degenerate cutoff") {
  CHECK_THROWS_AS(BinaryInstance(0.25, 0.25), Error);
  CHECK_THROWS_AS(BinaryInstance(0.25, 1.0), Error);
}

TEST_CASE("scheme plausibility accounting") {
  Scheme s;
  s.atoms.push_back({0.5, Posterior(Vec{1.0, 0.0}), 0});
  s.atoms.push_back({0.5, Posterior(Vec{0.0, 1.0}), 1});
  const Vec prior{0.5, 0.5};
  CHECK(s.bayes_residual(prior) == 0.0);
  CHECK(s.bayes_plausible(prior));
  s.atoms[0].weight = 0.6;
  CHECK_FALSE(s.bayes_plausible(prior));
}

TEST_CASE("instance json round trip") {
  nlohmann::json j = {
      {"states", {"w0", "w1"}},
      {"actions", {"pass", "act"}},
      {"prior", {0.75, 0.25}},
      {"u_sender", {{0.0, 0.0}, {1.0, 1.0}}},
      {"u_receiver", {{0.0, 0.0}, {-0.6, 0.4}}}};
  const Instance inst = io::instance_from_json(j);
  CHECK(inst.actions[1] == "act");
  CHECK(inst.prior[1] == 0.25);

  nlohmann::json shorthand = {{"binary", {{"mu0", 0.25}, {"q_hat", 0.60}}}};
  const Instance binst = io::instance_from_json(shorthand);
  CHECK(binst.n_states() == 2);
  CHECK(binst.prior[1] == 0.25);
}

TEST_CASE("fixture files load") {
  const Instance fig = io::load_instance(
      std::string(PERSUASION_FIXTURES_DIR) + "/fig2.json");
  CHECK(fig.n_states() == 3);
  const Instance bin = io::load_instance(
      std::string(PERSUASION_FIXTURES_DIR) + "/binary.json");
  CHECK(bin.n_states() == 2);
}
