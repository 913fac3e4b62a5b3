#include "parskit/analyzer.hpp"

#include "parskit/corpus.hpp"
#include "parskit/prob.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <random>

using namespace parskit;

namespace {

Pars loop_a() { return builtin("loop_a").system.value(); }
Pars coin_b() { return builtin("coin_b").system.value(); }
Pars hindley() { return builtin("hindley_c").system.value(); }

Pars two_sink_fork() {
  return Pars(SystemKind::probabilistic, {"a", "b", "s"},
              {{"s", "a", Rat(1, 2)}, {"s", "b", Rat(1, 2)}});
}

bool replay_cycle(const Pars& system, const Witness& witness) {
  if (witness.kind != "cycle" || witness.states.size() < 2) return false;
  if (witness.states.front() != witness.states.back()) return false;
  Rat p = path_probability(system, witness.states);  // throws if not a rule path
  return p > 0;
}

}  // namespace

TEST_CASE("star closure") {
  Pars system = loop_a();
  Reachability closure = star_closure(system);
  CHECK(closure.reaches(system.index_of("0"), system.index_of("1")));
  CHECK(closure.reaches(system.index_of("1"), system.index_of("1")));
  CHECK(closure.reaches(system.index_of("0"), system.index_of("0")));
  CHECK_FALSE(closure.reaches(system.index_of("1"), system.index_of("0")));

  Pars empty(SystemKind::probabilistic, {"x", "y"}, {});
  Reachability identity = star_closure(empty);
  CHECK(identity.reaches(0, 0));
  CHECK(identity.reaches(1, 1));
  CHECK_FALSE(identity.reaches(0, 1));

  Pars h = hindley();
  CHECK(star_closure(h).reaches(h.index_of("0"), h.index_of("b")));
}

TEST_CASE("termination detects cycles with replayable witnesses") {
  Decision coin = check_termination(coin_b());
  CHECK(coin.verdict == Verdict::no);
  REQUIRE(coin.witness);
  CHECK(coin.witness->states == std::vector<StateId>{"1", "1"});
  CHECK(replay_cycle(coin_b(), *coin.witness));

  Pars chain(SystemKind::probabilistic, {"0", "1", "2"}, {{"0", "1", 1}, {"1", "2", 1}});
  CHECK(check_termination(chain).verdict == Verdict::yes);

  Decision h = check_termination(hindley());
  CHECK(h.verdict == Verdict::no);
  REQUIRE(h.witness);
  CHECK(h.witness->states == std::vector<StateId>{"0", "1", "0"});
  CHECK(replay_cycle(hindley(), *h.witness));
}

TEST_CASE("normalization") {
  Decision loop = check_normalizing(loop_a());
  CHECK(loop.verdict == Verdict::no);
  REQUIRE(loop.witness);
  CHECK(loop.witness->states == std::vector<StateId>{"0"});

  CHECK(check_normalizing(coin_b()).verdict == Verdict::yes);
  CHECK(check_normalizing(Pars(SystemKind::probabilistic, {"t"}, {})).verdict == Verdict::yes);
}

TEST_CASE("local confluence") {
  CHECK(check_local_confluence(hindley()).verdict == Verdict::yes);
  CHECK(check_local_confluence(loop_a()).verdict == Verdict::yes);

  Decision fork = check_local_confluence(two_sink_fork());
  CHECK(fork.verdict == Verdict::no);
  REQUIRE(fork.witness);
  CHECK(fork.witness->states == std::vector<StateId>{"s", "a", "b"});
}

TEST_CASE("confluence") {
  Decision h = check_confluence(hindley());
  CHECK(h.verdict == Verdict::no);
  REQUIRE(h.witness);
  CHECK(h.witness->states == std::vector<StateId>{"0", "a", "b"});
  // witness replays: both branch states are reachable from the apex and
  // their forward cones are disjoint
  Reachability closure = star_closure(hindley());
  Pars sys = hindley();
  CHECK(closure.reaches(sys.index_of("0"), sys.index_of("a")));
  CHECK(closure.reaches(sys.index_of("0"), sys.index_of("b")));
  CHECK_FALSE(closure.join_exists(sys.index_of("a"), sys.index_of("b")));

  CHECK(check_confluence(coin_b()).verdict == Verdict::yes);
  CHECK(check_confluence(Pars(SystemKind::probabilistic, {"s"}, {})).verdict == Verdict::yes);
}

TEST_CASE("normal form map") {
  auto forms = nf_map(hindley());
  CHECK(forms.at("0") == std::set<StateId>{"a", "b"});
  CHECK(forms.at("a") == std::set<StateId>{"a"});
  CHECK(nf_map(loop_a()).at("0").empty());
}

TEST_CASE("unique normal forms") {
  CHECK(check_unique_nf(coin_b()).verdict == Verdict::yes);

  Decision h = check_unique_nf(hindley());
  CHECK(h.verdict == Verdict::no);
  REQUIRE(h.witness);
  CHECK(h.witness->states == std::vector<StateId>{"0", "a", "b"});

  CHECK(check_unique_nf(Pars(SystemKind::probabilistic, {"x", "y"}, {})).verdict == Verdict::yes);
}

TEST_CASE("convertibility classes") {
  auto classes = convertibility_classes(hindley());
  REQUIRE(classes.size() == 1);
  CHECK(classes[0] == std::vector<StateId>{"0", "1", "a", "b"});

  Pars chains(SystemKind::probabilistic, {"0", "1", "x", "y"}, {{"0", "1", 1}, {"x", "y", 1}});
  CHECK(convertibility_classes(chains).size() == 2);

  auto pruned = convertibility_classes(herman_pruned());
  REQUIRE(pruned.size() == 2);
  CHECK(pruned[0] == std::vector<StateId>{"[000]", "[011]", "[101]", "[110]"});
  CHECK(pruned[1] == std::vector<StateId>{"[001]", "[010]", "[100]", "[111]"});
}

TEST_CASE("checkers refuse windows with a frontier") {
  ExploredSystem window = explore(random_walk_generated(), 4);
  for (const Decision& d : {check_termination(window), check_normalizing(window),
                            check_local_confluence(window), check_confluence(window),
                            check_unique_nf(window)}) {
    CHECK(d.verdict == Verdict::unknown);
    REQUIRE(d.witness);
    CHECK(d.witness->kind == "frontier");
    CHECK(d.witness->states == std::vector<StateId>{"4"});
  }
  ExploredSystem complete = explore(GeneratedPars::from_pars(coin_b()), 10);
  CHECK(check_confluence(complete).verdict == Verdict::yes);
}

TEST_CASE("Newman cross-check on random terminating systems") {
  std::mt19937_64 rng(11);
  int terminating_seen = 0;
  for (int i = 0; i < 200; ++i) {
    Pars system = testutil::random_system(rng);
    REQUIRE(validate(system).ok());
    if (check_termination(system).verdict != Verdict::yes) continue;
    ++terminating_seen;
    CHECK(check_local_confluence(system).verdict == check_confluence(system).verdict);
  }
  CHECK(terminating_seen > 20);
}

TEST_CASE("under normalization, confluence coincides with unique normal forms") {
  std::mt19937_64 rng(12);
  int normalizing_seen = 0;
  for (int i = 0; i < 200; ++i) {
    Pars system = testutil::random_system(rng);
    if (check_normalizing(system).verdict != Verdict::yes) continue;
    ++normalizing_seen;
    CHECK((check_confluence(system).verdict == Verdict::yes) ==
          (check_unique_nf(system).verdict == Verdict::yes));
  }
  CHECK(normalizing_seen > 20);
}

TEST_CASE("normal form sets shrink along reductions") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 60; ++i) {
    Pars system = testutil::random_system(rng, 8);
    auto forms = nf_map(system);
    for (const auto& rule : system.rules()) {
      const auto& from = forms.at(rule.from);
      for (const auto& t : forms.at(rule.to)) CHECK(from.count(t) == 1);
    }
  }
}
