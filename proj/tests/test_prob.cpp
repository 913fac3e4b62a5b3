#include "parskit/prob.hpp"

#include "parskit/corpus.hpp"
#include "parskit/errors.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace parskit;

namespace {

Pars loop_a() { return builtin("loop_a").system.value(); }
Pars coin_b() { return builtin("coin_b").system.value(); }
Pars hindley() { return builtin("hindley_c").system.value(); }

Rat ladder_partial_product(std::size_t n) {
  Rat product = 1;
  Int p4 = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    p4 *= 4;
    product *= 1 - Rat(1, p4);
  }
  return product;
}

}  // namespace

TEST_CASE("path probability is the product of edge probabilities") {
  CHECK(path_probability(coin_b(), {"0", "1", "1", "a"}) == Rat(1, 4));
  CHECK(path_probability(coin_b(), {}) == 1);
  CHECK(path_probability(coin_b(), {"1"}) == 1);
  CHECK(path_probability(hindley(), {"0", "1", "0", "a"}) == Rat(1, 8));
  CHECK_THROWS_WITH_AS(path_probability(coin_b(), {"1", "0"}), doctest::Contains("NotAPath"),
                       PreconditionError);
}

TEST_CASE("unknown states are refused by name") {
  CHECK_THROWS_WITH_AS(pn_iterate(coin_b(), "zz", 3), doctest::Contains("UnknownState"),
                       PreconditionError);
  CHECK_THROWS_WITH_AS(monte_carlo(coin_b(), "zz", 10, 10, 1), doctest::Contains("UnknownState"),
                       PreconditionError);
  CHECK_THROWS_WITH_AS(reach_probability(coin_b(), "zz", "a"), doctest::Contains("UnknownState"),
                       PreconditionError);
}

TEST_CASE("step-indexed distribution") {
  SUBCASE("the loop system never settles") {
    PnState pn = pn_iterate(loop_a(), "0", 5);
    CHECK(pn.settled.empty());
    CHECK(pn.alive_total() == 1);
    CHECK(pn.alive == std::map<StateId, Rat>{{"1", Rat(1)}});
  }
  SUBCASE("normal form start settles immediately") {
    PnState pn = pn_iterate(coin_b(), "a", 7);
    CHECK(pn.settled == std::map<StateId, Rat>{{"a", Rat(1)}});
    CHECK(pn.alive.empty());
  }
  SUBCASE("explored ladder keeps the exact escape product alive") {
    ExploredSystem window = explore(ladder(false), 60);
    PnState pn = pn_iterate(window, "0", 50);
    Rat expected = ladder_partial_product(50);
    CHECK(pn.alive_total() == expected);
    CHECK(pn.alive == std::map<StateId, Rat>{{"50", expected}});
    CHECK(pn.settled_total() == 1 - expected);
    // matches the quoted numeric value
    CHECK(std::abs(to_double(expected) - 0.68854) < 1e-5);
  }
}

TEST_CASE("step distribution is conservative and monotone") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    Pars system = testutil::random_system(rng, 8);
    const StateId start = system.states().front();
    PnState previous = pn_iterate(system, start, 0);
    CHECK(previous.settled_total() + previous.alive_total() == 1);
    for (std::uint64_t n = 1; n <= 8; ++n) {
      PnState current = pn_iterate(system, start, n);
      CHECK(current.settled_total() + current.alive_total() == 1);
      CHECK(current.alive_total() <= previous.alive_total());
      for (const auto& [t, mass] : previous.settled) {
        CHECK(current.settled.at(t) >= mass);
      }
      previous = current;
    }
  }
}

TEST_CASE("absorption probabilities, frozen against path enumeration") {
  SUBCASE("hindley splits 2/3 : 1/3") {
    // independent oracle: literal paths to depth 30 plus a geometric tail
    testutil::PathEnumeration oracle = testutil::enumerate_paths(hindley(), "0", 30);
    CHECK(oracle.alive < Rat(1, 16384));  // alive mass halves every two steps
    CHECK(Rat(2, 3) - oracle.settled.at("a") < oracle.alive);
    CHECK(Rat(1, 3) - oracle.settled.at("b") < oracle.alive);

    auto reports = absorption_solve(hindley());
    CHECK(reports.at("0").reach == std::map<StateId, Rat>{{"a", Rat(2, 3)}, {"b", Rat(1, 3)}});
    CHECK(reports.at("0").divergence_exact() == 0);
    CHECK(reports.at("1").reach == std::map<StateId, Rat>{{"a", Rat(1, 3)}, {"b", Rat(2, 3)}});
  }
  SUBCASE("loop system diverges surely") {
    auto reports = absorption_solve(loop_a());
    CHECK(reports.at("0").reach.empty());
    CHECK(reports.at("0").divergence_exact() == 1);
  }
  SUBCASE("coin system settles surely") {
    auto reports = absorption_solve(coin_b());
    CHECK(reports.at("0").reach == std::map<StateId, Rat>{{"a", Rat(1)}});
    CHECK(reports.at("0").divergence_exact() == 0);
  }
}

TEST_CASE("reach probability guards its target") {
  CHECK_THROWS_WITH_AS(reach_probability(loop_a(), "0", "1"),
                       doctest::Contains("TargetNotNormalForm"), PreconditionError);
  CHECK(reach_probability(coin_b(), "0", "a") == 1);
  CHECK(reach_probability(hindley(), "0", "b") == Rat(1, 3));
  CHECK_THROWS_WITH_AS(reach_probability(hindley(), "a", "b"), doctest::Contains("TargetUnreachable"),
                       PreconditionError);
}

TEST_CASE("solve agrees with the step iteration up to the alive mass") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 30; ++i) {
    Pars system = testutil::random_system(rng, 8);
    auto reports = absorption_solve(system);
    for (const auto& start : system.states()) {
      PnState pn = pn_iterate(system, start, 24);
      Rat alive = pn.alive_total();
      for (const auto& [t, reach] : reports.at(start).reach) {
        Rat settled = pn.settled.count(t) ? pn.settled.at(t) : Rat(0);
        CHECK(settled <= reach);
        CHECK(reach - settled <= alive);
      }
    }
  }
}

TEST_CASE("divergence brackets") {
  SUBCASE("geometric-escape ladder: certified interval around the infinite product") {
    Interval bracket = divergence_bracket(ladder(false), "0", 80, 60);
    // high-precision reference: partial product to 200 with tail < 4^-200
    Rat reference = ladder_partial_product(200);
    CHECK(bracket.lo <= reference);
    CHECK(reference <= bracket.hi);
    CHECK(bracket.hi - bracket.lo < Rat(1, Int(1) << 66));  // width far below 1e-20
    CHECK(to_double(bracket.lo) > 0.68);
    CHECK(std::abs(to_double(bracket.lo) - 0.68854) < 1e-5);
  }
  SUBCASE("uniform ladder: divergence pinned to zero from below") {
    Interval bracket = divergence_bracket(ladder(true), "0", 80, 60);
    CHECK(bracket.lo == 0);
    CHECK(bracket.hi == Rat(1, Int(1) << 60));
  }
  SUBCASE("embedded finite system degenerates toward the exact value") {
    GeneratedPars wrapped = GeneratedPars::from_pars(loop_a());
    wrapped.roots = {"0"};
    Interval bracket = divergence_bracket(wrapped, "0", 10, 10);
    CHECK(bracket.lo == 1);  // trapped: no normal form anywhere
    CHECK(bracket.hi == 1);

    GeneratedPars coin = GeneratedPars::from_pars(coin_b());
    coin.roots = {"0"};
    Interval coin_bracket = divergence_bracket(coin, "0", 10, 40);
    CHECK(coin_bracket.lo == 0);
    CHECK(coin_bracket.hi == Rat(1, Int(1) << 39));  // alive mass after 40 steps
  }
}

TEST_CASE("single-path divergence bounds") {
  SUBCASE("ladder factors with the exact geometric tail") {
    std::vector<Rat> factors;
    Int p4 = 1;
    for (int i = 1; i <= 50; ++i) {
      p4 *= 4;
      factors.push_back(1 - Rat(1, p4));
    }
    Rat tail(1, 3 * p4);  // sum_{i>50} 4^-i
    Interval bounds = single_path_divergence_bounds(factors, 50, tail);
    CHECK(bounds.hi == ladder_partial_product(50));
    CHECK(bounds.lo == bounds.hi * (1 - tail));
    Rat width = bounds.hi - bounds.lo;
    CHECK(width < Rat(1, Int(1) << 67));  // < 1e-20
    Rat reference = ladder_partial_product(200);
    CHECK(bounds.lo <= reference);
    CHECK(reference <= bounds.hi);
  }
  SUBCASE("all-ones path") {
    Interval bounds = single_path_divergence_bounds({Rat(1), Rat(1), Rat(1)}, 3, Rat(0));
    CHECK(bounds.lo == 1);
    CHECK(bounds.hi == 1);
  }
  SUBCASE("unsummable complements give only the upper bound") {
    std::vector<Rat> halves(20, Rat(1, 2));
    Interval bounds = single_path_divergence_bounds(halves, 20, std::nullopt);
    CHECK(bounds.lo == 0);
    CHECK(bounds.hi == Rat(1, Int(1) << 20));
  }
  SUBCASE("rejects nonsense") {
    CHECK_THROWS_WITH_AS(single_path_divergence_bounds({Rat(1, 2)}, 1, Rat(1)),
                         doctest::Contains("TailBoundInvalid"), PreconditionError);
    CHECK_THROWS_WITH_AS(single_path_divergence_bounds({Rat(1, 2)}, 1, Rat(-1, 2)),
                         doctest::Contains("TailBoundInvalid"), PreconditionError);
    CHECK_THROWS_WITH_AS(single_path_divergence_bounds({Rat(3, 2)}, 1, Rat(0)),
                         doctest::Contains("InvalidFactor"), PreconditionError);
  }
}

TEST_CASE("almost-sure termination") {
  CHECK(check_as_termination(coin_b()).verdict == Verdict::yes);
  CHECK(check_as_termination(hindley()).verdict == Verdict::yes);
  Decision loop = check_as_termination(loop_a());
  CHECK(loop.verdict == Verdict::no);
  REQUIRE(loop.witness);
  CHECK(loop.witness->states == std::vector<StateId>{"0"});

  ExploredSystem window = explore(random_walk_generated(), 5);
  CHECK(check_as_termination(window).verdict == Verdict::unknown);
}

TEST_CASE("almost-sure local convergence") {
  CHECK(check_as_local_convergence(coin_b()).verdict == Verdict::yes);

  Decision h = check_as_local_convergence(hindley());
  CHECK(h.verdict == Verdict::no);
  REQUIRE(h.witness);
  CHECK(h.witness->states == std::vector<StateId>{"0", "1", "1"});
  CHECK(h.witness->detail == "reach(1) = {a: 1/3, b: 2/3}");

  Pars lone(SystemKind::probabilistic, {"t"}, {});
  CHECK(check_as_local_convergence(lone).verdict == Verdict::yes);
}

TEST_CASE("almost-sure convergence is the certified conjunction") {
  CHECK(check_as_convergence(coin_b()).verdict == Verdict::yes);

  Decision h = check_as_convergence(hindley());
  CHECK(h.verdict == Verdict::no);
  CHECK(h.note == "confluence fails");

  Decision loop = check_as_convergence(loop_a());
  CHECK(loop.verdict == Verdict::no);
  CHECK(loop.note == "almost-sure termination fails");
}

TEST_CASE("probabilistic normalization carries positive-probability evidence") {
  ProbNormalizingReport coin = check_prob_normalizing(coin_b());
  CHECK(coin.decision.verdict == Verdict::yes);
  CHECK(coin.evidence.front() == std::tuple<StateId, StateId, Rat>{"0", "a", Rat(1)});

  CHECK(check_prob_normalizing(loop_a()).decision.verdict == Verdict::no);

  Pars lone(SystemKind::probabilistic, {"t"}, {});
  ProbNormalizingReport isolated = check_prob_normalizing(lone);
  CHECK(isolated.decision.verdict == Verdict::yes);
  CHECK(isolated.evidence.front() == std::tuple<StateId, StateId, Rat>{"t", "t", Rat(1)});
}

TEST_CASE("Monte Carlo estimates track the exact solve") {
  MonteCarloReport mc = monte_carlo(hindley(), "0", 1000, 100000, 42);
  CHECK(mc.censored == 0);
  double sigma = std::sqrt((2.0 / 9.0) / 100000.0);
  CHECK(std::abs(mc.fraction("a") - 2.0 / 3.0) <= 3 * sigma);

  SUBCASE("bit-identical rerun") {
    MonteCarloReport again = monte_carlo(hindley(), "0", 1000, 100000, 42);
    CHECK(again.absorbed == mc.absorbed);
    CHECK(again.censored == mc.censored);
  }
  SUBCASE("normal form start") {
    MonteCarloReport fixed = monte_carlo(coin_b(), "a", 0, 1000, 7);
    CHECK(fixed.absorbed.at("a") == 1000);
    CHECK(fixed.censored == 0);
  }
  SUBCASE("step-censoring is reported, never attributed") {
    ExploredSystem window = explore(ladder(false), 300);
    MonteCarloReport censored = monte_carlo(window, "0", 200, 100000, 9);
    CHECK(censored.frontier_hits == 0);
    double fraction = static_cast<double>(censored.censored) / 100000.0;
    CHECK(std::abs(fraction - 0.6885) < 0.01);
    std::uint64_t total = censored.censored;
    for (const auto& [t, count] : censored.absorbed) total += count;
    CHECK(total == 100000);
  }
}
