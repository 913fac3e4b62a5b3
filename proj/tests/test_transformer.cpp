#include "parskit/transformer.hpp"

#include "parskit/certifier.hpp"
#include "parskit/corpus.hpp"
#include "parskit/errors.hpp"
#include "parskit/prob.hpp"

#include <doctest.h>

using namespace parskit;

namespace {

Decision yes_evidence() { return {Verdict::yes, std::nullopt, "test evidence"}; }
Decision no_evidence() { return {Verdict::unknown, std::nullopt, "none"}; }

}  // namespace

TEST_CASE("loop-into-sink example satisfies C1-C5 and concludes convergence") {
  for (const Rat& p : {Rat(1, 4), Rat(1, 2), Rat(3, 4)}) {
    TransformMapping mapping = looping_coin_mapping(p);
    ConditionReport report = check_conditions(mapping);
    CHECK(report.mode == TransformMode::C);
    REQUIRE(report.conditions.size() == 5);
    CHECK(report.all_yes());

    MarginReport margins = check_lyapunov(mapping.source, looping_coin_certificate(p));
    CHECK(margins.verdict == CertVerdict::proven);
    CHECK(min_margin(margins).second == 1 - p);

    Decision evidence{Verdict::yes, std::nullopt, "ranking certificate"};
    CHECK(conclude(report, evidence).conclusion == Conclusion::source_as_convergent);
    CHECK(conclude(report, no_evidence()).conclusion == Conclusion::source_confluent);
  }
}

TEST_CASE("random walk truncations satisfy C1'-C5'") {
  for (int truncation : {2, 5, 25, 100}) {
    TransformMapping mapping = random_walk_mapping(truncation);
    ConditionReport report = check_conditions(mapping);
    CHECK(report.all_yes());
    CHECK(report.target_confluence.verdict == Verdict::yes);
    CHECK(conclude(report, yes_evidence()).conclusion == Conclusion::source_as_convergent);
  }
}

TEST_CASE("ring quotient mapping passes C1'-C5' and both conclusion routes agree") {
  TransformMapping mapping = herman_mapping();
  ConditionReport report = check_conditions(mapping);
  CHECK(report.all_yes());

  MarginReport margins = check_lyapunov(mapping.source, builtin("herman3_pruned").certificate.value());
  CHECK(margins.verdict == CertVerdict::proven);
  Decision evidence{Verdict::yes, std::nullopt, "ranking certificate"};
  CHECK(conclude(report, evidence).conclusion == Conclusion::source_as_convergent);

  // direct route on the finite system
  CHECK(check_as_convergence(mapping.source).verdict == Verdict::yes);
}

TEST_CASE("a non-confluent target flips the biconditional conclusion") {
  // shuttle between two sinks, collapsed onto a two-sink fork
  TransformMapping mapping;
  mapping.source = builtin("hindley_c").system.value();
  mapping.target = Pars(SystemKind::plain, {"s", "x", "y"}, {{"s", "x", 1}, {"s", "y", 1}});
  mapping.g = {{"0", "s"}, {"1", "s"}, {"a", "x"}, {"b", "y"}};
  mapping.mode = TransformMode::Cprime;

  ConditionReport report = check_conditions(mapping);
  CHECK(report.all_yes());
  CHECK(report.target_confluence.verdict == Verdict::no);
  CHECK(conclude(report, yes_evidence()).conclusion == Conclusion::source_not_as_convergent);
  CHECK(conclude(report, no_evidence()).conclusion == Conclusion::source_not_confluent);
  // both transfers agree with the direct checkers
  CHECK(check_confluence(mapping.source).verdict == Verdict::no);
  CHECK(check_as_convergence(mapping.source).verdict == Verdict::no);
  CHECK(check_as_termination(mapping.source).verdict == Verdict::yes);

  // an uncovered extra sink instead breaks surjectivity and proves nothing
  TransformMapping uncovered = herman_mapping();
  std::vector<StateId> states = uncovered.target.states();
  states.push_back("[spare]");
  std::vector<Rule> rules = uncovered.target.rules();
  rules.push_back({"odd", "[spare]", 1});
  uncovered.target = Pars(SystemKind::plain, states, rules);
  ConditionReport uncovered_report = check_conditions(uncovered);
  CHECK(uncovered_report.conditions.at("C1'").verdict == Verdict::no);
  CHECK(conclude(uncovered_report, yes_evidence()).conclusion == Conclusion::inconclusive);
}

TEST_CASE("colliding normal forms fail C5 with the pair as witness") {
  TransformMapping mapping;
  mapping.source = Pars(SystemKind::probabilistic, {"s", "t", "u"},
                        {{"s", "t", Rat(1, 2)}, {"s", "u", Rat(1, 2)}});
  mapping.target = Pars(SystemKind::plain, {"x", "y"}, {{"x", "y", 1}});
  mapping.g = {{"s", "x"}, {"t", "y"}, {"u", "y"}};
  mapping.mode = TransformMode::C;

  ConditionReport report = check_conditions(mapping);
  const Decision& c5 = report.conditions.at("C5");
  CHECK(c5.verdict == Verdict::no);
  REQUIRE(c5.witness);
  CHECK(c5.witness->states == std::vector<StateId>{"t", "u", "y"});
  CHECK(conclude(report, yes_evidence()).conclusion == Conclusion::inconclusive);
}

TEST_CASE("C3 fails when a rule crosses target classes") {
  TransformMapping mapping;
  mapping.source = Pars(SystemKind::probabilistic, {"p", "q"}, {{"p", "q", 1}, {"q", "q", 1}});
  mapping.target = Pars(SystemKind::plain, {"x", "y"}, {});
  mapping.g = {{"p", "x"}, {"q", "y"}};
  mapping.mode = TransformMode::C;
  ConditionReport report = check_conditions(mapping);
  CHECK(report.conditions.at("C3").verdict == Verdict::no);
}

TEST_CASE("C3' refinement catches source states merged only in the target") {
  // two disjoint source chains mapped onto one target class
  TransformMapping mapping;
  mapping.source = Pars(SystemKind::probabilistic, {"a1", "a2", "b1", "b2"},
                        {{"a1", "a2", 1}, {"b1", "b2", 1}});
  mapping.target = Pars(SystemKind::plain, {"n", "m"}, {{"n", "m", 1}});
  mapping.g = {{"a1", "n"}, {"a2", "m"}, {"b1", "n"}, {"b2", "m"}};
  mapping.mode = TransformMode::Cprime;
  ConditionReport report = check_conditions(mapping);
  CHECK(report.conditions.at("C3'").verdict == Verdict::no);

  // the plain C3 direction alone is satisfied
  mapping.mode = TransformMode::C;
  CHECK(check_conditions(mapping).conditions.at("C3").verdict == Verdict::yes);
}

TEST_CASE("C4' requires preimages of target normal forms to be normal forms") {
  TransformMapping mapping;
  mapping.source = Pars(SystemKind::probabilistic, {"0", "a"}, {{"0", "a", 1}});
  mapping.target = Pars(SystemKind::plain, {"x"}, {});
  mapping.g = {{"0", "x"}, {"a", "x"}};
  mapping.mode = TransformMode::Cprime;
  ConditionReport report = check_conditions(mapping);
  CHECK(report.conditions.at("C4'").verdict == Verdict::no);
  // ... and C5' would also collide if C4' were ignored; the named failure wins
  CHECK(conclude(report, yes_evidence()).reason == "condition C4' failed");
}

TEST_CASE("if the primed conditions hold, the unprimed ones do too") {
  for (const TransformMapping& mapping : {random_walk_mapping(10), herman_mapping()}) {
    ConditionReport primed = check_conditions(mapping);
    REQUIRE(primed.all_yes());
    TransformMapping unprimed = mapping;
    unprimed.mode = TransformMode::C;
    CHECK(check_conditions(unprimed).all_yes());
  }
}

TEST_CASE("conclusions agree with the direct checkers on finite systems") {
  for (const TransformMapping& mapping :
       {looping_coin_mapping(Rat(1, 2)), random_walk_mapping(12), herman_mapping()}) {
    ConditionReport report = check_conditions(mapping);
    ConclusionReport conclusion = conclude(report, no_evidence());
    Decision direct = check_confluence(mapping.source);
    if (conclusion.conclusion == Conclusion::source_confluent) {
      CHECK(direct.verdict == Verdict::yes);
    } else if (conclusion.conclusion == Conclusion::source_not_confluent) {
      CHECK(direct.verdict == Verdict::no);
    }
    ConclusionReport convergent = conclude(report, yes_evidence());
    if (convergent.conclusion == Conclusion::source_as_convergent) {
      CHECK(check_as_convergence(mapping.source).verdict == Verdict::yes);
    }
  }
}

TEST_CASE("mapping guards") {
  TransformMapping partial = looping_coin_mapping(Rat(1, 2));
  partial.g.erase("a");
  CHECK_THROWS_WITH_AS(check_conditions(partial), doctest::Contains("PartialMapping"),
                       PreconditionError);

  TransformMapping stray = looping_coin_mapping(Rat(1, 2));
  stray.g["a"] = "nowhere";
  CHECK_THROWS_WITH_AS(check_conditions(stray), doctest::Contains("PartialMapping"),
                       PreconditionError);

  ExploredSystem window = explore(random_walk_generated(), 6);
  CHECK_THROWS_WITH_AS(require_frontier_free(window), doctest::Contains("FrontierPresent"),
                       PreconditionError);
  ExploredSystem complete = explore(GeneratedPars::from_pars(random_walk(5)), 20);
  CHECK(require_frontier_free(complete).states() == random_walk(5).states());
}
