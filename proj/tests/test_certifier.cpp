#include "parskit/certifier.hpp"

#include "parskit/corpus.hpp"
#include "parskit/errors.hpp"
#include "parskit/prob.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <random>

using namespace parskit;

TEST_CASE("random walk ranking: every level drops by exactly 1/3") {
  ExploredSystem window = explore(random_walk_generated(), 100);
  LyapunovCertificate certificate = builtin("random_walk").certificate.value();
  MarginReport report = check_lyapunov(window, certificate);

  CHECK(report.verdict == CertVerdict::evidence);  // bounded coverage only
  CHECK(report.coverage == Coverage::bounded);
  CHECK(report.states_checked == 100);  // levels 0..99; the frontier level is not checkable
  for (const auto& [s, margin] : report.margins) CHECK(margin == Rat(1, 3));
  auto [state, margin] = min_margin(report);
  CHECK(state == "0");
  CHECK(margin == Rat(1, 3));
}

TEST_CASE("the truncated walk is certified in full") {
  Pars walk = random_walk(50);
  LyapunovCertificate certificate = builtin("random_walk").certificate.value();
  MarginReport report = check_lyapunov(walk, certificate);
  CHECK(report.verdict == CertVerdict::proven);
  CHECK(report.coverage == Coverage::full);
  // the folded top edge drops by a full level: V(50) - V(49) = 1 >= 1/3
  CHECK(report.margins.at("50") == 1);
  CHECK(min_margin(report).second == Rat(1, 3));
  CHECK(check_as_termination(walk).verdict == Verdict::yes);
}

TEST_CASE("ring ranking margins") {
  Pars pruned = herman_pruned();
  LyapunovCertificate certificate = builtin("herman3_pruned").certificate.value();
  MarginReport report = check_lyapunov(pruned, certificate);

  CHECK(report.verdict == CertVerdict::proven);
  CHECK(report.states_checked == 6);

  // the two-token states all see successor expectation 19/2
  auto v = certificate.valuation;
  CHECK(report.margins.at("[110]") == v("[110]") - Rat(19, 2));
  CHECK(report.margins.at("[101]") == v("[101]") - Rat(19, 2));
  CHECK(report.margins.at("[011]") == v("[011]") - Rat(19, 2));
  CHECK(report.margins.at("[111]") == v("[111]") - Rat(19, 2));
  CHECK(report.margins.at("[110]") == Rat(3, 2));
  CHECK(report.margins.at("[101]") == Rat(7, 2));
  CHECK(report.margins.at("[011]") == Rat(9, 2));

  // the binding state is a single-token one
  auto [state, margin] = min_margin(report);
  CHECK(state == "[010]");
  CHECK(margin == Rat(1, 2));
  CHECK(margin >= report.epsilon);
}

TEST_CASE("ring valuation values are the derived ones") {
  auto v = builtin_valuation("herman");
  CHECK(v("[000]") == 0);
  CHECK(v("[100]") == 5);
  CHECK(v("[010]") == 6);
  CHECK(v("[001]") == 8);
  CHECK(v("[110]") == 11);
  CHECK(v("[101]") == 13);  // 8 + 5; the certificate only needs > 19/2
  CHECK(v("[011]") == 14);
  CHECK(v("[111]") == 19);
}

TEST_CASE("a constant valuation certifies nothing") {
  LyapunovCertificate flat = LyapunovCertificate::from_map(
      {{"0", Rat(1)}, {"1", Rat(1)}, {"a", Rat(1)}}, Rat(1, 10));
  MarginReport report = check_lyapunov(builtin("coin_b").system.value(), flat);
  CHECK(report.verdict == CertVerdict::refuted);
  CHECK(min_margin(report).second == 0);
}

TEST_CASE("certificate errors") {
  Pars coin = builtin("coin_b").system.value();
  LyapunovCertificate partial = LyapunovCertificate::from_map({{"0", Rat(1)}}, Rat(1, 2));
  CHECK_THROWS_WITH_AS(check_lyapunov(coin, partial), doctest::Contains("MissingValuation"),
                       PreconditionError);

  LyapunovCertificate bad_eps = LyapunovCertificate::from_map({{"0", Rat(1)}}, Rat(0));
  CHECK_THROWS_WITH_AS(check_lyapunov(coin, bad_eps), doctest::Contains("NonPositiveEpsilon"),
                       PreconditionError);

  MarginReport empty;
  CHECK_THROWS_WITH_AS(min_margin(empty), doctest::Contains("EmptyReport"), PreconditionError);

  LyapunovCertificate negative = LyapunovCertificate::from_map(
      {{"0", Rat(-1)}, {"1", Rat(5)}, {"a", Rat(1)}}, Rat(1, 10));
  CHECK(check_lyapunov(coin, negative).verdict == CertVerdict::refuted);
}

TEST_CASE("margins are invariant under summation order and scale with the certificate") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 25; ++i) {
    Pars system = testutil::random_system(rng, 8);
    std::map<StateId, Rat> values;
    for (const auto& s : system.states()) {
      values[s] = Rat(static_cast<long>(rng() % 40), 1 + static_cast<long>(rng() % 7));
    }
    LyapunovCertificate certificate = LyapunovCertificate::from_map(values, Rat(1, 5));
    MarginReport report = check_lyapunov(system, certificate);

    // reversed-order recomputation gives identical rationals
    for (const auto& [s, margin] : report.margins) {
      std::size_t index = system.index_of(s);
      Rat expectation = 0;
      const auto& out = system.out(index);
      for (auto it = out.rbegin(); it != out.rend(); ++it) {
        const Rule& rule = system.rules()[*it];
        expectation += rule.p * values.at(rule.to);
      }
      CHECK(values.at(s) - expectation == margin);
    }

    // scaling V and epsilon by the same positive rational preserves the verdict
    Rat scale(3, 2);
    std::map<StateId, Rat> scaled = values;
    for (auto& [s, v] : scaled) v *= scale;
    LyapunovCertificate scaled_certificate =
        LyapunovCertificate::from_map(scaled, certificate.epsilon * scale);
    CHECK(check_lyapunov(system, scaled_certificate).verdict == report.verdict);
  }
}

TEST_CASE("a full-coverage pass implies almost-sure termination") {
  // soundness hook on the finite corpus systems that ship certificates
  for (const char* name : {"herman3_pruned", "sec4_example"}) {
    CorpusEntry entry = builtin(name);
    MarginReport report = check_lyapunov(entry.system.value(), entry.certificate.value());
    CHECK(report.verdict == CertVerdict::proven);
    CHECK(check_as_termination(entry.system.value()).verdict == Verdict::yes);
  }
}
