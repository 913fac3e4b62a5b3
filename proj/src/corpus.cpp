#include "parskit/corpus.hpp"

#include "parskit/errors.hpp"

#include <algorithm>

namespace parskit {

namespace {

Rat half() { return Rat(1, 2); }

Int pow4(std::size_t e) {
  Int result = 1;
  for (std::size_t i = 0; i < e; ++i) result *= 4;
  return result;
}

long parse_level(const StateId& s) {
  try {
    std::size_t used = 0;
    long value = std::stol(s, &used);
    if (used != s.size() || value < 0) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    throw PreconditionError("UnknownState", "expected a nonnegative integer state, got \"" + s + "\"");
  }
}

Pars loop_a_system() {
  return Pars(SystemKind::probabilistic, {"0", "1"}, {{"0", "1", 1}, {"1", "1", 1}}, {"0"});
}

Pars coin_b_system() {
  return Pars(SystemKind::probabilistic, {"0", "1", "a"},
              {{"0", "1", 1}, {"1", "1", half()}, {"1", "a", half()}}, {"0"});
}

Pars hindley_c_system() {
  return Pars(SystemKind::probabilistic, {"0", "1", "a", "b"},
              {{"0", "1", half()}, {"0", "a", half()}, {"1", "0", half()}, {"1", "b", half()}},
              {"0"});
}

Pars herman_quotient_system() {
  return Pars(SystemKind::plain, {"[000]", "[100]", "even", "odd"},
              {{"even", "[000]", 1}, {"odd", "[100]", 1}});
}

Pars walk_quotient_system() {
  return Pars(SystemKind::plain, {"a", "number"}, {{"number", "a", 1}});
}

std::string ring_name(unsigned bits, int n) {
  std::string name = "[";
  for (int i = 0; i < n; ++i) name += ((bits >> i) & 1U) ? '1' : '0';
  name += "]";
  return name;
}

}  // namespace

Pars herman_ring(int n) {
  if (n < 1) throw PreconditionError("RingTooSmall", "a ring needs at least one process");
  if (n > 12) {
    throw PreconditionError("RingTooLarge",
                            "rings beyond 12 processes blow up as 2^n states; refused");
  }
  std::vector<StateId> states;
  std::vector<Rule> rules;
  for (unsigned bits = 0; bits < (1U << n); ++bits) {
    states.push_back(ring_name(bits, n));
    std::vector<int> holders;
    for (int i = 0; i < n; ++i) {
      if ((bits >> i) & 1U) holders.push_back(i);
    }
    if (holders.empty()) continue;  // stabilized: nothing moves

    // Every holder independently keeps or passes left; simultaneous keep +
    // arrival cancels both tokens, so the new bit is kept XOR received.
    std::map<unsigned, Rat> outcome;
    Rat each(1, Int(1) << holders.size());
    for (unsigned pass = 0; pass < (1U << holders.size()); ++pass) {
      std::vector<char> passes(n, 0);
      for (std::size_t h = 0; h < holders.size(); ++h) {
        passes[holders[h]] = (pass >> h) & 1U;
      }
      unsigned next = 0;
      for (int i = 0; i < n; ++i) {
        bool kept = ((bits >> i) & 1U) && !passes[i];
        int right = (i + 1) % n;
        bool received = ((bits >> right) & 1U) && passes[right];
        if (kept != received) next |= 1U << i;
      }
      outcome[next] += each;
    }
    for (const auto& [next, p] : outcome) {
      rules.push_back({ring_name(bits, n), ring_name(next, n), p});
    }
  }
  return Pars(SystemKind::probabilistic, std::move(states), std::move(rules));
}

Pars herman_pruned() {
  Pars full = herman_ring(3);
  std::vector<Rule> rules;
  for (const auto& rule : full.rules()) {
    if (rule.from == "[100]") continue;
    rules.push_back(rule);
  }
  return Pars(SystemKind::probabilistic, full.states(), std::move(rules));
}

Pars random_walk(int truncation) {
  if (truncation < 1) throw PreconditionError("BadTruncation", "truncation level must be >= 1");
  std::vector<StateId> states{"a"};
  std::vector<Rule> rules;
  Rat up(1, 3);
  Rat down(2, 3);
  for (int i = 0; i <= truncation; ++i) states.push_back(std::to_string(i));
  rules.push_back({"0", "a", down});
  rules.push_back({"0", "1", up});
  for (int i = 1; i < truncation; ++i) {
    rules.push_back({std::to_string(i), std::to_string(i - 1), down});
    rules.push_back({std::to_string(i), std::to_string(i + 1), up});
  }
  rules.push_back({std::to_string(truncation), std::to_string(truncation - 1), 1});
  return Pars(SystemKind::probabilistic, std::move(states), std::move(rules), {"0"});
}

GeneratedPars random_walk_generated() {
  GeneratedPars generated;
  generated.roots = {"0"};
  generated.successors = [](const StateId& s) -> SuccessorList {
    if (s == "a") return {};
    long level = parse_level(s);
    StateId below = level == 0 ? StateId("a") : std::to_string(level - 1);
    return {{std::to_string(level + 1), Rat(1, 3)}, {below, Rat(2, 3)}};
  };
  generated.notes["ranking"] =
      "V(n) = n+2, V(a) = 1 drops by exactly 1/3 in expectation at every level";
  return generated;
}

GeneratedPars ladder(bool uniform_half) {
  GeneratedPars generated;
  generated.roots = {"0"};
  if (uniform_half) {
    generated.successors = [](const StateId& s) -> SuccessorList {
      if (s == "a") return {};
      long level = parse_level(s);
      return {{std::to_string(level + 1), half()}, {"a", half()}};
    };
    // The single infinite path has probability lim 2^-n = 0; its complements
    // are not summable, so no tail bound exists and the lower bound stays 0.
    SinglePathDivergence path;
    path.start = "0";
    path.factor = [](std::size_t) { return half(); };
    path.tail_bound = [](std::size_t) { return std::optional<Rat>{}; };
    path.argument = "every level settles with probability 1/2, so the escape mass 2^-n vanishes";
    generated.single_path = path;
    generated.notes["divergence"] = "0: reaching a has probability 1/2 + 1/4 + ... = 1";
  } else {
    generated.successors = [](const StateId& s) -> SuccessorList {
      if (s == "a") return {};
      long level = parse_level(s);
      Rat settle(1, pow4(static_cast<std::size_t>(level) + 1));
      return {{std::to_string(level + 1), 1 - settle}, {"a", settle}};
    };
    SinglePathDivergence path;
    path.start = "0";
    path.factor = [](std::size_t i) { return 1 - Rat(1, pow4(i)); };
    path.tail_bound = [](std::size_t n) {
      // sum_{i>n} 4^-i = 4^-n / 3
      return std::optional<Rat>(Rat(1, 3 * pow4(n)));
    };
    path.argument =
        "the only infinite path climbs forever; its probability is the product of 1 - 4^-i, "
        "about 0.688538";
    generated.single_path = path;
    generated.notes["divergence"] = "product of (1 - 4^-i) for i >= 1; approximately 0.6885";
  }
  return generated;
}

Pars looping_coin(const Rat& p) {
  if (p <= 0 || p >= 1) {
    throw PreconditionError("BadLoopProbability", "need 0 < p < 1, got " + format_rational(p));
  }
  return Pars(SystemKind::probabilistic, {"0", "a"}, {{"0", "0", p}, {"0", "a", 1 - p}}, {"0"});
}

LyapunovCertificate looping_coin_certificate(const Rat& p) {
  LyapunovCertificate certificate;
  certificate.valuation = builtin_valuation("sec4");
  certificate.epsilon = 1 - p;
  certificate.name = "sec4";
  certificate.argument = "V(0) = 2, V(a) = 1: expected drop at the loop state is exactly 1 - p";
  return certificate;
}

TransformMapping looping_coin_mapping(const Rat& p) {
  TransformMapping mapping;
  mapping.source = looping_coin(p);
  mapping.target = Pars(SystemKind::plain, {"0", "a"}, {{"0", "a", 1}});
  mapping.g = {{"0", "0"}, {"a", "a"}};
  mapping.mode = TransformMode::C;
  return mapping;
}

TransformMapping random_walk_mapping(int truncation) {
  TransformMapping mapping;
  mapping.source = random_walk(truncation);
  mapping.target = walk_quotient_system();
  for (const auto& s : mapping.source.states()) {
    mapping.g[s] = s == "a" ? "a" : "number";
  }
  mapping.mode = TransformMode::Cprime;
  return mapping;
}

TransformMapping herman_mapping() {
  TransformMapping mapping;
  mapping.source = herman_pruned();
  mapping.target = herman_quotient_system();
  mapping.g = {{"[000]", "[000]"}, {"[100]", "[100]"}, {"[111]", "odd"},  {"[001]", "odd"},
               {"[010]", "odd"},   {"[011]", "even"},  {"[101]", "even"}, {"[110]", "even"}};
  mapping.mode = TransformMode::Cprime;
  return mapping;
}

std::function<Rat(const StateId&)> builtin_valuation(const std::string& name) {
  if (name == "random_walk") {
    return [](const StateId& s) -> Rat {
      if (s == "a") return 1;
      return Rat(parse_level(s) + 2);
    };
  }
  if (name == "herman") {
    // 4 * (token count) + positional weights 1, 2, 4: token elimination
    // dominates, position breaks ties.
    return [](const StateId& s) -> Rat {
      if (s.size() != 5 || s.front() != '[' || s.back() != ']') {
        throw PreconditionError("MissingValuation", "expected a 3-bit ring state, got \"" + s + "\"");
      }
      long tokens = 0;
      long weighted = 0;
      for (int i = 0; i < 3; ++i) {
        if (s[1 + i] == '1') {
          ++tokens;
          weighted += 1L << i;
        } else if (s[1 + i] != '0') {
          throw PreconditionError("MissingValuation", "expected a 3-bit ring state, got \"" + s + "\"");
        }
      }
      return Rat(4 * tokens + weighted);
    };
  }
  if (name == "ladder_dprime") {
    return [](const StateId& s) -> Rat { return s == "a" ? Rat(1) : Rat(4); };
  }
  if (name == "sec4") {
    return [](const StateId& s) -> Rat {
      if (s == "0") return 2;
      if (s == "a") return 1;
      throw PreconditionError("MissingValuation", "no valuation for state \"" + s + "\"");
    };
  }
  throw PreconditionError("UnknownEntry", "no builtin valuation named \"" + name + "\"");
}

namespace {

CorpusEntry make_entry(const std::string& name) {
  CorpusEntry entry;
  entry.name = name;
  if (name == "loop_a") {
    entry.system = loop_a_system();
    entry.expected = {true, true, false, false, false, false};
    entry.notes["structure"] = "0 feeds a probability-1 self-loop; no normal form exists";
  } else if (name == "coin_b") {
    entry.system = coin_b_system();
    entry.expected = {true, true, false, true, true, true};
    entry.notes["structure"] = "the loop at 1 leaks half its mass into a each round";
  } else if (name == "hindley_c") {
    entry.system = hindley_c_system();
    entry.expected = {true, false, false, false, false, true};
    entry.notes["structure"] =
        "two sinks a, b on a fair shuttle 0 <-> 1; locally confluent but not confluent";
    entry.notes["reach"] = "P(0 ->* a) = 2/3 and P(0 ->* b) = 1/3 exactly";
  } else if (name == "ladder_d") {
    entry.generated = ladder(false);
    entry.expected = {true, true, false, false, false, false};
    entry.notes["divergence"] = entry.generated->notes.at("divergence");
    entry.notes["row"] =
        "divergence > 0.68 certified by the single-path bounds; the negative almost-sure "
        "verdicts follow, the positive classical ones hold on every window";
  } else if (name == "ladder_dprime") {
    entry.generated = ladder(true);
    entry.expected = {true, true, false, true, true, true};
    entry.certificate = LyapunovCertificate{builtin_valuation("ladder_dprime"), Rat(1),
                                            "ladder_dprime",
                                            "V = 4 on levels, 1 at a: expected drop 4 - 5/2 = 3/2"};
    entry.notes["row"] = "certificate covers almost-sure termination; windows confirm the rest";
  } else if (name == "random_walk") {
    entry.generated = random_walk_generated();
    entry.system = random_walk(100);
    entry.expected = {true, true, false, true, true, true};
    entry.certificate = LyapunovCertificate{builtin_valuation("random_walk"), Rat(1, 3),
                                            "random_walk",
                                            "V(n) = n+2, V(a) = 1: every level drops by exactly 1/3 "
                                            "in expectation, including 2 - 5/3 = 1/3 at level 0"};
    entry.mapping = random_walk_mapping(25);
    entry.notes["truncation"] =
        "the finite variant folds the top up-edge downward; runs that never visit the top "
        "level are unaffected, and the mass that does is at most 2^-N";
  } else if (name == "herman3") {
    entry.system = herman_ring(3);
    entry.expected = {true, true, false, false, false, false};
    entry.notes["semantics"] =
        "transition probabilities derived from independent keep/pass choices per token holder; "
        "the [011] self-loop gets 1/4 (one of four outcomes), a value sometimes quoted as 1/2, "
        "which would not leave a full distribution";
  } else if (name == "herman3_pruned") {
    entry.system = herman_pruned();
    entry.expected = {true, true, false, true, true, true};
    entry.certificate = LyapunovCertificate{
        builtin_valuation("herman"), half(), "herman",
        "two-token states all have successor expectation 19/2, below their own values 11, 13, 14; "
        "the binding margin is 1/2 at [010]"};
    entry.mapping = herman_mapping();
    entry.notes["ranking"] =
        "the formula gives V([101]) = 13 (= 8 + 5); a larger value of 14 is sometimes quoted, "
        "but 13 > 19/2 already satisfies the certificate";
    entry.notes["parity"] = "token parity is preserved, so odd states drain to [100], even to [000]";
  } else if (name == "herman_quotient") {
    entry.system = herman_quotient_system();
    entry.expected = {true, true, true, std::nullopt, std::nullopt, std::nullopt};
    entry.notes["role"] = "two-arrow target system for the ring transformation";
  } else if (name == "sec4_example") {
    entry.system = looping_coin(half());
    entry.expected = {true, true, false, true, true, true};
    entry.certificate = looping_coin_certificate(half());
    entry.mapping = looping_coin_mapping(half());
    entry.notes["parameter"] = "loop probability p defaults to 1/2; builders accept any 0 < p < 1";
  } else {
    throw PreconditionError("UnknownEntry", "no corpus entry named \"" + name + "\"");
  }
  return entry;
}

}  // namespace

CorpusEntry builtin(const std::string& name) { return make_entry(name); }

std::vector<std::string> builtin_names() {
  return {"loop_a",      "coin_b",         "hindley_c",       "ladder_d", "ladder_dprime",
          "random_walk", "herman3",        "herman3_pruned",  "herman_quotient", "sec4_example"};
}

}  // namespace parskit
