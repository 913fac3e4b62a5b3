#include "parskit/system.hpp"

#include "parskit/errors.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <nlohmann/json.hpp>
#include <utility>

namespace parskit {

namespace {
using ordered_json = nlohmann::ordered_json;
}

Pars::Pars(SystemKind kind, std::vector<StateId> states, std::vector<Rule> rules,
           std::vector<StateId> roots)
    : kind_(kind), states_(std::move(states)), rules_(std::move(rules)), roots_(std::move(roots)) {
  std::sort(states_.begin(), states_.end());
  states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
  std::sort(rules_.begin(), rules_.end(), [](const Rule& a, const Rule& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = i;
  out_.resize(states_.size());
  for (std::size_t r = 0; r < rules_.size(); ++r) {
    auto from = index_.find(rules_[r].from);
    if (from == index_.end() || index_.find(rules_[r].to) == index_.end()) continue;
    out_[from->second].push_back(r);  // rule order is (from, to), so this stays sorted by target
  }
}

bool Pars::has_state(const StateId& s) const { return index_.count(s) > 0; }

std::size_t Pars::index_of(const StateId& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) throw PreconditionError("UnknownState", "no state named \"" + s + "\"");
  return it->second;
}

ValidationReport validate(const Pars& system) {
  ValidationReport report;
  auto error = [&](std::string code, std::string subject, std::string message) {
    report.issues.push_back({Severity::error, std::move(code), std::move(subject), std::move(message)});
  };

  for (const auto& s : system.states()) {
    if (s.empty()) error("EmptyStateName", "\"\"", "state names must be nonempty");
  }

  const Rule* previous = nullptr;
  for (const auto& rule : system.rules()) {
    std::string subject = rule.from + "->" + rule.to;
    if (!system.has_state(rule.from)) error("UndeclaredState", subject, "rule source is not a declared state");
    if (!system.has_state(rule.to)) error("UndeclaredState", subject, "rule target is not a declared state");
    if (previous && previous->from == rule.from && previous->to == rule.to) {
      error("DuplicateRule", subject, "one probability per (from, to) pair; merge parallel edges upstream");
    }
    previous = &rule;
    if (system.kind() == SystemKind::probabilistic) {
      if (rule.p == 0) {
        error("ZeroProbabilityEdge", subject, "an edge exists exactly when its probability is positive");
      } else if (rule.p < 0 || rule.p > 1) {
        error("ProbabilityOutOfRange", subject, "probability must lie in (0, 1], got " + format_rational(rule.p));
      }
    }
  }

  if (system.kind() == SystemKind::probabilistic) {
    for (std::size_t i = 0; i < system.size(); ++i) {
      if (system.is_normal_form(i)) continue;
      Rat sum = 0;
      for (std::size_t r : system.out(i)) sum += system.rules()[r].p;
      if (sum != 1) {
        error("DistributionSum", system.state(i),
              "outgoing probabilities sum to " + format_rational(sum) + ", expected exactly 1");
      }
    }
  }

  for (const auto& root : system.roots()) {
    if (!system.has_state(root)) error("UndeclaredState", root, "root is not a declared state");
  }
  return report;
}

std::set<StateId> normal_forms(const Pars& system) {
  std::set<StateId> result;
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (system.is_normal_form(i)) result.insert(system.state(i));
  }
  return result;
}

Pars load_system(const std::string& document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("BadJson", e.what());
  }
  if (!doc.is_object()) throw ParseError("BadDocument", "top level must be an object");

  std::string kind_text = doc.value("kind", std::string("pars"));
  SystemKind kind;
  if (kind_text == "pars") {
    kind = SystemKind::probabilistic;
  } else if (kind_text == "ars") {
    kind = SystemKind::plain;
  } else {
    throw ParseError("BadDocument", "kind must be \"pars\" or \"ars\", got \"" + kind_text + "\"");
  }

  if (!doc.contains("states") || !doc["states"].is_array()) {
    throw ParseError("BadDocument", "missing \"states\" array");
  }
  std::vector<StateId> states;
  for (const auto& s : doc["states"]) {
    if (!s.is_string()) throw ParseError("BadDocument", "states must be strings");
    states.push_back(s.get<std::string>());
  }

  std::vector<Rule> rules;
  if (doc.contains("rules")) {
    if (!doc["rules"].is_array()) throw ParseError("BadDocument", "\"rules\" must be an array");
    for (const auto& r : doc["rules"]) {
      if (!r.is_object() || !r.contains("from") || !r.contains("to")) {
        throw ParseError("BadDocument", "each rule needs \"from\" and \"to\"");
      }
      Rule rule;
      rule.from = r["from"].get<std::string>();
      rule.to = r["to"].get<std::string>();
      if (kind == SystemKind::probabilistic) {
        if (!r.contains("p")) {
          throw ParseError("MissingProbability", "rule " + rule.from + "->" + rule.to + " has no \"p\"");
        }
        rule.p = parse_rational(r["p"].get<std::string>());
      } else if (r.contains("p")) {
        throw ParseError("UnexpectedProbability",
                         "plain (\"ars\") systems carry no probabilities; rule " + rule.from + "->" + rule.to);
      }
      rules.push_back(std::move(rule));
    }
  }

  std::vector<StateId> roots;
  if (doc.contains("roots")) {
    for (const auto& s : doc["roots"]) roots.push_back(s.get<std::string>());
  }

  Pars system(kind, std::move(states), std::move(rules), std::move(roots));
  ValidationReport report = validate(system);
  if (!report.ok()) {
    std::string summary;
    for (const auto& issue : report.issues) {
      if (issue.severity != Severity::error) continue;
      if (!summary.empty()) summary += "; ";
      summary += issue.code + " at " + issue.subject;
    }
    throw ValidationError(report.issues.front().code, summary);
  }
  return system;
}

std::string serialize(const Pars& system) {
  ordered_json doc;
  doc["kind"] = system.kind() == SystemKind::probabilistic ? "pars" : "ars";
  doc["states"] = system.states();
  ordered_json rules = ordered_json::array();
  for (const auto& rule : system.rules()) {
    ordered_json entry;
    entry["from"] = rule.from;
    entry["to"] = rule.to;
    if (system.kind() == SystemKind::probabilistic) entry["p"] = format_rational(rule.p);
    rules.push_back(std::move(entry));
  }
  doc["rules"] = std::move(rules);
  if (!system.roots().empty()) doc["roots"] = system.roots();
  return doc.dump(2) + "\n";
}

GeneratedPars GeneratedPars::from_pars(const Pars& system) {
  GeneratedPars generated;
  generated.roots = system.roots().empty() ? system.states() : system.roots();
  generated.successors = [system](const StateId& s) {
    SuccessorList successors;
    std::size_t i = system.index_of(s);
    for (std::size_t r : system.out(i)) {
      successors.emplace_back(system.rules()[r].to, system.rules()[r].p);
    }
    return successors;
  };
  return generated;
}

ExploredSystem explore(const GeneratedPars& generated, std::size_t depth) {
  std::map<StateId, std::size_t> distance;
  std::deque<StateId> queue;
  std::vector<StateId> roots = generated.roots;
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  for (const auto& root : roots) {
    distance[root] = 0;
    queue.push_back(root);
  }

  std::vector<Rule> rules;
  std::set<StateId> seen;
  std::set<StateId> frontier;
  for (const auto& root : roots) seen.insert(root);

  while (!queue.empty()) {
    StateId current = queue.front();
    queue.pop_front();
    std::size_t d = distance[current];
    SuccessorList successors = generated.successors(current);
    if (successors.empty()) continue;  // normal form
    if (d >= depth) {
      frontier.insert(current);
      continue;
    }

    Rat sum = 0;
    std::set<StateId> targets;
    for (const auto& [target, p] : successors) {
      if (p <= 0 || p > 1) {
        throw ValidationError("ProbabilityOutOfRange",
                              "successor " + current + "->" + target + " has p = " + format_rational(p));
      }
      if (!targets.insert(target).second) {
        throw ValidationError("DuplicateRule", "successor function repeats target " + target + " from " + current);
      }
      sum += p;
    }
    if (sum != 1) {
      throw ValidationError("DistributionSum",
                            "successors of " + current + " sum to " + format_rational(sum));
    }

    for (const auto& [target, p] : successors) {
      rules.push_back({current, target, p});
      if (seen.insert(target).second) {
        distance[target] = d + 1;
        queue.push_back(target);
      }
    }
  }

  std::vector<StateId> states(seen.begin(), seen.end());
  ExploredSystem result;
  result.core = Pars(SystemKind::probabilistic, std::move(states), std::move(rules), roots);
  result.frontier = std::move(frontier);
  result.depth = depth;
  return result;
}

}  // namespace parskit
