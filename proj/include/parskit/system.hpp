#ifndef PARSKIT_SYSTEM_HPP
#define PARSKIT_SYSTEM_HPP

#include "parskit/rational.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace parskit {

/// States are opaque name tokens; all iteration is in lexicographic order of
/// the name so every report and witness is reproducible.
using StateId = std::string;

struct Rule {
  StateId from;
  StateId to;
  Rat p = 1;  // stays 1 for plain (non-probabilistic) systems
};

enum class SystemKind { probabilistic, plain };

enum class Severity { error, warning };

struct Issue {
  Severity severity = Severity::error;
  std::string code;     // DistributionSum, ZeroProbabilityEdge, ...
  std::string subject;  // state or "from->to"
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> issues;
  bool ok() const {
    for (const auto& issue : issues) {
      if (issue.severity == Severity::error) return false;
    }
    return true;
  }
};

/// A finite reduction system: states plus one probability-labelled edge per
/// ordered (from, to) pair. Immutable after construction; analyses assume a
/// system that passed validate().
class Pars {
 public:
  Pars() = default;
  Pars(SystemKind kind, std::vector<StateId> states, std::vector<Rule> rules,
       std::vector<StateId> roots = {});

  SystemKind kind() const { return kind_; }
  const std::vector<StateId>& states() const { return states_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<StateId>& roots() const { return roots_; }

  std::size_t size() const { return states_.size(); }
  bool has_state(const StateId& s) const;
  /// Throws PreconditionError("UnknownState") for undeclared names.
  std::size_t index_of(const StateId& s) const;
  const StateId& state(std::size_t i) const { return states_[i]; }

  /// Outgoing rule indices of state i, ordered by target name. Rules whose
  /// endpoints are undeclared are kept in rules() for validate() to report
  /// but never appear here.
  const std::vector<std::size_t>& out(std::size_t i) const { return out_[i]; }
  bool is_normal_form(std::size_t i) const { return out_[i].empty(); }

 private:
  SystemKind kind_ = SystemKind::probabilistic;
  std::vector<StateId> states_;  // sorted, unique
  std::vector<Rule> rules_;      // sorted by (from, to)
  std::vector<StateId> roots_;
  std::map<StateId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
};

/// Distribution sums, probability ranges, endpoint declaration, duplicates.
/// Never throws; problems come back as report entries.
ValidationReport validate(const Pars& system);

/// States with no outgoing rule.
std::set<StateId> normal_forms(const Pars& system);

/// Parses the JSON document format and validates the result.
/// Throws ParseError / ValidationError.
Pars load_system(const std::string& document);

/// Byte-stable canonical JSON (sorted states, sorted rules).
std::string serialize(const Pars& system);

using SuccessorList = std::vector<std::pair<StateId, Rat>>;

/// Certified bounds for the probability of one infinite path (product of its
/// edge probabilities). Attached to generated systems whose divergence is
/// carried entirely by a single path, so bounded exploration can be upgraded
/// to a certified divergence interval.
struct SinglePathDivergence {
  StateId start;
  std::function<Rat(std::size_t)> factor;  // p_i, i >= 1
  /// T(N) >= sum_{i>N} (1 - p_i); nullopt when the complements are not summable.
  std::function<std::optional<Rat>(std::size_t)> tail_bound;
  std::string argument;  // human-auditable reasoning; printed, not verified
};

/// A countably infinite system given intensionally by a successor function.
/// The function must be deterministic and return a full one-step
/// distribution (empty list = normal form). Analyses only ever see finite
/// explorations with an explicit frontier.
struct GeneratedPars {
  std::vector<StateId> roots;
  std::function<SuccessorList(const StateId&)> successors;
  std::optional<SinglePathDivergence> single_path;
  std::map<std::string, std::string> notes;

  /// Wraps a finite system; exploring deep enough yields an empty frontier.
  static GeneratedPars from_pars(const Pars& system);
};

/// Finite window onto a generated system. Frontier states have no outgoing
/// rules in `core` but are *not* normal forms; every analysis must either
/// treat them as unknown-absorbers or refuse to answer.
struct ExploredSystem {
  Pars core;
  std::set<StateId> frontier;
  std::size_t depth = 0;

  bool is_frontier(const StateId& s) const { return frontier.count(s) > 0; }
};

/// Breadth-first expansion from the roots. Reducible states first reached at
/// distance exactly `depth` become the frontier. Invalid successor
/// distributions are reported via ValidationError.
ExploredSystem explore(const GeneratedPars& generated, std::size_t depth);

}  // namespace parskit

#endif
