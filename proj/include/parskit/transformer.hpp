#ifndef PARSKIT_TRANSFORMER_HPP
#define PARSKIT_TRANSFORMER_HPP

#include "parskit/analyzer.hpp"
#include "parskit/system.hpp"

#include <map>
#include <string>
#include <vector>

namespace parskit {

enum class TransformMode { C, Cprime };

std::string to_string(TransformMode mode);

/// A total state mapping G from a source system into a (hopefully simpler)
/// target system. In mode C a fully passing report transfers confluence from
/// target to source; in mode Cprime (non-)confluence transfers both ways.
struct TransformMapping {
  Pars source;
  Pars target;
  std::map<StateId, StateId> g;
  TransformMode mode = TransformMode::C;

  const StateId& apply(const StateId& s) const;  // throws PartialMapping
};

struct ConditionReport {
  TransformMode mode = TransformMode::C;
  /// Keyed "C1".."C5" (mode C) or "C1'".."C5'" (mode Cprime).
  std::map<std::string, Decision> conditions;
  /// Confluence of the target system; in mode C this is condition C1, in
  /// mode Cprime it is the fact the biconditional turns on.
  Decision target_confluence;

  bool all_yes() const;
  std::string first_failure() const;  // "" when all_yes()
};

/// Evaluates the structural transfer conditions for the mapping.
/// Throws PreconditionError: PartialMapping (G not total or image missing).
ConditionReport check_conditions(const TransformMapping& mapping);

/// Guard for building mappings from explored windows; conditions like
/// "every normal form ..." cannot be decided past a frontier.
/// Throws PreconditionError("FrontierPresent").
const Pars& require_frontier_free(const ExploredSystem& window);

enum class Conclusion {
  source_confluent,
  source_not_confluent,
  source_as_convergent,
  source_not_as_convergent,
  inconclusive
};

std::string to_string(Conclusion conclusion);

struct ConclusionReport {
  Conclusion conclusion = Conclusion::inconclusive;
  std::string reason;
};

/// Combines a condition report with almost-sure-termination evidence for
/// the source. Without such evidence only confluence-level conclusions are
/// drawn; any failed condition makes the result inconclusive.
ConclusionReport conclude(const ConditionReport& report, const Decision& as_termination_evidence);

}  // namespace parskit

#endif
