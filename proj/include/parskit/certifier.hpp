#ifndef PARSKIT_CERTIFIER_HPP
#define PARSKIT_CERTIFIER_HPP

#include "parskit/system.hpp"

#include <functional>
#include <map>
#include <string>
#include <utility>

namespace parskit {

/// A ranking valuation V plus one uniform margin requirement epsilon: the
/// certificate holds when V(s) >= sum P(s->s') V(s') + epsilon at every
/// checked reducible state, with V nonnegative everywhere it is consulted.
struct LyapunovCertificate {
  std::function<Rat(const StateId&)> valuation;  // throws PreconditionError("MissingValuation")
  Rat epsilon;
  std::string name;      // "map" or a builtin formula name
  std::string argument;  // human-auditable symbolic note; printed, never verified

  static LyapunovCertificate from_map(std::map<StateId, Rat> values, Rat epsilon);
};

enum class Coverage { full, bounded };

enum class CertVerdict {
  proven,    // margins hold and every reducible state was checked
  evidence,  // margins hold on a bounded window only
  refuted    // some checked state breaks the margin (or V < 0 somewhere)
};

struct MarginReport {
  std::map<StateId, Rat> margins;  // per checked reducible state
  Rat epsilon;
  CertVerdict verdict = CertVerdict::refuted;
  Coverage coverage = Coverage::full;
  std::size_t depth = 0;  // meaningful for bounded coverage
  std::size_t states_checked = 0;
  std::string note;

  bool holds() const { return verdict != CertVerdict::refuted; }
};

std::string to_string(CertVerdict verdict);

/// Exact margins m(s) = V(s) - sum P(s->s') V(s') over all reducible states.
/// On a finite system a passing report certifies almost-sure termination;
/// on a window it is evidence only (frontier states are not checked, but V
/// must be defined on them as successors).
MarginReport check_lyapunov(const Pars& system, const LyapunovCertificate& certificate);
MarginReport check_lyapunov(const ExploredSystem& window, const LyapunovCertificate& certificate);

/// Lexicographically first state attaining the minimum margin.
/// Throws PreconditionError("EmptyReport") when nothing was checked.
std::pair<StateId, Rat> min_margin(const MarginReport& report);

}  // namespace parskit

#endif
