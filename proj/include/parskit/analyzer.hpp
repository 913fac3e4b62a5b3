#ifndef PARSKIT_ANALYZER_HPP
#define PARSKIT_ANALYZER_HPP

#include "parskit/system.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace parskit {

enum class Verdict { yes, no, unknown };

std::string to_string(Verdict verdict);

/// Structured evidence for a "no" (or "unknown") verdict. Kinds:
///   cycle    states = [s0, s1, ..., s0], consecutive pairs are rules
///   peak     states = [apex, s1, s2]
///   state    states = [s]
///   nf_set   states = [s, nf1, nf2, ...]
///   frontier states = unexpanded window boundary
struct Witness {
  std::string kind;
  std::vector<StateId> states;
  std::string detail;
};

struct Decision {
  Verdict verdict = Verdict::unknown;
  std::optional<Witness> witness;
  std::string note;
};

/// Transitive reflexive closure of the one-step relation, as a bit matrix
/// over state indices.
class Reachability {
 public:
  explicit Reachability(const Pars& system);

  bool reaches(std::size_t from, std::size_t to) const;
  bool join_exists(std::size_t a, std::size_t b) const;  // common ->*-successor
  /// Lowest-index common successor of a and b, if any.
  std::optional<std::size_t> first_join(std::size_t a, std::size_t b) const;
  std::vector<std::size_t> reachable_from(std::size_t from) const;  // ascending
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;  // row-major, row = from
};

Reachability star_closure(const Pars& system);

/// Per state, the set of reachable normal forms (NF_R(s)).
std::map<StateId, std::set<StateId>> nf_map(const Pars& system);

Decision check_termination(const Pars& system);
Decision check_normalizing(const Pars& system);
Decision check_local_confluence(const Pars& system);
Decision check_confluence(const Pars& system);
Decision check_unique_nf(const Pars& system);

/// Weakly connected components of the rule graph: s <->* t iff same class.
/// Classes are sorted internally and by leading state.
std::vector<std::vector<StateId>> convertibility_classes(const Pars& system);

/// A finite window cannot certify a global property: every checker answers
/// `unknown` (frontier witness) unless the frontier is empty.
Decision check_termination(const ExploredSystem& window);
Decision check_normalizing(const ExploredSystem& window);
Decision check_local_confluence(const ExploredSystem& window);
Decision check_confluence(const ExploredSystem& window);
Decision check_unique_nf(const ExploredSystem& window);

}  // namespace parskit

#endif
