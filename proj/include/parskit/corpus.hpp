#ifndef PARSKIT_CORPUS_HPP
#define PARSKIT_CORPUS_HPP

#include "parskit/certifier.hpp"
#include "parskit/system.hpp"
#include "parskit/transformer.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace parskit {

/// Six-property row in checker order: local confluence, confluence,
/// termination, a.s. local convergence, a.s. convergence, a.s. termination.
/// nullopt marks properties that do not apply (plain systems).
struct ExpectedRow {
  std::optional<bool> loc_confluence;
  std::optional<bool> confluence;
  std::optional<bool> termination;
  std::optional<bool> as_loc_convergence;
  std::optional<bool> as_convergence;
  std::optional<bool> as_termination;
};

/// A shipped benchmark system with everything needed to re-derive its row:
/// the system itself (finite or generated), the expected verdicts, analytic
/// notes, and optional ranking certificate / transform mapping.
struct CorpusEntry {
  std::string name;
  std::optional<Pars> system;
  std::optional<GeneratedPars> generated;
  ExpectedRow expected;
  std::map<std::string, std::string> notes;
  std::optional<LyapunovCertificate> certificate;
  std::optional<TransformMapping> mapping;

  bool is_finite() const { return system.has_value(); }
};

/// Throws PreconditionError("UnknownEntry") for names outside builtin_names().
CorpusEntry builtin(const std::string& name);
std::vector<std::string> builtin_names();

/// Ring of n processes passing tokens left with probability 1/2 each step;
/// a token arriving at a holder that kept its own eliminates both. Token-free
/// states are terminal. n is capped at 12 (state count doubles per process).
Pars herman_ring(int n);

/// herman_ring(3) with both moves of [100] removed, making [100] terminal.
Pars herman_pruned();

/// Biased walk 0..N with absorption below 0: up 1/3, down 2/3, and the top
/// state folded downward (its up-edge mass moved onto the down-edge). The
/// fold only matters on runs that ever visit N, of total mass <= 2^-N.
Pars random_walk(int truncation);
GeneratedPars random_walk_generated();

/// The geometric-escape ladder: state i steps up with probability
/// 1 - 4^-(i+1) and settles into `a` otherwise. With `uniform_half` the
/// probabilities are all 1/2 instead, and escape mass vanishes.
GeneratedPars ladder(bool uniform_half);

/// One loop state draining into one sink: 0 -> 0 with probability p,
/// 0 -> a with 1 - p. Requires 0 < p < 1.
Pars looping_coin(const Rat& p);
LyapunovCertificate looping_coin_certificate(const Rat& p);
TransformMapping looping_coin_mapping(const Rat& p);

TransformMapping random_walk_mapping(int truncation);
TransformMapping herman_mapping();

/// Named valuation formulas usable in certificate documents
/// ({"valuation": {"builtin": <name>}}): random_walk, herman,
/// ladder_dprime, sec4.
std::function<Rat(const StateId&)> builtin_valuation(const std::string& name);

}  // namespace parskit

#endif
