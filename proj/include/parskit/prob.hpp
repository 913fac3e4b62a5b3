#ifndef PARSKIT_PROB_HPP
#define PARSKIT_PROB_HPP

#include "parskit/analyzer.hpp"
#include "parskit/system.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <variant>
#include <vector>

namespace parskit {

/// Product of edge probabilities along `path`; the empty and the
/// single-state path have probability 1.
/// Throws PreconditionError("NotAPath") when consecutive states are not a rule.
Rat path_probability(const Pars& system, const std::vector<StateId>& path);

/// Step-n distribution over path endings: mass absorbed per normal form
/// (`settled`) and mass still sitting on reducible states (`alive`).
/// Frontier states of a window hold their mass in `alive` forever.
struct PnState {
  std::uint64_t n = 0;
  std::map<StateId, Rat> settled;
  std::map<StateId, Rat> alive;

  Rat settled_total() const;
  Rat alive_total() const;
};

PnState pn_iterate(const Pars& system, const StateId& start, std::uint64_t n);
PnState pn_iterate(const ExploredSystem& window, const StateId& start, std::uint64_t n);

struct Interval {
  Rat lo;
  Rat hi;
};

enum class ReachMethod { solve, iterate, bracket };

/// Reaching probabilities for one start state. With method solve the
/// divergence is exact and sum(reach) + divergence == 1; with method bracket
/// the reach values are lower bounds and divergence is a certified interval.
struct ReachReport {
  StateId start;
  std::map<StateId, Rat> reach;
  std::variant<Rat, Interval> divergence;
  ReachMethod method = ReachMethod::solve;

  const Rat& divergence_exact() const { return std::get<Rat>(divergence); }
};

/// Exact absorption probabilities for every state of a finite validated
/// probabilistic system, by rational elimination of the linear fixed-point
/// equations x_s(t) = sum_{s->s'} P(s->s') x_{s'}(t) per target normal form.
std::map<StateId, ReachReport> absorption_solve(const Pars& system);

/// P(s ->* t) for a normal form t of s.
/// Throws PreconditionError: TargetNotNormalForm if t is reducible (the path
/// sum over a reducible target is not a probability), TargetUnreachable if
/// t is not reachable from s.
Rat reach_probability(const Pars& system, const StateId& from, const StateId& target);

/// Certified divergence interval from a bounded exploration:
///   hi = alive mass after n steps (settled mass only ever grows);
///   lo = alive mass provably trapped (no normal form and no frontier state
///        reachable), tightened by the system's single-path annotation when
///        one applies to `start`.
Interval divergence_bracket(const GeneratedPars& generated, const StateId& start,
                            std::size_t depth, std::uint64_t n);

/// Brackets the infinite product of `factors` (each in (0, 1]): hi is the
/// partial product of the first `n_factors`, lo = hi * max(0, 1 - tail)
/// where tail >= sum of (1 - p_i) beyond the cutoff. Without a tail bound
/// lo = 0. Throws PreconditionError("TailBoundInvalid") for tail >= 1 or
/// tail < 0, and "InvalidFactor" for factors outside (0, 1].
Interval single_path_divergence_bounds(const std::vector<Rat>& factors, std::size_t n_factors,
                                       const std::optional<Rat>& tail_bound);

/// On a finite system: no divergence anywhere iff every state reaches a
/// normal form.
Decision check_as_termination(const Pars& system);
Decision check_as_termination(const ExploredSystem& window);

/// Every one-step divergence rejoins in one common normal form that both
/// branches reach with probability 1.
Decision check_as_local_convergence(const Pars& system);

/// Conjunction of almost-sure termination and confluence; the note names
/// the failing conjunct.
Decision check_as_convergence(const Pars& system);

struct ProbNormalizingReport {
  Decision decision;
  /// one (state, normal form, exact probability > 0) row per state
  std::vector<std::tuple<StateId, StateId, Rat>> evidence;
};

ProbNormalizingReport check_prob_normalizing(const Pars& system);

struct MonteCarloReport {
  StateId start;
  std::uint64_t samples = 0;
  std::uint64_t max_steps = 0;
  std::uint64_t seed = 0;
  std::map<StateId, std::uint64_t> absorbed;  // per normal form
  std::uint64_t censored = 0;                 // step budget exhausted
  std::uint64_t frontier_hits = 0;            // walked onto the frontier

  double fraction(const StateId& normal_form) const;
};

/// Seed-deterministic sampling oracle; chunked so the result does not depend
/// on the number of worker threads. Censored runs are never folded into any
/// absorption bucket.
MonteCarloReport monte_carlo(const Pars& system, const StateId& start, std::uint64_t max_steps,
                             std::uint64_t samples, std::uint64_t seed);
MonteCarloReport monte_carlo(const ExploredSystem& window, const StateId& start,
                             std::uint64_t max_steps, std::uint64_t samples, std::uint64_t seed);

}  // namespace parskit

#endif
