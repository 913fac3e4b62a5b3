#include "parskit/prob.hpp"

#include "parskit/errors.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <random>
#include <sstream>
#include <thread>

namespace parskit {

Rat path_probability(const Pars& system, const std::vector<StateId>& path) {
  Rat product = 1;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    std::size_t from = system.index_of(path[i]);
    std::size_t to = system.index_of(path[i + 1]);
    bool found = false;
    for (std::size_t r : system.out(from)) {
      if (system.index_of(system.rules()[r].to) == to) {
        product *= system.rules()[r].p;
        found = true;
        break;
      }
    }
    if (!found) {
      throw PreconditionError("NotAPath", path[i] + " -> " + path[i + 1] + " is not a rule");
    }
  }
  if (!path.empty()) system.index_of(path.front());
  return product;
}

Rat PnState::settled_total() const {
  Rat total = 0;
  for (const auto& [s, m] : settled) total += m;
  return total;
}

Rat PnState::alive_total() const {
  Rat total = 0;
  for (const auto& [s, m] : alive) total += m;
  return total;
}

namespace {

PnState pn_iterate_impl(const Pars& system, const std::set<StateId>& frontier, const StateId& start,
                        std::uint64_t n) {
  std::size_t start_index = system.index_of(start);
  std::vector<char> is_frontier(system.size(), 0);
  for (const auto& f : frontier) is_frontier[system.index_of(f)] = 1;

  std::map<std::size_t, Rat> settled;
  std::map<std::size_t, Rat> alive;
  if (system.is_normal_form(start_index) && !is_frontier[start_index]) {
    settled[start_index] = 1;
  } else {
    alive[start_index] = 1;
  }

  for (std::uint64_t step = 0; step < n && !alive.empty(); ++step) {
    std::map<std::size_t, Rat> next;
    bool moved = false;
    for (const auto& [s, mass] : alive) {
      if (is_frontier[s]) {  // unexpanded: mass parks here, still counted alive
        next[s] += mass;
        continue;
      }
      moved = true;
      for (std::size_t r : system.out(s)) {
        const Rule& rule = system.rules()[r];
        std::size_t to = system.index_of(rule.to);
        if (system.is_normal_form(to) && !is_frontier[to]) {
          settled[to] += mass * rule.p;
        } else {
          next[to] += mass * rule.p;
        }
      }
    }
    alive = std::move(next);
    if (!moved) break;  // only frontier mass left; further steps change nothing
  }

  PnState result;
  result.n = n;
  for (const auto& [s, m] : settled) result.settled[system.state(s)] = m;
  for (const auto& [s, m] : alive) result.alive[system.state(s)] = m;
  return result;
}

/// Eliminates A x = b exactly. A is dense row-major with sparsity skips, so
/// banded systems (chains ordered by distance) stay cheap.
std::vector<Rat> solve_linear(std::vector<std::vector<Rat>>& matrix, std::vector<Rat>& rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && matrix[pivot][col] == 0) ++pivot;
    if (pivot == n) {
      throw Error("SingularSystem", "absorption system is singular; input not validated?");
    }
    if (pivot != col) {
      std::swap(matrix[pivot], matrix[col]);
      std::swap(rhs[pivot], rhs[col]);
    }
    const Rat& diag = matrix[col][col];
    for (std::size_t row = col + 1; row < n; ++row) {
      if (matrix[row][col] == 0) continue;
      Rat factor = matrix[row][col] / diag;
      matrix[row][col] = 0;
      for (std::size_t j = col + 1; j < n; ++j) {
        if (matrix[col][j] != 0) matrix[row][j] -= factor * matrix[col][j];
      }
      rhs[row] -= factor * rhs[col];
    }
  }
  std::vector<Rat> solution(n);
  for (std::size_t row = n; row-- > 0;) {
    Rat value = rhs[row];
    for (std::size_t j = row + 1; j < n; ++j) {
      if (matrix[row][j] != 0) value -= matrix[row][j] * solution[j];
    }
    solution[row] = value / matrix[row][row];
  }
  return solution;
}

/// Order the transient states of one absorption problem by reverse-BFS
/// distance from the target, so chain-like systems give banded matrices.
std::vector<std::size_t> elimination_order(const Pars& system, std::size_t target,
                                           const std::vector<char>& in_problem) {
  std::vector<std::vector<std::size_t>> reverse_edges(system.size());
  for (const auto& rule : system.rules()) {
    reverse_edges[system.index_of(rule.to)].push_back(system.index_of(rule.from));
  }
  std::vector<char> visited(system.size(), 0);
  std::vector<std::size_t> order;
  std::deque<std::size_t> queue{target};
  visited[target] = 1;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    if (u != target && in_problem[u]) order.push_back(u);
    for (std::size_t v : reverse_edges[u]) {
      if (!visited[v]) {
        visited[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return order;
}

void require_probabilistic(const Pars& system) {
  if (system.kind() != SystemKind::probabilistic) {
    throw PreconditionError("NotProbabilistic", "operation needs a probabilistic system");
  }
}

}  // namespace

PnState pn_iterate(const Pars& system, const StateId& start, std::uint64_t n) {
  require_probabilistic(system);
  return pn_iterate_impl(system, {}, start, n);
}

PnState pn_iterate(const ExploredSystem& window, const StateId& start, std::uint64_t n) {
  return pn_iterate_impl(window.core, window.frontier, start, n);
}

std::map<StateId, ReachReport> absorption_solve(const Pars& system) {
  require_probabilistic(system);
  Reachability closure(system);

  std::map<StateId, ReachReport> reports;
  for (std::size_t s = 0; s < system.size(); ++s) {
    reports[system.state(s)] = ReachReport{system.state(s), {}, Rat(1), ReachMethod::solve};
  }

  for (std::size_t target = 0; target < system.size(); ++target) {
    if (!system.is_normal_form(target)) continue;

    std::vector<char> in_problem(system.size(), 0);
    for (std::size_t s = 0; s < system.size(); ++s) {
      if (s != target && closure.reaches(s, target)) in_problem[s] = 1;
    }
    std::vector<std::size_t> order = elimination_order(system, target, in_problem);
    std::map<std::size_t, std::size_t> column;
    for (std::size_t i = 0; i < order.size(); ++i) column[order[i]] = i;

    std::vector<std::vector<Rat>> matrix(order.size(), std::vector<Rat>(order.size(), Rat(0)));
    std::vector<Rat> rhs(order.size(), Rat(0));
    for (std::size_t i = 0; i < order.size(); ++i) {
      std::size_t s = order[i];
      matrix[i][i] = 1;
      for (std::size_t r : system.out(s)) {
        const Rule& rule = system.rules()[r];
        std::size_t to = system.index_of(rule.to);
        if (to == target) {
          rhs[i] += rule.p;
        } else if (auto it = column.find(to); it != column.end()) {
          matrix[i][it->second] -= rule.p;
        }  // states that cannot reach the target contribute exactly 0
      }
    }
    std::vector<Rat> solution = solve_linear(matrix, rhs);

    reports[system.state(target)].reach[system.state(target)] = 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      reports[system.state(order[i])].reach[system.state(target)] = solution[i];
    }
  }

  for (auto& [s, report] : reports) {
    Rat total = 0;
    for (const auto& [t, p] : report.reach) total += p;
    report.divergence = Rat(1 - total);
  }
  return reports;
}

Rat reach_probability(const Pars& system, const StateId& from, const StateId& target) {
  require_probabilistic(system);
  std::size_t from_index = system.index_of(from);
  std::size_t target_index = system.index_of(target);
  if (!system.is_normal_form(target_index)) {
    throw PreconditionError("TargetNotNormalForm",
                            "\"" + target + "\" is reducible; the sum over paths to a reducible "
                            "state is not a probability");
  }
  Reachability closure(system);
  if (!closure.reaches(from_index, target_index)) {
    throw PreconditionError("TargetUnreachable", "\"" + target + "\" is not a normal form of \"" + from + "\"");
  }
  auto reports = absorption_solve(system);
  return reports.at(from).reach.at(target);
}

Interval divergence_bracket(const GeneratedPars& generated, const StateId& start, std::size_t depth,
                            std::uint64_t n) {
  ExploredSystem window = explore(generated, depth);
  PnState pn = pn_iterate(window, start, n);

  Interval bracket;
  bracket.hi = pn.alive_total();

  // Alive mass is provably divergent when its state can reach neither a
  // normal form nor the frontier inside the window.
  Reachability closure(window.core);
  bracket.lo = 0;
  for (const auto& [name, mass] : pn.alive) {
    std::size_t s = window.core.index_of(name);
    bool escapable = false;
    for (std::size_t t : closure.reachable_from(s)) {
      const StateId& t_name = window.core.state(t);
      if ((window.core.is_normal_form(t) && !window.is_frontier(t_name)) || window.is_frontier(t_name)) {
        escapable = true;
        break;
      }
    }
    if (!escapable) bracket.lo += mass;
  }

  if (generated.single_path && generated.single_path->start == start) {
    std::vector<Rat> factors;
    factors.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = 1; i <= n; ++i) factors.push_back(generated.single_path->factor(i));
    Interval certified = single_path_divergence_bounds(
        factors, factors.size(), generated.single_path->tail_bound(static_cast<std::size_t>(n)));
    bracket.lo = std::max(bracket.lo, certified.lo);
    bracket.hi = std::min(bracket.hi, certified.hi);
  }
  return bracket;
}

Interval single_path_divergence_bounds(const std::vector<Rat>& factors, std::size_t n_factors,
                                       const std::optional<Rat>& tail_bound) {
  if (n_factors > factors.size()) {
    throw PreconditionError("InvalidFactor", "fewer factors supplied than requested");
  }
  Rat partial = 1;
  for (std::size_t i = 0; i < n_factors; ++i) {
    if (factors[i] <= 0 || factors[i] > 1) {
      throw PreconditionError("InvalidFactor", "factor " + format_rational(factors[i]) + " outside (0, 1]");
    }
    partial *= factors[i];
  }
  Interval bounds;
  bounds.hi = partial;
  bounds.lo = 0;
  if (tail_bound) {
    if (*tail_bound < 0 || *tail_bound >= 1) {
      throw PreconditionError("TailBoundInvalid", "tail bound must lie in [0, 1), got " + format_rational(*tail_bound));
    }
    // prod_{i>N} p_i >= 1 - sum_{i>N} (1 - p_i) >= 1 - tail
    bounds.lo = partial * (1 - *tail_bound);
  }
  return bounds;
}

Decision check_as_termination(const Pars& system) {
  require_probabilistic(system);
  auto forms = nf_map(system);
  for (const auto& [s, nfs] : forms) {
    if (nfs.empty()) {
      return {Verdict::no, Witness{"state", {s}, "diverges with probability 1: no normal form reachable"}, {}};
    }
  }
  return {Verdict::yes, std::nullopt, "every state reaches a normal form; on a finite system divergence is 0"};
}

Decision check_as_termination(const ExploredSystem& window) {
  if (!window.frontier.empty()) {
    Witness witness;
    witness.kind = "frontier";
    witness.states.assign(window.frontier.begin(), window.frontier.end());
    witness.detail = "bounded exploration cannot certify almost-sure termination; "
                     "use a divergence bracket or a ranking certificate";
    return {Verdict::unknown, witness, "frontier present"};
  }
  return check_as_termination(window.core);
}

namespace {

std::string describe_reach(const ReachReport& report) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const auto& [t, p] : report.reach) {
    out << (first ? "" : ", ") << t << ": " << format_rational(p);
    first = false;
  }
  out << "}";
  return out.str();
}

}  // namespace

Decision check_as_local_convergence(const Pars& system) {
  require_probabilistic(system);
  auto reports = absorption_solve(system);
  for (std::size_t s = 0; s < system.size(); ++s) {
    if (system.is_normal_form(s)) continue;

    std::vector<StateId> successors;
    for (std::size_t r : system.out(s)) successors.push_back(system.rules()[r].to);

    // Each branch of each peak must reach one shared normal form surely.
    std::vector<std::optional<StateId>> sure_target(successors.size());
    for (std::size_t i = 0; i < successors.size(); ++i) {
      const ReachReport& report = reports.at(successors[i]);
      if (report.reach.size() == 1 && report.reach.begin()->second == 1) {
        sure_target[i] = report.reach.begin()->first;
      } else {
        Witness witness{"peak", {system.state(s), successors[i], successors[i]},
                        "reach(" + successors[i] + ") = " + describe_reach(report)};
        return {Verdict::no, witness, {}};
      }
    }
    for (std::size_t i = 0; i < successors.size(); ++i) {
      for (std::size_t j = i + 1; j < successors.size(); ++j) {
        if (*sure_target[i] != *sure_target[j]) {
          Witness witness{"peak", {system.state(s), successors[i], successors[j]},
                          "branches are sure for different normal forms " + *sure_target[i] + " vs " +
                              *sure_target[j]};
          return {Verdict::no, witness, {}};
        }
      }
    }
  }
  return {Verdict::yes, std::nullopt, {}};
}

Decision check_as_convergence(const Pars& system) {
  require_probabilistic(system);
  Decision termination = check_as_termination(system);
  if (termination.verdict != Verdict::yes) {
    Decision result = termination;
    result.note = "almost-sure termination fails";
    return result;
  }
  Decision confluence = check_confluence(system);
  if (confluence.verdict != Verdict::yes) {
    Decision result = confluence;
    result.note = "confluence fails";
    return result;
  }
  return {Verdict::yes, std::nullopt, "almost-surely terminating and confluent"};
}

ProbNormalizingReport check_prob_normalizing(const Pars& system) {
  require_probabilistic(system);
  ProbNormalizingReport report;
  report.decision = check_normalizing(system);
  if (report.decision.verdict == Verdict::yes) {
    auto reports = absorption_solve(system);
    for (std::size_t s = 0; s < system.size(); ++s) {
      const ReachReport& r = reports.at(system.state(s));
      // reach is keyed by name, so begin() is the smallest reachable normal form
      report.evidence.emplace_back(system.state(s), r.reach.begin()->first, r.reach.begin()->second);
    }
  }
  return report;
}

double MonteCarloReport::fraction(const StateId& normal_form) const {
  auto it = absorbed.find(normal_form);
  if (it == absorbed.end() || samples == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(samples);
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct ChunkCounts {
  std::vector<std::uint64_t> absorbed;
  std::uint64_t censored = 0;
  std::uint64_t frontier_hits = 0;
};

MonteCarloReport monte_carlo_impl(const Pars& system, const std::set<StateId>& frontier,
                                  const StateId& start, std::uint64_t max_steps, std::uint64_t samples,
                                  std::uint64_t seed) {
  require_probabilistic(system);
  if (samples == 0) throw PreconditionError("NoSamples", "samples must be >= 1");
  std::size_t start_index = system.index_of(start);

  std::vector<char> is_frontier(system.size(), 0);
  for (const auto& f : frontier) is_frontier[system.index_of(f)] = 1;

  // Cumulative transition weights as doubles; exactness does not matter for
  // an estimator, determinism does.
  std::vector<std::vector<std::pair<double, std::size_t>>> steps(system.size());
  for (std::size_t s = 0; s < system.size(); ++s) {
    double acc = 0.0;
    for (std::size_t r : system.out(s)) {
      acc += to_double(system.rules()[r].p);
      steps[s].emplace_back(acc, system.index_of(system.rules()[r].to));
    }
    if (!steps[s].empty()) steps[s].back().first = 1.0;
  }

  constexpr std::uint64_t kChunk = 8192;
  std::uint64_t chunk_count = (samples + kChunk - 1) / kChunk;

  auto run_chunk = [&](std::uint64_t chunk) {
    ChunkCounts counts;
    counts.absorbed.assign(system.size(), 0);
    std::mt19937_64 rng(mix64(seed ^ mix64(chunk + 1)));
    std::uint64_t begin = chunk * kChunk;
    std::uint64_t end = std::min(samples, begin + kChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      std::size_t state = start_index;
      bool resolved = false;
      for (std::uint64_t step = 0; step <= max_steps; ++step) {
        if (is_frontier[state]) {
          ++counts.frontier_hits;
          resolved = true;
          break;
        }
        if (system.is_normal_form(state)) {
          ++counts.absorbed[state];
          resolved = true;
          break;
        }
        if (step == max_steps) break;
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto& row = steps[state];
        std::size_t next = row.back().second;
        for (const auto& [cut, to] : row) {
          if (u < cut) {
            next = to;
            break;
          }
        }
        state = next;
      }
      if (!resolved) ++counts.censored;
    }
    return counts;
  };

  std::vector<ChunkCounts> per_chunk(chunk_count);
  unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(chunk_count));
  if (workers > 1) {
    std::vector<std::future<void>> futures;
    std::atomic<std::uint64_t> next_chunk{0};
    for (unsigned w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&]() {
        for (std::uint64_t c = next_chunk++; c < chunk_count; c = next_chunk++) {
          per_chunk[c] = run_chunk(c);
        }
      }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (std::uint64_t c = 0; c < chunk_count; ++c) per_chunk[c] = run_chunk(c);
  }

  MonteCarloReport report;
  report.start = start;
  report.samples = samples;
  report.max_steps = max_steps;
  report.seed = seed;
  std::vector<std::uint64_t> absorbed(system.size(), 0);
  for (const auto& counts : per_chunk) {
    for (std::size_t s = 0; s < system.size(); ++s) absorbed[s] += counts.absorbed[s];
    report.censored += counts.censored;
    report.frontier_hits += counts.frontier_hits;
  }
  for (std::size_t s = 0; s < system.size(); ++s) {
    if (absorbed[s] > 0) report.absorbed[system.state(s)] = absorbed[s];
  }
  return report;
}

}  // namespace

MonteCarloReport monte_carlo(const Pars& system, const StateId& start, std::uint64_t max_steps,
                             std::uint64_t samples, std::uint64_t seed) {
  return monte_carlo_impl(system, {}, start, max_steps, samples, seed);
}

MonteCarloReport monte_carlo(const ExploredSystem& window, const StateId& start,
                             std::uint64_t max_steps, std::uint64_t samples, std::uint64_t seed) {
  return monte_carlo_impl(window.core, window.frontier, start, max_steps, samples, seed);
}

}  // namespace parskit
