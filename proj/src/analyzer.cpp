#include "parskit/analyzer.hpp"

#include "parskit/errors.hpp"

#include <algorithm>
#include <deque>

namespace parskit {

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    default: return "unknown";
  }
}

Reachability::Reachability(const Pars& system) : n_(system.size()) {
  words_ = (n_ + 63) / 64;
  bits_.assign(n_ * words_, 0);
  // BFS per state; n is at most a few thousand for corpus-scale systems.
  std::vector<std::size_t> queue;
  std::vector<char> visited(n_);
  for (std::size_t s = 0; s < n_; ++s) {
    std::fill(visited.begin(), visited.end(), 0);
    queue.assign(1, s);
    visited[s] = 1;
    while (!queue.empty()) {
      std::size_t u = queue.back();
      queue.pop_back();
      bits_[s * words_ + u / 64] |= std::uint64_t{1} << (u % 64);
      for (std::size_t r : system.out(u)) {
        std::size_t v = system.index_of(system.rules()[r].to);
        if (!visited[v]) {
          visited[v] = 1;
          queue.push_back(v);
        }
      }
    }
  }
}

bool Reachability::reaches(std::size_t from, std::size_t to) const {
  return (bits_[from * words_ + to / 64] >> (to % 64)) & 1U;
}

bool Reachability::join_exists(std::size_t a, std::size_t b) const {
  for (std::size_t w = 0; w < words_; ++w) {
    if (bits_[a * words_ + w] & bits_[b * words_ + w]) return true;
  }
  return false;
}

std::optional<std::size_t> Reachability::first_join(std::size_t a, std::size_t b) const {
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t common = bits_[a * words_ + w] & bits_[b * words_ + w];
    if (common) {
      unsigned bit = static_cast<unsigned>(__builtin_ctzll(common));
      return w * 64 + bit;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> Reachability::reachable_from(std::size_t from) const {
  std::vector<std::size_t> result;
  for (std::size_t t = 0; t < n_; ++t) {
    if (reaches(from, t)) result.push_back(t);
  }
  return result;
}

Reachability star_closure(const Pars& system) { return Reachability(system); }

std::map<StateId, std::set<StateId>> nf_map(const Pars& system) {
  Reachability closure(system);
  std::map<StateId, std::set<StateId>> result;
  for (std::size_t s = 0; s < system.size(); ++s) {
    std::set<StateId>& forms = result[system.state(s)];
    for (std::size_t t : closure.reachable_from(s)) {
      if (system.is_normal_form(t)) forms.insert(system.state(t));
    }
  }
  return result;
}

namespace {

/// Lexicographically smallest shortest path from one of `starts` back to
/// `target`, where predecessors expand in state order. Used for cycle
/// witnesses: a cycle through state c is c -> start -> ... -> c.
std::vector<std::size_t> shortest_path(const Pars& system, const std::vector<std::size_t>& starts,
                                       std::size_t target) {
  std::vector<int> parent(system.size(), -2);
  std::deque<std::size_t> queue;
  for (std::size_t s : starts) {
    if (parent[s] == -2) {
      parent[s] = -1;
      queue.push_back(s);
    }
    if (s == target) return {target};
  }
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t r : system.out(u)) {
      std::size_t v = system.index_of(system.rules()[r].to);
      if (parent[v] == -2) {
        parent[v] = static_cast<int>(u);
        if (v == target) {
          std::vector<std::size_t> path{v};
          for (int p = parent[v]; p >= 0; p = parent[static_cast<std::size_t>(p)]) {
            path.push_back(static_cast<std::size_t>(p));
          }
          std::reverse(path.begin(), path.end());
          return path;
        }
        queue.push_back(v);
      }
    }
  }
  return {};
}

Decision refuse_window(const ExploredSystem& window) {
  Witness witness;
  witness.kind = "frontier";
  witness.states.assign(window.frontier.begin(), window.frontier.end());
  witness.detail = "bounded exploration to depth " + std::to_string(window.depth) +
                   " cannot certify a global property";
  return {Verdict::unknown, witness, "frontier present"};
}

}  // namespace

Decision check_termination(const Pars& system) {
  Reachability closure(system);
  // A state lies on a cycle iff some direct successor reaches it back.
  for (std::size_t s = 0; s < system.size(); ++s) {
    std::vector<std::size_t> successors;
    for (std::size_t r : system.out(s)) {
      successors.push_back(system.index_of(system.rules()[r].to));
    }
    bool cyclic = std::any_of(successors.begin(), successors.end(),
                              [&](std::size_t v) { return closure.reaches(v, s); });
    if (!cyclic) continue;
    std::vector<std::size_t> path = shortest_path(system, successors, s);
    Witness witness;
    witness.kind = "cycle";
    witness.states.push_back(system.state(s));
    for (std::size_t v : path) witness.states.push_back(system.state(v));
    witness.detail = "infinite path by repetition";
    return {Verdict::no, witness, {}};
  }
  return {Verdict::yes, std::nullopt, "rule graph is acyclic"};
}

Decision check_normalizing(const Pars& system) {
  auto forms = nf_map(system);
  for (const auto& [s, nfs] : forms) {
    if (nfs.empty()) {
      return {Verdict::no, Witness{"state", {s}, "no normal form reachable"}, {}};
    }
  }
  return {Verdict::yes, std::nullopt, {}};
}

Decision check_local_confluence(const Pars& system) {
  Reachability closure(system);
  for (std::size_t s = 0; s < system.size(); ++s) {
    const auto& rules = system.out(s);
    for (std::size_t i = 0; i < rules.size(); ++i) {
      std::size_t a = system.index_of(system.rules()[rules[i]].to);
      for (std::size_t j = i; j < rules.size(); ++j) {
        std::size_t b = system.index_of(system.rules()[rules[j]].to);
        if (!closure.join_exists(a, b)) {
          Witness witness{"peak", {system.state(s), system.state(a), system.state(b)},
                          "one-step divergence with disjoint cones"};
          return {Verdict::no, witness, {}};
        }
      }
    }
  }
  return {Verdict::yes, std::nullopt, {}};
}

Decision check_confluence(const Pars& system) {
  Reachability closure(system);
  for (std::size_t s = 0; s < system.size(); ++s) {
    std::vector<std::size_t> cone = closure.reachable_from(s);
    for (std::size_t i = 0; i < cone.size(); ++i) {
      for (std::size_t j = i; j < cone.size(); ++j) {
        if (!closure.join_exists(cone[i], cone[j])) {
          Witness witness{"peak", {system.state(s), system.state(cone[i]), system.state(cone[j])},
                          "multi-step divergence with disjoint cones"};
          return {Verdict::no, witness, {}};
        }
      }
    }
  }
  return {Verdict::yes, std::nullopt, {}};
}

Decision check_unique_nf(const Pars& system) {
  auto forms = nf_map(system);
  for (const auto& [s, nfs] : forms) {
    if (nfs.size() != 1) {
      Witness witness;
      witness.kind = "nf_set";
      witness.states.push_back(s);
      witness.states.insert(witness.states.end(), nfs.begin(), nfs.end());
      witness.detail = nfs.empty() ? "no normal form" : "multiple normal forms";
      return {Verdict::no, witness, {}};
    }
  }
  return {Verdict::yes, std::nullopt, {}};
}

std::vector<std::vector<StateId>> convertibility_classes(const Pars& system) {
  std::vector<std::size_t> parent(system.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& rule : system.rules()) {
    std::size_t a = find(system.index_of(rule.from));
    std::size_t b = find(system.index_of(rule.to));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::vector<StateId>> grouped;
  for (std::size_t i = 0; i < system.size(); ++i) {
    grouped[find(i)].push_back(system.state(i));
  }
  std::vector<std::vector<StateId>> classes;
  for (auto& [root, members] : grouped) classes.push_back(std::move(members));
  return classes;  // members already sorted (index order = name order)
}

Decision check_termination(const ExploredSystem& window) {
  return window.frontier.empty() ? check_termination(window.core) : refuse_window(window);
}
Decision check_normalizing(const ExploredSystem& window) {
  return window.frontier.empty() ? check_normalizing(window.core) : refuse_window(window);
}
Decision check_local_confluence(const ExploredSystem& window) {
  return window.frontier.empty() ? check_local_confluence(window.core) : refuse_window(window);
}
Decision check_confluence(const ExploredSystem& window) {
  return window.frontier.empty() ? check_confluence(window.core) : refuse_window(window);
}
Decision check_unique_nf(const ExploredSystem& window) {
  return window.frontier.empty() ? check_unique_nf(window.core) : refuse_window(window);
}

}  // namespace parskit
