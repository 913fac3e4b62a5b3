#include "cli.hpp"

#include "parskit/analyzer.hpp"
#include "parskit/corpus.hpp"
#include "parskit/errors.hpp"
#include "parskit/prob.hpp"
#include "parskit/system.hpp"
#include "parskit/transformer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>

namespace parskit::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr int kSchema = 1;

// Reports must be byte-reproducible, so wall-clock timing only appears when
// asked for.
struct TimingContext {
  bool enabled = false;
  std::chrono::steady_clock::time_point start;
};
thread_local TimingContext g_timing;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[19];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return std::string("fnv1a:") + buffer;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// An input argument resolved to something analyzable. Corpus entries are
/// addressed as corpus:<name>; generated ones need --depth to become a
/// finite window.
struct Input {
  std::string label;
  std::optional<CorpusEntry> entry;
  std::optional<Pars> finite;
  std::optional<ExploredSystem> window;
  std::string digest;

  bool is_window() const { return window.has_value(); }
  const Pars& system() const { return window ? window->core : *finite; }
  bool has_frontier() const { return window && !window->frontier.empty(); }
};

Input resolve(const std::string& path, std::optional<std::size_t> depth) {
  Input input;
  input.label = path;
  if (path.rfind("corpus:", 0) == 0) {
    input.entry = builtin(path.substr(7));
    if (input.entry->generated && depth) {
      input.window = explore(*input.entry->generated, *depth);
      input.digest = fnv1a_hex(path + "@" + std::to_string(*depth) + "\n" + serialize(input.window->core));
    } else if (input.entry->system) {
      input.finite = input.entry->system;
      input.digest = fnv1a_hex(serialize(*input.finite));
    } else {
      throw PreconditionError("FrontierPresent",
                              "\"" + path + "\" is a generated system; pass --depth to explore a window");
    }
    return input;
  }
  std::string document = read_file(path);
  input.digest = fnv1a_hex(document);
  input.finite = load_system(document);
  return input;
}

ordered_json witness_json(const Witness& witness) {
  ordered_json j;
  j["kind"] = witness.kind;
  j["states"] = witness.states;
  if (!witness.detail.empty()) j["detail"] = witness.detail;
  return j;
}

ordered_json decision_json(const Decision& decision) {
  ordered_json j;
  j["verdict"] = to_string(decision.verdict);
  if (decision.witness) j["witness"] = witness_json(*decision.witness);
  if (!decision.note.empty()) j["note"] = decision.note;
  return j;
}

ordered_json rat_map_json(const std::map<StateId, Rat>& values) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : values) j[k] = format_rational(v);
  return j;
}

ordered_json reach_report_json(const ReachReport& report) {
  ordered_json j;
  j["start"] = report.start;
  j["reach"] = rat_map_json(report.reach);
  if (std::holds_alternative<Rat>(report.divergence)) {
    j["divergence"] = format_rational(std::get<Rat>(report.divergence));
  } else {
    const Interval& interval = std::get<Interval>(report.divergence);
    j["divergence"] = ordered_json{{"lo", format_rational(interval.lo)},
                                   {"hi", format_rational(interval.hi)}};
  }
  switch (report.method) {
    case ReachMethod::solve: j["method"] = "solve"; break;
    case ReachMethod::iterate: j["method"] = "iterate"; break;
    case ReachMethod::bracket: j["method"] = "bracket"; break;
  }
  return j;
}

ordered_json report_shell(const std::string& command, const Input& input) {
  ordered_json j;
  j["schema"] = kSchema;
  j["tool"] = "parskit";
  j["version"] = kVersion;
  j["command"] = command;
  j["input"] = ordered_json{{"source", input.label}, {"digest", input.digest}};
  return j;
}

void emit(const ordered_json& report, bool json, std::ostream& out, const std::string& text) {
  double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - g_timing.start)
          .count();
  if (json) {
    if (g_timing.enabled) {
      ordered_json timed = report;
      timed["timing_ms"] = elapsed_ms;
      out << timed.dump(2) << "\n";
    } else {
      out << report.dump(2) << "\n";
    }
  } else {
    out << text;
    if (g_timing.enabled) out << "timing: " << elapsed_ms << " ms\n";
  }
}

std::string describe_witness(const Witness& witness) {
  std::string text = witness.kind + " [";
  for (std::size_t i = 0; i < witness.states.size(); ++i) {
    if (i) text += ", ";
    text += witness.states[i];
  }
  text += "]";
  if (!witness.detail.empty()) text += " (" + witness.detail + ")";
  return text;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& path, bool json, std::ostream& out) {
  Input input;
  input.label = path;
  std::string document;
  if (path.rfind("corpus:", 0) == 0) {
    input = resolve(path, std::nullopt);
    document = serialize(input.system());
  } else {
    document = read_file(path);
    input.digest = fnv1a_hex(document);
  }

  ordered_json report = report_shell("validate", input);
  Pars system;
  try {
    system = load_system(document);
  } catch (const ParseError& e) {
    report["results"] = ordered_json{{"ok", false}, {"error", e.code()}, {"message", e.what()}};
    emit(report, json, out, std::string("invalid: ") + e.what() + "\n");
    return 2;
  } catch (const ValidationError& e) {
    report["results"] = ordered_json{{"ok", false}, {"error", e.code()}, {"message", e.what()}};
    emit(report, json, out, std::string("invalid: ") + e.what() + "\n");
    return 2;
  }
  ValidationReport validation = validate(system);
  ordered_json issues = ordered_json::array();
  for (const auto& issue : validation.issues) {
    issues.push_back(ordered_json{{"severity", issue.severity == Severity::error ? "error" : "warning"},
                                  {"code", issue.code},
                                  {"subject", issue.subject},
                                  {"message", issue.message}});
  }
  report["results"] = ordered_json{{"ok", validation.ok()},
                                   {"states", system.states().size()},
                                   {"rules", system.rules().size()},
                                   {"issues", issues}};
  std::ostringstream text;
  text << (validation.ok() ? "ok" : "invalid") << ": " << system.states().size() << " states, "
       << system.rules().size() << " rules\n";
  for (const auto& issue : validation.issues) {
    text << "  " << issue.code << " at " << issue.subject << ": " << issue.message << "\n";
  }
  emit(report, json, out, text.str());
  return validation.ok() ? 0 : 2;
}

// ----------------------------------------------------------------- analyze

struct PropertyRun {
  std::string name;
  std::function<Decision()> finite_check;
  std::function<Decision()> window_check;
  bool probabilistic = false;
};

int cmd_analyze(const std::string& path, std::vector<std::string> properties,
                std::optional<std::size_t> depth, bool json, std::ostream& out) {
  Input input = resolve(path, depth);
  const Pars& system = input.system();
  const bool probabilistic = system.kind() == SystemKind::probabilistic;

  std::vector<PropertyRun> runs;
  auto add = [&](std::string name, auto finite_fn, auto window_fn, bool needs_prob) {
    runs.push_back(PropertyRun{std::move(name), finite_fn, window_fn, needs_prob});
  };
  const ExploredSystem* window = input.window ? &*input.window : nullptr;
  add("loc-confluence", [&] { return check_local_confluence(system); },
      [=] { return check_local_confluence(*window); }, false);
  add("confluence", [&] { return check_confluence(system); },
      [=] { return check_confluence(*window); }, false);
  add("termination", [&] { return check_termination(system); },
      [=] { return check_termination(*window); }, false);
  add("as-loc-convergence", [&] { return check_as_local_convergence(system); },
      [=] { return check_as_local_convergence(window->core); }, true);
  add("as-convergence", [&] { return check_as_convergence(system); },
      [=] { return check_as_convergence(window->core); }, true);
  add("as-termination", [&] { return check_as_termination(system); },
      [=] { return check_as_termination(*window); }, true);
  add("normalizing", [&] { return check_normalizing(system); },
      [=] { return check_normalizing(*window); }, false);
  add("unique-nf", [&] { return check_unique_nf(system); },
      [=] { return check_unique_nf(*window); }, false);
  add("prob-normalizing", [&] { return check_prob_normalizing(system).decision; },
      [=] { return check_prob_normalizing(window->core).decision; }, true);

  std::vector<std::string> selected = std::move(properties);
  if (selected.empty()) {
    // Default: the six-property overview row (classical only for plain systems).
    selected = {"loc-confluence", "confluence", "termination"};
    if (probabilistic) {
      selected.insert(selected.end(), {"as-loc-convergence", "as-convergence", "as-termination"});
    }
  }

  ordered_json report = report_shell("analyze", input);
  ordered_json results = ordered_json::array();
  std::ostringstream text;
  for (const auto& name : selected) {
    auto it = std::find_if(runs.begin(), runs.end(), [&](const PropertyRun& r) { return r.name == name; });
    if (it == runs.end()) throw Error("UsageError", "unknown property \"" + name + "\"");
    if (it->probabilistic && !probabilistic) {
      throw PreconditionError("NotProbabilistic", "property " + name + " needs a probabilistic system");
    }
    Decision decision;
    if (input.is_window() && input.has_frontier()) {
      decision = it->probabilistic && name != "as-termination"
                     ? Decision{Verdict::unknown, std::nullopt, "frontier present"}
                     : it->window_check();
      if (decision.verdict == Verdict::unknown && !decision.witness) {
        Witness witness;
        witness.kind = "frontier";
        witness.states.assign(input.window->frontier.begin(), input.window->frontier.end());
        decision.witness = witness;
      }
    } else {
      decision = it->finite_check();
    }
    ordered_json entry = decision_json(decision);
    entry["property"] = name;
    // keep "property" first for readability
    ordered_json ordered;
    ordered["property"] = name;
    for (auto& [k, v] : entry.items()) {
      if (k != "property") ordered[k] = v;
    }
    results.push_back(ordered);
    text << name << ": " << to_string(decision.verdict);
    if (decision.witness) text << "  witness " << describe_witness(*decision.witness);
    if (!decision.note.empty()) text << "  [" << decision.note << "]";
    text << "\n";
  }
  report["results"] = results;
  emit(report, json, out, text.str());
  return 0;
}

// -------------------------------------------------------------------- prob

int cmd_prob(const std::string& path, const StateId& from, std::optional<StateId> to,
             std::optional<std::uint64_t> iterate, std::optional<std::size_t> depth, bool json,
             std::ostream& out) {
  Input input = resolve(path, depth);
  ordered_json report = report_shell("prob", input);
  std::ostringstream text;

  if (input.is_window() && input.has_frontier()) {
    // Bounded window: reach values are settled lower bounds, divergence is a
    // certified interval.
    std::uint64_t steps = iterate.value_or(input.window->depth);
    PnState pn = pn_iterate(*input.window, from, steps);
    Interval bracket = divergence_bracket(*input.entry->generated, from, input.window->depth, steps);
    ReachReport reach{from, pn.settled, bracket, ReachMethod::bracket};
    ordered_json j = reach_report_json(reach);
    j["steps"] = steps;
    report["results"] = j;
    text << "start " << from << " after " << steps << " steps (window depth "
         << input.window->depth << ")\n";
    for (const auto& [t, p] : pn.settled) {
      text << "  reach " << t << " >= " << format_rational(p) << " (~" << to_double(p) << ")\n";
    }
    text << "  divergence in [" << format_rational(bracket.lo) << ", " << format_rational(bracket.hi)
         << "] ~ [" << to_double(bracket.lo) << ", " << to_double(bracket.hi) << "]\n";
    emit(report, json, out, text.str());
    return 0;
  }

  const Pars& system = input.system();
  if (to) {
    Rat p;
    try {
      p = reach_probability(system, from, *to);
    } catch (const PreconditionError& e) {
      if (e.code() == "TargetNotNormalForm") {
        throw PreconditionError("TargetNotNormalForm",
                                std::string(e.what()) +
                                    "; summing path probabilities into a reducible state counts "
                                    "every extension of every visit, and the total can exceed 1");
      }
      throw;
    }
    report["results"] = ordered_json{{"from", from}, {"to", *to}, {"p", format_rational(p)}};
    text << "P(" << from << " ->* " << *to << ") = " << format_rational(p) << " (~" << to_double(p)
         << ")\n";
    emit(report, json, out, text.str());
    return 0;
  }

  if (iterate) {
    ordered_json trace = ordered_json::array();
    for (std::uint64_t n = 0; n <= *iterate; ++n) {
      PnState pn = pn_iterate(system, from, n);
      trace.push_back(ordered_json{{"n", n},
                                   {"settled", format_rational(pn.settled_total())},
                                   {"alive", format_rational(pn.alive_total())}});
    }
    PnState final_state = pn_iterate(system, from, *iterate);
    report["results"] = ordered_json{{"start", from},
                                     {"trace", trace},
                                     {"settled", rat_map_json(final_state.settled)},
                                     {"alive", rat_map_json(final_state.alive)}};
    text << "P^(n) trace from " << from << "\n";
    for (const auto& step : trace) {
      text << "  n=" << step["n"] << " settled=" << step["settled"].get<std::string>()
           << " alive=" << step["alive"].get<std::string>() << "\n";
    }
    emit(report, json, out, text.str());
    return 0;
  }

  auto reports = absorption_solve(system);
  const ReachReport& reach = reports.at(from);
  report["results"] = reach_report_json(reach);
  text << "start " << from << "\n";
  for (const auto& [t, p] : reach.reach) {
    text << "  reach " << t << " = " << format_rational(p) << " (~" << to_double(p) << ")\n";
  }
  text << "  divergence = " << format_rational(reach.divergence_exact()) << " (~"
       << to_double(reach.divergence_exact()) << ")\n";
  emit(report, json, out, text.str());
  return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& path, const StateId& from, std::uint64_t samples,
                 std::uint64_t steps, std::uint64_t seed, std::optional<std::size_t> depth,
                 bool json, std::ostream& out) {
  Input input = resolve(path, depth);
  MonteCarloReport mc = input.is_window() ? monte_carlo(*input.window, from, steps, samples, seed)
                                          : monte_carlo(input.system(), from, steps, samples, seed);
  ordered_json report = report_shell("simulate", input);
  ordered_json absorbed = ordered_json::object();
  for (const auto& [t, count] : mc.absorbed) {
    absorbed[t] = ordered_json{{"count", count}, {"fraction", mc.fraction(t)}};
  }
  report["results"] = ordered_json{{"start", mc.start},
                                   {"samples", mc.samples},
                                   {"max_steps", mc.max_steps},
                                   {"seed", mc.seed},
                                   {"absorbed", absorbed},
                                   {"censored", mc.censored},
                                   {"frontier_hits", mc.frontier_hits}};
  std::ostringstream text;
  text << "simulated " << mc.samples << " runs from " << from << " (seed " << mc.seed << ", max "
       << mc.max_steps << " steps)\n";
  for (const auto& [t, count] : mc.absorbed) {
    text << "  absorbed at " << t << ": " << count << " (" << mc.fraction(t) << ")\n";
  }
  text << "  censored: " << mc.censored << " ("
       << static_cast<double>(mc.censored) / static_cast<double>(mc.samples) << ")\n";
  if (mc.frontier_hits) text << "  frontier hits: " << mc.frontier_hits << "\n";
  emit(report, json, out, text.str());
  return 0;
}

// ----------------------------------------------------------------- certify

LyapunovCertificate parse_certificate(const std::string& document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("BadJson", e.what());
  }
  if (!doc.is_object() || !doc.contains("valuation") || !doc.contains("epsilon")) {
    throw ParseError("BadDocument", "certificate needs \"valuation\" and \"epsilon\"");
  }
  LyapunovCertificate certificate;
  certificate.epsilon = parse_rational(doc["epsilon"].get<std::string>());
  const auto& valuation = doc["valuation"];
  if (valuation.is_object() && valuation.contains("builtin")) {
    certificate.name = valuation["builtin"].get<std::string>();
    certificate.valuation = builtin_valuation(certificate.name);
  } else if (valuation.is_object()) {
    std::map<StateId, Rat> values;
    for (const auto& [state, value] : valuation.items()) {
      values[state] = parse_rational(value.get<std::string>());
    }
    certificate = LyapunovCertificate::from_map(std::move(values), certificate.epsilon);
  } else {
    throw ParseError("BadDocument", "valuation must be a map or {\"builtin\": name}");
  }
  if (doc.contains("argument")) certificate.argument = doc["argument"].get<std::string>();
  return certificate;
}

int cmd_certify(const std::string& path, const std::string& certificate_path,
                std::optional<std::size_t> depth, bool json, std::ostream& out) {
  Input input = resolve(path, depth);
  LyapunovCertificate certificate;
  if (certificate_path == "corpus") {
    if (!input.entry || !input.entry->certificate) {
      throw Error("UsageError", "\"" + path + "\" ships no certificate");
    }
    certificate = *input.entry->certificate;
  } else {
    certificate = parse_certificate(read_file(certificate_path));
  }

  MarginReport margins = input.is_window() ? check_lyapunov(*input.window, certificate)
                                           : check_lyapunov(input.system(), certificate);
  auto [state, margin] = min_margin(margins);

  ordered_json report = report_shell("certify", input);
  report["results"] =
      ordered_json{{"verdict", to_string(margins.verdict)},
                   {"coverage", margins.coverage == Coverage::full
                                    ? "full"
                                    : "depth " + std::to_string(margins.depth)},
                   {"epsilon", format_rational(margins.epsilon)},
                   {"states_checked", margins.states_checked},
                   {"min_margin", ordered_json{{"state", state}, {"margin", format_rational(margin)}}},
                   {"note", margins.note}};
  std::ostringstream text;
  text << "certificate " << to_string(margins.verdict) << " (" << margins.states_checked
       << " reducible states, epsilon " << format_rational(margins.epsilon) << ")\n";
  text << "  min margin " << format_rational(margin) << " at " << state << "\n";
  if (!certificate.argument.empty()) text << "  argument: " << certificate.argument << "\n";
  text << "  " << margins.note << "\n";
  emit(report, json, out, text.str());
  return 0;
}

// --------------------------------------------------------------- transform

std::pair<std::map<StateId, StateId>, std::optional<TransformMode>> parse_mapping_document(
    const std::string& document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("BadJson", e.what());
  }
  if (!doc.is_object() || !doc.contains("G") || !doc["G"].is_object()) {
    throw ParseError("BadDocument", "mapping needs a \"G\" object");
  }
  std::map<StateId, StateId> g;
  for (const auto& [from, to] : doc["G"].items()) g[from] = to.get<std::string>();
  std::optional<TransformMode> mode;
  if (doc.contains("mode")) {
    std::string text = doc["mode"].get<std::string>();
    if (text == "C") {
      mode = TransformMode::C;
    } else if (text == "Cprime") {
      mode = TransformMode::Cprime;
    } else {
      throw ParseError("BadDocument", "mode must be \"C\" or \"Cprime\"");
    }
  }
  return {std::move(g), mode};
}

int cmd_transform(const std::string& source_path, std::optional<std::string> target_path,
                  std::optional<std::string> map_path, std::optional<std::string> mode_text,
                  std::optional<std::string> cert_path, std::optional<std::size_t> depth, bool json,
                  std::ostream& out) {
  Input source = resolve(source_path, depth);
  if (source.is_window()) require_frontier_free(*source.window);

  TransformMapping mapping;
  if (!target_path && !map_path) {
    if (!source.entry || !source.entry->mapping) {
      throw Error("UsageError", "no target/--map given and \"" + source_path + "\" ships no mapping");
    }
    mapping = *source.entry->mapping;
  } else {
    if (!target_path || !map_path) {
      throw Error("UsageError", "transform needs both a target system and --map (or a corpus entry "
                                "with a shipped mapping)");
    }
    Input target = resolve(*target_path, std::nullopt);
    auto [g, file_mode] = parse_mapping_document(read_file(*map_path));
    mapping.source = source.system();
    mapping.target = target.system();
    mapping.g = std::move(g);
    mapping.mode = TransformMode::C;
    if (file_mode) mapping.mode = *file_mode;
  }
  if (mode_text) {
    mapping.mode = *mode_text == "Cprime" ? TransformMode::Cprime : TransformMode::C;
  }

  ConditionReport conditions = check_conditions(mapping);

  // Almost-sure-termination evidence: an explicit certificate wins, a corpus
  // certificate is the default, and a finite probabilistic source can be
  // decided directly.
  Decision evidence{Verdict::unknown, std::nullopt, "no termination evidence supplied"};
  if (cert_path) {
    LyapunovCertificate certificate =
        *cert_path == "corpus" && source.entry && source.entry->certificate
            ? *source.entry->certificate
            : parse_certificate(read_file(*cert_path));
    MarginReport margins = check_lyapunov(mapping.source, certificate);
    evidence = margins.holds()
                   ? Decision{Verdict::yes, std::nullopt, "ranking certificate: " + margins.note}
                   : Decision{Verdict::unknown, std::nullopt, "certificate refuted: " + margins.note};
  } else if (source.entry && source.entry->certificate) {
    MarginReport margins = check_lyapunov(mapping.source, *source.entry->certificate);
    evidence = margins.holds()
                   ? Decision{Verdict::yes, std::nullopt, "shipped certificate: " + margins.note}
                   : Decision{Verdict::unknown, std::nullopt, "certificate refuted: " + margins.note};
  } else if (mapping.source.kind() == SystemKind::probabilistic) {
    evidence = check_as_termination(mapping.source);
    evidence.note = "decided structurally on the finite source";
  }

  ConclusionReport conclusion = conclude(conditions, evidence);

  ordered_json report = report_shell("transform", source);
  ordered_json condition_json = ordered_json::object();
  for (const auto& [name, decision] : conditions.conditions) {
    condition_json[name] = decision_json(decision);
  }
  report["results"] = ordered_json{{"mode", to_string(mapping.mode)},
                                   {"conditions", condition_json},
                                   {"target_confluence", decision_json(conditions.target_confluence)},
                                   {"as_termination_evidence", decision_json(evidence)},
                                   {"conclusion", to_string(conclusion.conclusion)},
                                   {"reason", conclusion.reason}};
  std::ostringstream text;
  text << "mode " << to_string(mapping.mode) << "\n";
  for (const auto& [name, decision] : conditions.conditions) {
    text << "  " << name << ": " << to_string(decision.verdict);
    if (decision.witness) text << "  witness " << describe_witness(*decision.witness);
    text << "\n";
  }
  text << "  target confluence: " << to_string(conditions.target_confluence.verdict) << "\n";
  text << "  a.s. termination evidence: " << to_string(evidence.verdict);
  if (!evidence.note.empty()) text << " (" << evidence.note << ")";
  text << "\n";
  text << "conclusion: " << to_string(conclusion.conclusion) << " -- " << conclusion.reason << "\n";
  emit(report, json, out, text.str());
  return 0;
}

// -------------------------------------------------------------- export-dot

int cmd_export_dot(const std::string& path, std::optional<std::size_t> depth,
                   std::optional<std::string> out_path, std::ostream& out) {
  Input input = resolve(path, depth);
  const Pars& system = input.system();
  std::ostringstream dot;
  dot << "digraph pars {\n  rankdir=LR;\n";
  for (const auto& s : system.states()) {
    dot << "  \"" << s << "\"";
    if (input.window && input.window->is_frontier(s)) dot << " [shape=box, style=dashed]";
    dot << ";\n";
  }
  for (const auto& rule : system.rules()) {
    dot << "  \"" << rule.from << "\" -> \"" << rule.to << "\"";
    if (system.kind() == SystemKind::probabilistic) {
      dot << " [label=\"" << format_rational(rule.p) << "\"]";
    }
    dot << ";\n";
  }
  dot << "}\n";
  if (out_path) {
    std::ofstream file(*out_path, std::ios::binary);
    if (!file) throw Error("IoError", "cannot write \"" + *out_path + "\"");
    file << dot.str();
  } else {
    out << dot.str();
  }
  return 0;
}

// ------------------------------------------------------------------ export

ordered_json expected_json(const ExpectedRow& row) {
  auto cell = [](const std::optional<bool>& value) {
    return value ? ordered_json(*value ? "+" : "-") : ordered_json(nullptr);
  };
  return ordered_json{{"loc_confluence", cell(row.loc_confluence)},
                      {"confluence", cell(row.confluence)},
                      {"termination", cell(row.termination)},
                      {"as_loc_convergence", cell(row.as_loc_convergence)},
                      {"as_convergence", cell(row.as_convergence)},
                      {"as_termination", cell(row.as_termination)}};
}

int cmd_export(const std::string& path, std::optional<std::string> out_path,
               std::optional<std::string> annotations_path, std::optional<std::size_t> depth,
               std::ostream& out) {
  Input input = resolve(path, depth);
  std::string document = serialize(input.system());
  if (out_path) {
    std::ofstream file(*out_path, std::ios::binary);
    if (!file) throw Error("IoError", "cannot write \"" + *out_path + "\"");
    file << document;
  } else {
    out << document;
  }
  if (annotations_path) {
    if (!input.entry) throw Error("UsageError", "annotation sidecars exist for corpus entries only");
    const CorpusEntry& entry = *input.entry;
    ordered_json sidecar;
    sidecar["name"] = entry.name;
    sidecar["expected"] = expected_json(entry.expected);
    sidecar["notes"] = entry.notes;
    if (input.window) {
      sidecar["window"] = ordered_json{
          {"depth", input.window->depth},
          {"frontier", std::vector<StateId>(input.window->frontier.begin(), input.window->frontier.end())}};
    }
    if (entry.certificate) {
      sidecar["certificate"] = ordered_json{{"valuation", ordered_json{{"builtin", entry.certificate->name}}},
                                            {"epsilon", format_rational(entry.certificate->epsilon)},
                                            {"argument", entry.certificate->argument}};
    }
    if (entry.mapping) {
      ordered_json g = ordered_json::object();
      for (const auto& [from, to] : entry.mapping->g) g[from] = to;
      sidecar["mapping"] = ordered_json{{"mode", to_string(entry.mapping->mode)},
                                        {"target", ordered_json::parse(serialize(entry.mapping->target))},
                                        {"G", g}};
    }
    std::ofstream file(*annotations_path, std::ios::binary);
    if (!file) throw Error("IoError", "cannot write \"" + *annotations_path + "\"");
    file << sidecar.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"probabilistic abstract reduction system toolkit"};
  app.require_subcommand(1);

  std::string path;
  std::string target;
  std::string map_path;
  std::string mode;
  std::string cert_path;
  std::string out_path;
  std::string annotations_path;
  std::string from;
  std::string to;
  std::vector<std::string> properties;
  std::uint64_t samples = 100000;
  std::uint64_t steps = 1000;
  std::uint64_t iterate = 0;
  std::size_t depth = 0;
  std::uint64_t seed = 0;
  bool json = false;
  bool timing = false;

  const char* env_seed = std::getenv("PARSKIT_SEED");
  if (env_seed) seed = std::strtoull(env_seed, nullptr, 10);

  auto add_depth = [&](CLI::App* cmd) { cmd->add_option("--depth", depth, "exploration depth for generated systems"); };
  auto add_json = [&](CLI::App* cmd) {
    cmd->add_flag("--json", json, "emit the full JSON report");
    cmd->add_flag("--timing", timing, "include wall-clock timing (breaks byte-stability)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a system document");
  validate->add_option("input", path)->required();
  add_json(validate);

  CLI::App* analyze = app.add_subcommand("analyze", "decide rewriting properties");
  analyze->add_option("input", path)->required();
  analyze->add_option("--properties", properties, "subset of properties")->delimiter(',');
  add_depth(analyze);
  add_json(analyze);

  CLI::App* prob = app.add_subcommand("prob", "exact reaching/divergence probabilities");
  prob->add_option("input", path)->required();
  prob->add_option("--from", from)->required();
  prob->add_option("--to", to);
  prob->add_option("--iterate", iterate, "emit the step-n distribution trace");
  add_depth(prob);
  add_json(prob);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates");
  simulate->add_option("input", path)->required();
  simulate->add_option("--from", from)->required();
  simulate->add_option("--samples", samples);
  simulate->add_option("--steps", steps);
  simulate->add_option("--seed", seed);
  add_depth(simulate);
  add_json(simulate);

  CLI::App* certify = app.add_subcommand("certify", "check a ranking certificate");
  certify->add_option("input", path)->required();
  certify->add_option("--certificate", cert_path, "certificate file, or \"corpus\" for the shipped one")
      ->required();
  add_depth(certify);
  add_json(certify);

  CLI::App* transform = app.add_subcommand("transform", "check transfer conditions and conclude");
  transform->add_option("source", path)->required();
  transform->add_option("target", target);
  transform->add_option("--map", map_path, "mapping document with G (and optionally mode)");
  transform->add_option("--mode", mode)->check(CLI::IsMember({"C", "Cprime"}));
  transform->add_option("--as-term-cert", cert_path,
                        "ranking certificate for the source, or \"corpus\"");
  add_depth(transform);
  add_json(transform);

  CLI::App* export_dot = app.add_subcommand("export-dot", "emit the rule graph in DOT form");
  export_dot->add_option("input", path)->required();
  export_dot->add_option("-o,--out", out_path);
  add_depth(export_dot);

  CLI::App* export_cmd = app.add_subcommand("export", "emit canonical JSON (plus corpus annotations)");
  export_cmd->add_option("input", path)->required();
  export_cmd->add_option("-o,--out", out_path);
  export_cmd->add_option("--annotations", annotations_path);
  add_depth(export_cmd);

  try {
    std::vector<const char*> argv;
    argv.push_back("parskit");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  g_timing = {timing, std::chrono::steady_clock::now()};

  auto opt_str = [](const std::string& s) {
    return s.empty() ? std::optional<std::string>{} : std::optional<std::string>{s};
  };
  std::optional<std::size_t> depth_opt;
  if (depth > 0 || (analyze->count("--depth") || prob->count("--depth") || simulate->count("--depth") ||
                    certify->count("--depth") || transform->count("--depth") ||
                    export_dot->count("--depth") || export_cmd->count("--depth"))) {
    depth_opt = depth;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(path, json, out);
    if (app.got_subcommand(analyze)) return cmd_analyze(path, properties, depth_opt, json, out);
    if (app.got_subcommand(prob)) {
      std::optional<std::uint64_t> iterate_opt;
      if (prob->count("--iterate")) iterate_opt = iterate;
      return cmd_prob(path, from, opt_str(to), iterate_opt, depth_opt, json, out);
    }
    if (app.got_subcommand(simulate)) {
      return cmd_simulate(path, from, samples, steps, seed, depth_opt, json, out);
    }
    if (app.got_subcommand(certify)) return cmd_certify(path, cert_path, depth_opt, json, out);
    if (app.got_subcommand(transform)) {
      std::optional<std::string> mode_opt = opt_str(mode);
      return cmd_transform(path, opt_str(target), opt_str(map_path), mode_opt, opt_str(cert_path),
                           depth_opt, json, out);
    }
    if (app.got_subcommand(export_dot)) return cmd_export_dot(path, depth_opt, opt_str(out_path), out);
    if (app.got_subcommand(export_cmd)) {
      return cmd_export(path, opt_str(out_path), opt_str(annotations_path), depth_opt, out);
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    if (e.code() == "UnknownEntry") {
      err << "error: " << e.what() << "\n";
      return 1;
    }
    err << "refused: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

RunResult run_captured(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  RunResult result;
  result.exit_code = run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

}  // namespace parskit::cli
