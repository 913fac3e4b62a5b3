#include "parskit/transformer.hpp"

#include "parskit/errors.hpp"

#include <set>

namespace parskit {

std::string to_string(TransformMode mode) { return mode == TransformMode::C ? "C" : "Cprime"; }

const StateId& TransformMapping::apply(const StateId& s) const {
  auto it = g.find(s);
  if (it == g.end()) {
    throw PreconditionError("PartialMapping", "G is undefined on state \"" + s + "\"");
  }
  return it->second;
}

const Pars& require_frontier_free(const ExploredSystem& window) {
  if (!window.frontier.empty()) {
    throw PreconditionError("FrontierPresent",
                            "window explored to depth " + std::to_string(window.depth) +
                                " has " + std::to_string(window.frontier.size()) +
                                " unexpanded states; transfer conditions need a complete system");
  }
  return window.core;
}

bool ConditionReport::all_yes() const {
  for (const auto& [name, decision] : conditions) {
    if (decision.verdict != Verdict::yes) return false;
  }
  return true;
}

std::string ConditionReport::first_failure() const {
  for (const auto& [name, decision] : conditions) {
    if (decision.verdict != Verdict::yes) return name;
  }
  return "";
}

namespace {

std::map<StateId, std::size_t> class_index(const Pars& system) {
  std::map<StateId, std::size_t> index;
  auto classes = convertibility_classes(system);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (const auto& s : classes[c]) index[s] = c;
  }
  return index;
}

}  // namespace

ConditionReport check_conditions(const TransformMapping& mapping) {
  const Pars& source = mapping.source;
  const Pars& target = mapping.target;

  for (const auto& s : source.states()) {
    if (!mapping.g.count(s)) {
      throw PreconditionError("PartialMapping", "G is undefined on state \"" + s + "\"");
    }
  }
  for (const auto& [s, image] : mapping.g) {
    if (!target.has_state(image)) {
      throw PreconditionError("PartialMapping",
                              "G(" + s + ") = \"" + image + "\" is not a state of the target system");
    }
  }

  ConditionReport report;
  report.mode = mapping.mode;
  report.target_confluence = check_confluence(target);
  const bool prime = mapping.mode == TransformMode::Cprime;
  auto key = [&](int i) { return "C" + std::to_string(i) + (prime ? "'" : ""); };

  // C1: target confluent / C1': G surjective.
  if (!prime) {
    report.conditions[key(1)] = report.target_confluence;
  } else {
    Decision surjective{Verdict::yes, std::nullopt, {}};
    std::set<StateId> image;
    for (const auto& [s, t] : mapping.g) image.insert(t);
    for (const auto& t : target.states()) {
      if (!image.count(t)) {
        surjective = {Verdict::no, Witness{"state", {t}, "target state has no G-preimage"}, {}};
        break;
      }
    }
    report.conditions[key(1)] = surjective;
  }

  // C2: source normalizing; C2' additionally target normalizing.
  {
    Decision normalizing = check_normalizing(source);
    if (prime && normalizing.verdict == Verdict::yes) {
      Decision target_normalizing = check_normalizing(target);
      if (target_normalizing.verdict != Verdict::yes) {
        normalizing = target_normalizing;
        normalizing.note = "target system is not normalizing";
      }
    }
    report.conditions[key(2)] = normalizing;
  }

  // C3: every source rule maps into one target conversion class;
  // C3' additionally: G-convertible images only for source-convertible states.
  {
    auto target_classes = class_index(target);
    Decision compatible{Verdict::yes, std::nullopt, {}};
    for (const auto& rule : source.rules()) {
      if (target_classes.at(mapping.apply(rule.from)) != target_classes.at(mapping.apply(rule.to))) {
        compatible = {Verdict::no,
                      Witness{"rule", {rule.from, rule.to},
                              "G(" + rule.from + ") and G(" + rule.to + ") are not convertible in the target"},
                      {}};
        break;
      }
    }
    if (prime && compatible.verdict == Verdict::yes) {
      // Pulled-back target classes must refine source classes: two states
      // whose images are convertible must already be convertible.
      auto source_classes = class_index(source);
      std::map<std::size_t, std::pair<StateId, std::size_t>> representative;
      for (const auto& s : source.states()) {
        std::size_t image_class = target_classes.at(mapping.apply(s));
        auto [it, inserted] = representative.try_emplace(image_class, s, source_classes.at(s));
        if (!inserted && it->second.second != source_classes.at(s)) {
          compatible = {Verdict::no,
                        Witness{"pair", {it->second.first, s},
                                "images are convertible in the target but the states are not convertible "
                                "in the source"},
                        {}};
          break;
        }
      }
    }
    report.conditions[key(3)] = compatible;
  }

  // C4: normal forms map to normal forms; C4' additionally the converse.
  {
    Decision preserved{Verdict::yes, std::nullopt, {}};
    for (std::size_t i = 0; i < source.size() && preserved.verdict == Verdict::yes; ++i) {
      if (!source.is_normal_form(i)) continue;
      const StateId& image = mapping.apply(source.state(i));
      if (!target.is_normal_form(target.index_of(image))) {
        preserved = {Verdict::no,
                     Witness{"state", {source.state(i), image}, "normal form maps to a reducible state"},
                     {}};
      }
    }
    if (prime && preserved.verdict == Verdict::yes) {
      for (const auto& s : source.states()) {
        const StateId& image = mapping.apply(s);
        if (target.is_normal_form(target.index_of(image)) &&
            !source.is_normal_form(source.index_of(s))) {
          preserved = {Verdict::no,
                       Witness{"state", {s, image}, "reducible state maps to a target normal form"},
                       {}};
          break;
        }
      }
    }
    report.conditions[key(4)] = preserved;
  }

  // C5: G injective on source normal forms.
  {
    Decision injective{Verdict::yes, std::nullopt, {}};
    std::map<StateId, StateId> seen;  // image -> first normal form
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (!source.is_normal_form(i)) continue;
      const StateId& image = mapping.apply(source.state(i));
      auto [it, inserted] = seen.try_emplace(image, source.state(i));
      if (!inserted) {
        injective = {Verdict::no,
                     Witness{"nf_collision", {it->second, source.state(i), image},
                             "distinct normal forms share one image"},
                     {}};
        break;
      }
    }
    report.conditions[key(5)] = injective;
  }

  return report;
}

std::string to_string(Conclusion conclusion) {
  switch (conclusion) {
    case Conclusion::source_confluent: return "source_confluent";
    case Conclusion::source_not_confluent: return "source_not_confluent";
    case Conclusion::source_as_convergent: return "source_as_convergent";
    case Conclusion::source_not_as_convergent: return "source_not_as_convergent";
    default: return "inconclusive";
  }
}

ConclusionReport conclude(const ConditionReport& report, const Decision& as_termination_evidence) {
  if (!report.all_yes()) {
    return {Conclusion::inconclusive, "condition " + report.first_failure() + " failed"};
  }
  const bool as_terminating = as_termination_evidence.verdict == Verdict::yes;
  if (report.mode == TransformMode::C) {
    if (as_terminating) {
      return {Conclusion::source_as_convergent,
              "C1-C5 hold and the source is almost-surely terminating"};
    }
    return {Conclusion::source_confluent, "C1-C5 transfer confluence from the target"};
  }
  const bool target_confluent = report.target_confluence.verdict == Verdict::yes;
  if (as_terminating) {
    if (target_confluent) {
      return {Conclusion::source_as_convergent,
              "C1'-C5' hold, the target is confluent and the source is almost-surely terminating"};
    }
    return {Conclusion::source_not_as_convergent,
            "C1'-C5' hold but the target is not confluent, so the source is not confluent"};
  }
  if (target_confluent) {
    return {Conclusion::source_confluent, "C1'-C5' transfer confluence from the target"};
  }
  return {Conclusion::source_not_confluent, "C1'-C5' transfer non-confluence from the target"};
}

}  // namespace parskit
