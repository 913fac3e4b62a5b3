#include "parskit/certifier.hpp"

#include "parskit/errors.hpp"

namespace parskit {

LyapunovCertificate LyapunovCertificate::from_map(std::map<StateId, Rat> values, Rat epsilon) {
  LyapunovCertificate certificate;
  certificate.valuation = [values = std::move(values)](const StateId& s) {
    auto it = values.find(s);
    if (it == values.end()) {
      throw PreconditionError("MissingValuation", "no valuation for state \"" + s + "\"");
    }
    return it->second;
  };
  certificate.epsilon = std::move(epsilon);
  certificate.name = "map";
  return certificate;
}

std::string to_string(CertVerdict verdict) {
  switch (verdict) {
    case CertVerdict::proven: return "proven";
    case CertVerdict::evidence: return "evidence";
    default: return "refuted";
  }
}

namespace {

MarginReport check_impl(const Pars& system, const std::set<StateId>& frontier,
                        const LyapunovCertificate& certificate, Coverage coverage, std::size_t depth) {
  if (certificate.epsilon <= 0) {
    throw PreconditionError("NonPositiveEpsilon",
                            "epsilon must be positive, got " + format_rational(certificate.epsilon));
  }

  MarginReport report;
  report.epsilon = certificate.epsilon;
  report.coverage = coverage;
  report.depth = depth;

  bool margins_ok = true;
  auto value_of = [&](const StateId& s) {
    Rat v = certificate.valuation(s);
    if (v < 0) {
      margins_ok = false;
      if (report.note.empty()) {
        report.note = "valuation is negative at " + s + " (" + format_rational(v) + ")";
      }
    }
    return v;
  };

  for (std::size_t i = 0; i < system.size(); ++i) {
    const StateId& s = system.state(i);
    if (system.is_normal_form(i)) {
      if (!frontier.count(s)) value_of(s);  // nonnegativity still applies
      continue;
    }
    if (frontier.count(s)) continue;  // successors unknown; not checkable

    Rat expectation = 0;
    for (std::size_t r : system.out(i)) {
      const Rule& rule = system.rules()[r];
      expectation += rule.p * value_of(rule.to);
    }
    Rat margin = value_of(s) - expectation;
    report.margins[s] = margin;
    ++report.states_checked;
    if (margin < certificate.epsilon) {
      margins_ok = false;
      if (report.note.empty()) {
        report.note = "margin " + format_rational(margin) + " at " + s + " is below epsilon " +
                      format_rational(certificate.epsilon);
      }
    }
  }

  if (!margins_ok) {
    report.verdict = CertVerdict::refuted;
  } else if (coverage == Coverage::full) {
    report.verdict = CertVerdict::proven;
    report.note = "ranking argument covers every reducible state";
  } else {
    report.verdict = CertVerdict::evidence;
    report.note = "margins hold on the explored window (depth " + std::to_string(depth) + ") only";
  }
  return report;
}

}  // namespace

MarginReport check_lyapunov(const Pars& system, const LyapunovCertificate& certificate) {
  return check_impl(system, {}, certificate, Coverage::full, 0);
}

MarginReport check_lyapunov(const ExploredSystem& window, const LyapunovCertificate& certificate) {
  Coverage coverage = window.frontier.empty() ? Coverage::full : Coverage::bounded;
  return check_impl(window.core, window.frontier, certificate, coverage, window.depth);
}

std::pair<StateId, Rat> min_margin(const MarginReport& report) {
  if (report.margins.empty()) {
    throw PreconditionError("EmptyReport", "no reducible state was checked");
  }
  auto best = report.margins.begin();
  for (auto it = report.margins.begin(); it != report.margins.end(); ++it) {
    if (it->second < best->second) best = it;  // map order makes ties lexicographic-first
  }
  return {best->first, best->second};
}

}  // namespace parskit
