#pragma once

// Single-defect variants of the bundled identification chart, each paired
// with the one rule it must trip.

#include <string>
#include <vector>

#include "testkit.hpp"
#include "wigmore/chart.hpp"

namespace testkit {

inline wigmore::Chart identification_chart() {
  return wigmore::load_chart(source_path("data/fig4_identification.case.json").string());
}

struct Mutant {
  std::string name;
  std::string expected_rule;
  wigmore::Chart chart;
};

inline std::vector<Mutant> identification_mutants() {
  using namespace wigmore;
  std::vector<Mutant> out;
  {
    // E -> 7 -> E through a new interim proposition.
    Chart c = identification_chart();
    c.key_list.push_back({7, "Sacco was in South Braintree that afternoon", NodeKind::interim_probandum, std::nullopt,
                          std::nullopt});
    c.arcs.push_back({25, 7, ForceLabel::moderate, std::nullopt});
    c.arcs.push_back({7, 25, ForceLabel::moderate, std::nullopt});
    out.push_back({"injected cycle", std::string(rule::acyclicity), std::move(c)});
  }
  {
    Chart c = identification_chart();
    c.arcs.push_back({101, 25, ForceLabel::weak, std::nullopt});
    out.push_back({"downward arc", std::string(rule::direction), std::move(c)});
  }
  {
    Chart c = identification_chart();
    c.key_list.push_back({400, "A bystander remembered the weather", NodeKind::evidence, EvidenceForm::testimonial,
                          std::nullopt});
    out.push_back({"orphan evidence", std::string(rule::orphan_evidence), std::move(c)});
  }
  {
    // Constantino's item wired straight into a probandum as well as onto an arc.
    Chart c = identification_chart();
    c.arcs.push_back({317, 103, ForceLabel::weak, std::nullopt});
    out.push_back({"ancillary attached to a node", std::string(rule::ancillary_direct_arc), std::move(c)});
  }
  return out;
}

// True when the report holds exactly one violation and it is of `rule`.
inline bool exactly(const wigmore::ValidationReport& r, const std::string& rule) {
  return r.violations.size() == 1 && r.violations.front().rule == rule;
}

}  // namespace testkit
