#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "support/mutations.hpp"
#include "support/testkit.hpp"
#include "wigmore/chart.hpp"

using namespace wigmore;

namespace {

const char* kTiny = R"({
  "key_list": [
    {"id": 1, "kind": "ultimate_probandum", "text": "u"},
    {"id": 2, "kind": "penultimate_probandum", "text": "p", "alias": "P"},
    {"id": 10, "kind": "evidence", "evidence_form": "tangible", "text": "e"},
    {"id": 11, "kind": "evidence", "evidence_form": "testimonial", "text": "a"}
  ],
  "arcs": [
    {"from": "P", "to": 1, "force_label": "strong"},
    {"from": 10, "to": "P", "force_label": "weak"}
  ],
  "ancillary": [{"evidence_id": 11, "target_arc": {"from": 10, "to": 2}}]
})";

// 1 ultimate, 2 penultimate, 10 evidence -> 2, 11 ancillary on 10->2.
Chart tiny_chart() { return parse_chart(nlohmann::json::parse(kTiny)); }

nlohmann::json tiny_json() { return nlohmann::json::parse(kTiny); }

std::set<std::string> rules_of(const ValidationReport& r) {
  std::set<std::string> s;
  for (const auto& v : r.violations) s.insert(v.rule);
  return s;
}

KeyListEntry node(NodeId id, NodeKind k, std::optional<EvidenceForm> f = std::nullopt) {
  return {id, "n" + std::to_string(id), k, f, std::nullopt};
}

}  // namespace

TEST(ChartParse, ResolvesAliasesAndAttachments) {
  const Chart c = tiny_chart();
  ASSERT_EQ(c.key_list.size(), 4u);
  ASSERT_EQ(c.arcs.size(), 2u);
  EXPECT_EQ(c.arcs[0].from, 2);
  EXPECT_EQ(c.arcs[1].to, 2);
  ASSERT_EQ(c.ancillary.size(), 1u);
  EXPECT_EQ(c.ancillary[0].target_arc, (ArcRef{10, 2}));
  EXPECT_EQ(c.label(2), "P");
  EXPECT_EQ(c.label(10), "10");
  EXPECT_EQ(c.ultimate(), std::optional<NodeId>(1));
}

TEST(ChartParse, RoundTripsThroughJson) {
  const Chart c = testkit::identification_chart();
  const Chart back = parse_chart(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(export_chart(back, ExportStyle::full), export_chart(c, ExportStyle::full));
}

TEST(ChartParse, RejectsUnknownForceLabel) {
  auto j = tiny_json();
  j["arcs"][0]["force_label"] = "overwhelming";
  EXPECT_THROW(parse_chart(j), ParseError);
}

TEST(ChartParse, RejectsUnresolvedAlias) {
  auto j = tiny_json();
  j["arcs"][1]["to"] = "Nobody";
  EXPECT_THROW(parse_chart(j), ParseError);
}

TEST(ChartParse, RejectsMissingKeyListAndBadKinds) {
  EXPECT_THROW(parse_chart(nlohmann::json::object()), ParseError);
  auto j = tiny_json();
  j["key_list"][0]["kind"] = "conjecture";
  EXPECT_THROW(parse_chart(j), ParseError);
  j = tiny_json();
  j["key_list"][2]["evidence_form"] = "hearsay";
  EXPECT_THROW(parse_chart(j), ParseError);
}

TEST(ChartParse, MissingFileNamesThePath) {
  try {
    load_chart("/nonexistent/case.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/case.json"), std::string::npos);
  }
}

TEST(ChartValidate, BundledChartsAreClean) {
  EXPECT_TRUE(validate_chart(testkit::identification_chart()).ok());
  EXPECT_TRUE(validate_chart(load_chart(testkit::source_path("data/fig5_bullet3.case.json").string())).ok());
  EXPECT_EQ(render(validate_chart(tiny_chart())), "0 violations\n");
}

TEST(ChartValidate, EachMutationTripsExactlyItsRule) {
  for (const auto& m : testkit::identification_mutants()) {
    const auto r = validate_chart(m.chart);
    EXPECT_TRUE(testkit::exactly(r, m.expected_rule)) << m.name << ":\n" << render(r);
  }
}

TEST(ChartValidate, CycleReportNamesTheCycleOnce) {
  const auto mutants = testkit::identification_mutants();
  const auto r = validate_chart(mutants[0].chart);
  ASSERT_EQ(r.count(rule::acyclicity), 1u);
  EXPECT_EQ(r.violations[0].node, 7);
  EXPECT_NE(render(r).find("acyclicity"), std::string::npos);
}

TEST(ChartValidate, DuplicateAndInvalidIds) {
  Chart c = tiny_chart();
  c.key_list.push_back(node(10, NodeKind::evidence, EvidenceForm::tangible));
  c.key_list.push_back(node(-3, NodeKind::evidence, EvidenceForm::tangible));
  const auto r = validate_chart(c);
  EXPECT_EQ(r.count(rule::duplicate_id), 1u);
  EXPECT_EQ(r.count(rule::invalid_id), 1u);
}

TEST(ChartValidate, EvidenceFormMustMatchKind) {
  Chart c = tiny_chart();
  c.key_list[2].evidence_form.reset();
  c.key_list[1].evidence_form = EvidenceForm::tangible;
  const auto r = validate_chart(c);
  EXPECT_EQ(r.count(rule::evidence_form), 2u);
}

TEST(ChartValidate, ExactlyOneUltimate) {
  Chart none = tiny_chart();
  none.key_list[0].kind = NodeKind::penultimate_probandum;
  EXPECT_GE(validate_chart(none).count(rule::ultimate_count), 1u);
  Chart two = tiny_chart();
  two.key_list.push_back(node(5, NodeKind::ultimate_probandum));
  EXPECT_GE(validate_chart(two).count(rule::ultimate_count), 1u);
}

TEST(ChartValidate, UnknownNodesAndSelfLoops) {
  Chart c = tiny_chart();
  c.arcs.push_back({10, 99, ForceLabel::weak, std::nullopt});
  c.arcs.push_back({10, 10, ForceLabel::weak, std::nullopt});
  const auto r = validate_chart(c);
  EXPECT_EQ(r.count(rule::unknown_node), 1u);
  EXPECT_EQ(r.count(rule::self_loop), 1u);
}

TEST(ChartValidate, DirectionRespectsHierarchyButAllowsCatenation) {
  Chart up = tiny_chart();
  up.arcs.push_back({2, 11, ForceLabel::weak, std::nullopt});
  EXPECT_EQ(validate_chart(up).count(rule::direction), 1u);

  // Evidence on evidence and interim on interim are catenated links.
  Chart cat = tiny_chart();
  cat.key_list.push_back(node(12, NodeKind::evidence, EvidenceForm::testimonial));
  cat.key_list.push_back(node(20, NodeKind::interim_probandum));
  cat.key_list.push_back(node(21, NodeKind::interim_probandum));
  cat.arcs.push_back({12, 10, ForceLabel::weak, std::nullopt});
  cat.arcs.push_back({12, 21, ForceLabel::weak, std::nullopt});
  cat.arcs.push_back({21, 20, ForceLabel::weak, std::nullopt});
  cat.arcs.push_back({20, 2, ForceLabel::weak, std::nullopt});
  EXPECT_TRUE(validate_chart(cat).ok()) << render(validate_chart(cat));
}

TEST(ChartValidate, PenultimateMustReachUltimate) {
  Chart c = tiny_chart();
  c.key_list.push_back(node(3, NodeKind::penultimate_probandum));
  EXPECT_TRUE(testkit::exactly(validate_chart(c), std::string(rule::penultimate_link)));
}

TEST(ChartValidate, InterimNeedsBothEnds) {
  Chart c = tiny_chart();
  c.key_list.push_back(node(20, NodeKind::interim_probandum));
  c.arcs.push_back({20, 2, ForceLabel::weak, std::nullopt});
  EXPECT_TRUE(testkit::exactly(validate_chart(c), std::string(rule::non_sequitur))) << render(validate_chart(c));
}

TEST(ChartValidate, AncillaryTargetsAndSources) {
  Chart missing = tiny_chart();
  missing.ancillary[0].target_arc = {2, 10};
  EXPECT_EQ(validate_chart(missing).count(rule::ancillary_target), 1u);

  Chart from_probandum = tiny_chart();
  from_probandum.ancillary.push_back({2, {10, 2}});
  EXPECT_EQ(validate_chart(from_probandum).count(rule::ancillary_source), 1u);
}

TEST(ChartValidate, AmbiguousRelevanceThroughCatenation) {
  // 11 is an attachment root and also reaches P through evidence 10.
  Chart c = tiny_chart();
  c.arcs.push_back({11, 10, ForceLabel::weak, std::nullopt});
  const auto r = validate_chart(c);
  EXPECT_TRUE(testkit::exactly(r, std::string(rule::ambiguous_relevance))) << render(r);
  EXPECT_THROW(classify_relevance(c), AmbiguityError);

  // Into an interim probandum it is the direct-arc rule instead.
  Chart d = tiny_chart();
  d.key_list.push_back(node(20, NodeKind::interim_probandum));
  d.arcs.push_back({11, 20, ForceLabel::weak, std::nullopt});
  d.arcs.push_back({20, 2, ForceLabel::weak, std::nullopt});
  EXPECT_TRUE(testkit::exactly(validate_chart(d), std::string(rule::ancillary_direct_arc))) << render(validate_chart(d));
}

TEST(ChartValidate, ViolationsAreSortedByNode) {
  Chart c = tiny_chart();
  c.key_list.push_back(node(400, NodeKind::evidence, EvidenceForm::missing));
  c.key_list.push_back(node(300, NodeKind::evidence, EvidenceForm::missing));
  c.arcs.push_back({10, 10, ForceLabel::weak, std::nullopt});
  const auto r = validate_chart(c);
  ASSERT_EQ(r.violations.size(), 3u);
  EXPECT_EQ(r.violations[0].node, 10);
  EXPECT_EQ(r.violations[1].node, 300);
  EXPECT_EQ(r.violations[2].node, 400);
  EXPECT_EQ(render(r), render(validate_chart(c)));
}

TEST(ChartRelevance, IdentificationSectorCounts) {
  const auto cls = classify_relevance(testkit::identification_chart());
  EXPECT_EQ(cls.direct_count, 7u);
  EXPECT_EQ(cls.ancillary_count, 4u);
  EXPECT_EQ(cls.roles.at(317), Relevance::ancillary);
  EXPECT_EQ(cls.roles.at(26), Relevance::directly_relevant);
}

TEST(ChartRelevance, AncillaryOfAncillaryIsAncillary) {
  Chart c = tiny_chart();
  c.key_list.push_back(node(12, NodeKind::evidence, EvidenceForm::testimonial));
  c.arcs.push_back({12, 11, ForceLabel::weak, std::nullopt});
  EXPECT_TRUE(validate_chart(c).ok()) << render(validate_chart(c));
  EXPECT_EQ(classify_relevance(c).roles.at(12), Relevance::ancillary);
}

TEST(ChartExport, FullStyleRoutesAttachmentsThroughArcPoints) {
  const std::string dot = export_chart(testkit::identification_chart(), ExportStyle::full);
  EXPECT_EQ(dot.rfind("digraph wigmore {", 0), 0u);
  EXPECT_NE(dot.find("a25_103 [shape=point"), std::string::npos);
  EXPECT_NE(dot.find("n317 -> a25_103 [style=dashed]"), std::string::npos);
  EXPECT_NE(dot.find("n318 -> a25_103 [style=dashed]"), std::string::npos);
  EXPECT_NE(dot.find("n325 -> a26_25 [style=dashed]"), std::string::npos);
  EXPECT_NE(dot.find("fillcolor=black"), std::string::npos);
  EXPECT_EQ(dot.back(), '\n');
}

TEST(ChartExport, DirectOnlyNodeSetIsTheNonAncillaryNodes) {
  for (const char* file : {"data/fig4_identification.case.json", "data/fig5_bullet3.case.json"}) {
    const Chart c = load_chart(testkit::source_path(file).string());
    const auto cls = classify_relevance(c);
    std::set<std::string> expected;
    for (const auto& e : c.key_list)
      if (!(e.kind == NodeKind::evidence && cls.roles.at(e.id) == Relevance::ancillary))
        expected.insert("n" + std::to_string(e.id));

    const std::string dot = export_chart(c, ExportStyle::direct_only);
    std::set<std::string> declared;
    const std::regex decl(R"(^  (n\d+) \[)");
    std::istringstream in(dot);
    for (std::string line; std::getline(in, line);) {
      std::smatch m;
      if (std::regex_search(line, m, decl)) declared.insert(m[1]);
      EXPECT_EQ(line.find("shape=point"), std::string::npos) << line;
      EXPECT_EQ(line.find("dashed"), std::string::npos) << line;
    }
    EXPECT_EQ(declared, expected) << file;
  }
}

TEST(ChartExport, Deterministic) {
  const Chart c = testkit::identification_chart();
  Chart shuffled = c;
  std::reverse(shuffled.key_list.begin(), shuffled.key_list.end());
  std::reverse(shuffled.arcs.begin(), shuffled.arcs.end());
  EXPECT_EQ(export_chart(c, ExportStyle::full), export_chart(shuffled, ExportStyle::full));
  EXPECT_THROW(parse_export_style("fancy"), ParseError);
}

TEST(ChartValidate, RulesAreStableAcrossInputOrder) {
  for (auto m : testkit::identification_mutants()) {
    const auto a = render(validate_chart(m.chart));
    std::reverse(m.chart.key_list.begin(), m.chart.key_list.end());
    std::reverse(m.chart.arcs.begin(), m.chart.arcs.end());
    EXPECT_EQ(a, render(validate_chart(m.chart))) << m.name;
    EXPECT_EQ(rules_of(validate_chart(m.chart)), std::set<std::string>{m.expected_rule});
  }
}
