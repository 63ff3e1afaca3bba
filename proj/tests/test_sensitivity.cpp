#include <gtest/gtest.h>

#include <algorithm>

#include "support/testkit.hpp"
#include "wigmore/sensitivity.hpp"

using namespace wigmore;

namespace {

SweepSpec pelser_sweep() {
  SweepSpec s;
  s.target = SweepTarget::lr_single;
  s.fixed = {{"p_e_given_h", 1.0}, {"p_e_given_not_h", 0.1}};
  s.swept = {{"h_p", default_grid()}, {"f_p", default_grid()}};
  return s;
}

std::map<std::string, double> row_params(const SweepSpec& spec, const SweepResult& r, std::size_t i) {
  auto p = spec.fixed;
  for (std::size_t d = 0; d < r.parameter_names.size(); ++d) p[r.parameter_names[d]] = r.rows[i].parameters[d];
  return p;
}

// The gradient location as an unordered pair of parameter points.
std::pair<std::vector<double>, std::vector<double>> location(const SweepResult& r) {
  auto a = r.rows[r.summary.max_gradient->from_row].parameters;
  auto b = r.rows[r.summary.max_gradient->to_row].parameters;
  if (b < a) std::swap(a, b);
  return {a, b};
}

}  // namespace

TEST(Grid, RangesAreRoundedAndInclusive) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 99u);
  EXPECT_EQ(g.front(), 0.01);
  EXPECT_EQ(g[29], 0.3);
  EXPECT_EQ(g.back(), 0.99);
  EXPECT_EQ(grid_range(0.0, 1.0, 0.25), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_THROW(grid_range(0.0, 1.0, 0.0), SpecError);
  EXPECT_THROW(grid_range(0.5, 0.1, 0.1), SpecError);
}

TEST(Sweep, RowsMatchDirectEvaluation) {
  const auto spec = pelser_sweep();
  const auto r = run_sweep(spec);
  ASSERT_EQ(r.rows.size(), 99u * 99u);
  EXPECT_EQ(r.parameter_names, (std::vector<std::string>{"h_p", "f_p"}));
  // First parameter slowest.
  EXPECT_EQ(r.rows[1].parameters, (std::vector<double>{0.01, 0.02}));
  EXPECT_EQ(r.rows[99].parameters, (std::vector<double>{0.02, 0.01}));
  testkit::Rng rng(8);
  for (int k = 0; k < 200; ++k) {
    const std::size_t i = rng.below(r.rows.size());
    const auto p = row_params(spec, r, i);
    const double expected = lr_single({p.at("p_e_given_h"), p.at("p_e_given_not_h"), {p.at("h_p"), p.at("f_p")}}).value();
    ASSERT_TRUE(r.rows[i].result.lr);
    EXPECT_EQ(r.rows[i].result.lr->value(), expected);
  }
}

TEST(Sweep, DiagonalIsNeutral) {
  const auto r = run_sweep(pelser_sweep());
  std::size_t diagonal = 0;
  for (const auto& row : r.rows)
    if (row.parameters[0] == row.parameters[1]) {
      ++diagonal;
      EXPECT_NEAR(row.result.lr->value(), 1.0, 1e-12);
    }
  EXPECT_EQ(diagonal, 99u);
}

TEST(Sweep, SerializationIsByteStable) {
  const auto a = run_sweep(pelser_sweep());
  const auto b = run_sweep(pelser_sweep());
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(to_json(a).dump(2), to_json(b).dump(2));
  const std::string csv = to_csv(a);
  EXPECT_EQ(csv.rfind("h_p,f_p,lr\n0.01,0.01,1\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 99 * 99 + 1);
}

TEST(Sweep, SummaryMatchesRows) {
  const auto r = run_sweep(pelser_sweep());
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& row : r.rows) {
    lo = std::min(lo, row.result.lr->value());
    hi = std::max(hi, row.result.lr->value());
  }
  EXPECT_EQ(*r.summary.min, lo);
  EXPECT_EQ(*r.summary.max, hi);
  EXPECT_EQ(r.rows[*r.summary.argmax_row].result.lr->value(), hi);
  ASSERT_TRUE(r.summary.max_gradient);
  const auto& g = *r.summary.max_gradient;
  const auto& from = r.rows[g.from_row];
  const auto& to = r.rows[g.to_row];
  const double dx = std::abs(to.parameters[g.dimension] - from.parameters[g.dimension]);
  EXPECT_DOUBLE_EQ(g.value, std::abs(to.result.lr->value() - from.result.lr->value()) / dx);
  EXPECT_EQ(r.summary.infinite_count, 0u);
  EXPECT_EQ(r.summary.undefined_count, 0u);
}

TEST(SweepProperty, GradientLocationSurvivesTraversalReversal) {
  testkit::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    SweepSpec spec;
    spec.target = SweepTarget::lr_second_given_first;
    for (const auto& n : {"p_e_given_h", "p_e_given_not_h", "h_p", "f_p", "p_f_given_e", "p_f_given_not_e", "h_w", "f_w"})
      spec.fixed[n] = rng.open(0.05, 0.95);
    for (const auto& n : {"h_w", "f_w"}) spec.fixed.erase(n);
    // Coarse grids make exact ties likely, which is the interesting case.
    spec.swept = {{"h_w", grid_range(0.1, 0.9, 0.2)}, {"f_w", grid_range(0.1, 0.9, 0.2)}};
    const auto forward = run_sweep(spec);
    for (auto& s : spec.swept) std::reverse(s.values.begin(), s.values.end());
    const auto backward = run_sweep(spec);
    ASSERT_TRUE(forward.summary.max_gradient && backward.summary.max_gradient);
    EXPECT_EQ(forward.summary.max_gradient->value, backward.summary.max_gradient->value);
    EXPECT_EQ(location(forward), location(backward)) << trial;
    EXPECT_EQ(*forward.summary.min, *backward.summary.min);
  }
}

TEST(Sweep, InfiniteAndUndefinedCellsAreMarked) {
  SweepSpec spec;
  spec.target = SweepTarget::lr_single;
  spec.fixed = {{"p_e_given_h", 0.5}, {"p_e_given_not_h", 0.0}, {"h_p", 0.7}};
  spec.swept = {{"f_p", {0.0, 0.5}}};
  auto r = run_sweep(spec);
  EXPECT_TRUE(r.rows[0].result.lr->is_infinite());
  EXPECT_EQ(to_csv(r), "f_p,lr\n0,inf\n0.5,1.2\n");
  EXPECT_EQ(r.summary.infinite_count, 1u);
  EXPECT_EQ(*r.summary.max, *r.summary.min);

  spec.fixed["h_p"] = 0.0;
  r = run_sweep(spec);
  EXPECT_TRUE(r.rows[0].result.undefined);
  EXPECT_FALSE(r.rows[0].result.note.empty());
  EXPECT_EQ(to_csv(r).substr(0, 22), "f_p,lr\n0,undefined\n0.5");
  EXPECT_EQ(r.summary.undefined_count, 1u);
  EXPECT_EQ(to_json(r)["rows"][0][1], "undefined");
}

TEST(Sweep, ClosedFormPosteriorIsAnOddsUpdate) {
  SweepSpec spec = pelser_sweep();
  spec.output = OutputQuantity::both;
  spec.fixed["prior"] = 0.25;
  spec.swept = {{"h_p", {0.8}}};
  spec.fixed["f_p"] = 0.2;
  const auto r = run_sweep(spec);
  const double lr = 0.8 / 0.26;
  EXPECT_NEAR(*r.rows[0].result.posterior, 0.25 * lr / (0.25 * lr + 0.75), 1e-15);
  EXPECT_EQ(r.summary.quantity, OutputQuantity::lr);
}

TEST(Sweep, ModelBackedPosteriorMatchesDirectInference) {
  const auto spec = load_sweep_spec(testkit::source_path("data/sweep_bullet3_posterior.json").string());
  const auto r = run_sweep(spec);
  ASSERT_EQ(r.rows.size(), 10u);
  const auto& m = *spec.model;
  for (const auto& row : r.rows) {
    const double f = row.parameters[0];
    auto table = m.net.cpt(m.net.index_of("M*")).table;
    table[1] = {f, 1.0 - f};
    const BayesNet net = m.net.with_table("M*", table);
    EvidenceAssignment all = m.given;
    all.insert(m.evidence.begin(), m.evidence.end());
    EXPECT_NEAR(*row.result.posterior, eliminate(net, all, "Pi_3")[0], 1e-15);
    EXPECT_NEAR(row.result.lr->value(), lr_general(net, m.hypothesis, m.evidence, m.given).value(), 1e-12);
  }
  // f = 0.2 is the bundled value: M* given the B side.
  const auto g = testkit::read_json(testkit::source_path("tests/golden/bullet3.json"));
  EXPECT_NEAR(*r.rows[3].result.posterior, g["posterior_pi3_all_reports"].get<double>(), 1e-12);
}

TEST(SweepSpecCheck, RejectsBadSpecs) {
  auto s = pelser_sweep();
  s.swept.push_back({"h_p", {0.5}});
  EXPECT_THROW(run_sweep(s), SpecError);  // swept twice

  s = pelser_sweep();
  s.fixed.erase("p_e_given_h");
  EXPECT_THROW(run_sweep(s), SpecError);  // missing

  s = pelser_sweep();
  s.fixed["h_w"] = 0.5;
  EXPECT_THROW(run_sweep(s), SpecError);  // unknown for this target

  s = pelser_sweep();
  s.fixed["h_p"] = 0.5;
  EXPECT_THROW(run_sweep(s), SpecError);  // fixed and swept

  s = pelser_sweep();
  s.swept.clear();
  EXPECT_THROW(run_sweep(s), SpecError);

  s = pelser_sweep();
  s.fixed.erase("p_e_given_h");
  s.fixed.erase("p_e_given_not_h");
  s.swept = {{"h_p", default_grid()}, {"f_p", default_grid()}, {"p_e_given_h", default_grid()},
             {"p_e_given_not_h", {0.1}}};
  EXPECT_THROW(run_sweep(s), SpecError);  // four dimensions

  s.swept.pop_back();
  s.fixed["p_e_given_not_h"] = 0.1;
  s.swept[0].values = grid_range(0.0, 1.0, 0.001);
  s.swept[1].values = grid_range(0.0, 1.0, 0.001);
  EXPECT_THROW(run_sweep(s), SpecError);  // over the row cap

  s = pelser_sweep();
  s.swept[0].values = {1.5};
  EXPECT_THROW(run_sweep(s), SpecError);

  SweepSpec post;
  post.target = SweepTarget::posterior;
  post.swept = {{"x", {0.5}}};
  EXPECT_THROW(run_sweep(post), SpecError);  // no model
}

TEST(SweepSpecCheck, ModelParameterNames) {
  auto spec = load_sweep_spec(testkit::source_path("data/sweep_bullet3_posterior.json").string());
  spec.swept[0].name = "M*|M=maybe";
  EXPECT_THROW(run_sweep(spec), Error);
  spec.swept[0].name = "Nope";
  EXPECT_THROW(run_sweep(spec), Error);
  spec.swept[0].name = "Pi_3";
  EXPECT_NO_THROW(run_sweep(spec));
}

TEST(SweepFile, ParsesBundledSpec) {
  const auto spec = load_sweep_spec(testkit::source_path("data/sweep_pelser_credibility.json").string());
  EXPECT_EQ(spec.target, SweepTarget::lr_single);
  ASSERT_EQ(spec.swept.size(), 2u);
  EXPECT_EQ(spec.swept[0].values, default_grid());
  EXPECT_THROW(parse_sweep_spec(nlohmann::json::parse(R"({"target": "lr_double", "swept": []})")), ParseError);
  EXPECT_THROW(parse_sweep_spec(nlohmann::json::parse(R"({"target": "lr_single"})")), ParseError);
  const auto bare = parse_sweep_spec(nlohmann::json::parse(R"({"target": "lr_single", "swept": [{"name": "h_p"}]})"));
  EXPECT_EQ(bare.swept[0].values, default_grid());
}

TEST(Stories, TableComparesScenarios) {
  const auto scenarios = load_story_spec(testkit::source_path("data/stories_wade.json").string());
  ASSERT_EQ(scenarios.size(), 3u);
  const auto t = story_table(scenarios);
  EXPECT_EQ(t.columns.size(), 3u);
  const auto lr_row = std::find(t.row_labels.begin(), t.row_labels.end(), "lr") - t.row_labels.begin();
  ASSERT_LT(static_cast<std::size_t>(lr_row), t.row_labels.size());
  // The neutral story carries the bundled Pelser/Wade values.
  const auto g = testkit::read_json(testkit::source_path("tests/golden/pelser_wade.json"));
  EXPECT_NEAR(std::stod(t.cells[lr_row][2]), g["lr_second_given_first"].get<double>(), 1e-10);
  // A more reliable first witness leaves less for the second to add.
  EXPECT_LT(std::stod(t.cells[lr_row][0]), std::stod(t.cells[lr_row][2]));
  EXPECT_EQ(render(t), render(story_table(scenarios)));
  EXPECT_THROW(story_table({}), SpecError);
}

TEST(Stories, ScenariosMustBePoints) {
  auto scenarios = load_story_spec(testkit::source_path("data/stories_wade.json").string());
  scenarios[1].spec.fixed.erase("h_p");
  scenarios[1].spec.swept = {{"h_p", {0.2, 0.3}}};
  EXPECT_THROW(story_table(scenarios), SpecError);
}
