#pragma once

// Inferential force as likelihood ratios.
//
// Closed forms for a single testimony and for a second testimony given the
// first (the "left over" force after conditioning on the first report), and
// a general evaluator that obtains any ratio by exact inference on a net.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wigmore/bayesnet.hpp"
#include "wigmore/chart.hpp"
#include "wigmore/compile.hpp"
#include "wigmore/error.hpp"
#include "wigmore/format.hpp"

namespace wigmore {

// Nonnegative extended real: finite, or +infinity when the evidence is
// impossible under the complement hypothesis.
class LikelihoodRatio {
 public:
  explicit LikelihoodRatio(double finite) : value_(finite) {
    if (!(finite >= 0.0) || std::isinf(finite)) throw ParameterError("likelihood ratio must be finite and nonnegative");
  }

  static LikelihoodRatio infinity() { return LikelihoodRatio(Tag{}); }

  static LikelihoodRatio from_ratio(double numerator, double denominator) {
    if (denominator == 0.0) {
      if (numerator == 0.0) throw UndefinedForceError("likelihood ratio is 0/0: evidence impossible under both hypotheses");
      return infinity();
    }
    return LikelihoodRatio(numerator / denominator);
  }

  bool is_infinite() const { return std::isinf(value_); }
  double value() const { return value_; }
  std::string str() const { return format_number(value_); }

  friend bool operator==(const LikelihoodRatio&, const LikelihoodRatio&) = default;

 private:
  struct Tag {};
  explicit LikelihoodRatio(Tag) : value_(std::numeric_limits<double>::infinity()) {}
  double value_;
};

inline nlohmann::json to_json(const LikelihoodRatio& lr) {
  if (lr.is_infinite()) return "inf";
  return round_significant(lr.value());
}

// ---------------------------------------------------------------------------
// Closed forms

struct SingleTestimonyParams {
  double p_e_given_h = 0.0;      // P(E | H)
  double p_e_given_not_h = 0.0;  // P(E | not H)
  CredibilityParams cred;        // (h, f) of the source reporting E

  void check() const {
    check_probability(p_e_given_h, "P(E|H)");
    check_probability(p_e_given_not_h, "P(E|not H)");
    cred.check("first source");
  }
};

struct SecondTestimonyParams {
  SingleTestimonyParams first;
  double p_f_given_e = 0.0;      // P(F | E)
  double p_f_given_not_e = 0.0;  // P(F | not E)
  CredibilityParams cred2;       // (h, f) of the source reporting F

  void check() const {
    first.check();
    check_probability(p_f_given_e, "P(F|E)");
    check_probability(p_f_given_not_e, "P(F|not E)");
    cred2.check("second source");
  }
};

// [P(E|H)(h-f) + f] / [P(E|not H)(h-f) + f]
inline LikelihoodRatio lr_single(const SingleTestimonyParams& p) {
  p.check();
  const double d = p.cred.h - p.cred.f;
  return LikelihoodRatio::from_ratio(p.p_e_given_h * d + p.cred.f, p.p_e_given_not_h * d + p.cred.f);
}

// P(E | E*, branch) where branch sets P(E) to p_e.
inline double posterior_event_given_report(double p_e, const CredibilityParams& c, std::string_view branch) {
  const double denom = p_e * c.h + (1.0 - p_e) * c.f;
  if (denom == 0.0)
    throw ConditioningError("first report is impossible under the " + std::string(branch) +
                            " branch; P(E|E*) is undefined there");
  return p_e * c.h / denom;
}

// Force of the second report F* once the first report E* is known. The first
// report enters only through P(E | E*, H) and P(E | E*, not H).
inline LikelihoodRatio lr_second_given_first(const SecondTestimonyParams& p) {
  p.check();
  const double e_h = posterior_event_given_report(p.first.p_e_given_h, p.first.cred, "hypothesis");
  const double e_not_h = posterior_event_given_report(p.first.p_e_given_not_h, p.first.cred, "complement");
  const double dw = p.cred2.h - p.cred2.f;
  const double df = p.p_f_given_e - p.p_f_given_not_e;
  const double tail = p.p_f_given_not_e * dw + p.cred2.f;
  return LikelihoodRatio::from_ratio(e_h * df * dw + tail, e_not_h * df * dw + tail);
}

// ---------------------------------------------------------------------------
// Compiled models for the closed forms

namespace detail {

inline KeyListEntry probandum(NodeId id, std::string alias, NodeKind kind, std::string text) {
  return {id, std::move(text), kind, std::nullopt, std::move(alias)};
}

inline KeyListEntry testimony(NodeId id, std::string alias, std::string text) {
  return {id, std::move(text), NodeKind::evidence, EvidenceForm::testimonial, std::move(alias)};
}

}  // namespace detail

// Chart H_u <- H <- E with hypothesis H; compiles to (H, E, E*).
inline CompilationSpec single_testimony_spec(const SingleTestimonyParams& p) {
  CompilationSpec spec;
  spec.chart.key_list = {detail::probandum(1, "Pi_u", NodeKind::ultimate_probandum, "ultimate probandum"),
                         detail::probandum(3, "Pi_3", NodeKind::penultimate_probandum, "hypothesis"),
                         detail::testimony(25, "E", "event E, reported as E*")};
  spec.chart.arcs = {{3, 1, ForceLabel::strong, std::nullopt}, {25, 3, ForceLabel::strong, std::nullopt}};
  spec.hypothesis = 3;
  spec.arc_likelihoods = {{{25, 3}, {p.p_e_given_h, p.p_e_given_not_h}}};
  spec.credibility[25] = p.cred;
  return spec;
}

// Adds F (with report F*) bearing on E; compiles to (H, E, E*, F, F*).
inline CompilationSpec second_testimony_spec(const SecondTestimonyParams& p) {
  CompilationSpec spec = single_testimony_spec(p.first);
  spec.chart.key_list.push_back(detail::testimony(26, "F", "event F, reported as F*"));
  spec.chart.arcs.push_back({26, 25, ForceLabel::strong, std::nullopt});
  spec.arc_likelihoods.push_back({{26, 25}, {p.p_f_given_e, p.p_f_given_not_e}});
  spec.credibility[26] = p.cred2;
  return spec;
}

// ---------------------------------------------------------------------------
// General evaluator

// Binary split of a variable: `state` against all its other states.
struct Hypothesis {
  std::string variable;
  std::string state = "true";
};

// "var=state", or a bare "var" meaning var=true.
inline Hypothesis parse_hypothesis(std::string_view text) {
  if (text.find('=') == std::string_view::npos) {
    const auto a = parse_assignment(std::string(text) + "=true");
    return {a.begin()->first, "true"};
  }
  const auto a = parse_assignment(text);
  if (a.size() != 1) throw ParseError("hypothesis must be a single var=state pair");
  return {a.begin()->first, a.begin()->second};
}

namespace detail {

// P(evidence, given, H in `states`) and P(given, H in `states`).
inline std::pair<double, double> branch_masses(const BayesNet& net, const std::string& var,
                                               const std::vector<std::string>& states,
                                               const EvidenceAssignment& evidence, const EvidenceAssignment& given) {
  double joint = 0.0, cond = 0.0;
  for (const auto& s : states) {
    EvidenceAssignment g = given;
    g[var] = s;
    EvidenceAssignment eg = g;
    eg.insert(evidence.begin(), evidence.end());
    cond += evidence_probability(net, g);
    joint += evidence_probability(net, eg);
  }
  return {joint, cond};
}

}  // namespace detail

// P(evidence | given, H) / P(evidence | given, not H) by exact inference.
inline LikelihoodRatio lr_general(const BayesNet& net, const Hypothesis& hyp, const EvidenceAssignment& evidence,
                                  const EvidenceAssignment& given = {}) {
  const std::size_t hv = net.index_of(hyp.variable);
  net.state_index(hv, hyp.state);
  if (evidence.count(hyp.variable) || given.count(hyp.variable))
    throw ModelError("hypothesis variable '" + hyp.variable + "' may not appear in evidence or given");
  for (const auto& [k, _] : evidence)
    if (given.count(k)) throw ModelError("variable '" + k + "' appears in both evidence and given");
  net.resolve(evidence);
  net.resolve(given);
  if (evidence.empty()) return LikelihoodRatio(1.0);

  std::vector<std::string> rest;
  for (const auto& s : net.variable(hv).states)
    if (s != hyp.state) rest.push_back(s);

  const auto [num_joint, num_cond] = detail::branch_masses(net, hyp.variable, {hyp.state}, evidence, given);
  const auto [den_joint, den_cond] = detail::branch_masses(net, hyp.variable, rest, evidence, given);
  if (num_cond == 0.0)
    throw ConditioningError("given " + to_string(given) + " is impossible when " + hyp.variable + "=" + hyp.state);
  if (den_cond == 0.0)
    throw ConditioningError("given " + to_string(given) + " is impossible when " + hyp.variable + "!=" + hyp.state);
  return LikelihoodRatio::from_ratio(num_joint / num_cond, den_joint / den_cond);
}

// ---------------------------------------------------------------------------
// Redundancy and synergism

inline constexpr double kInteractionTolerance = 1e-9;

enum class Interaction { synergistic, redundant, independent };

inline constexpr std::string_view to_string(Interaction i) {
  switch (i) {
    case Interaction::synergistic: return "synergistic";
    case Interaction::redundant: return "redundant";
    case Interaction::independent: return "independent";
  }
  return "?";
}

struct InteractionDiagnostics {
  LikelihoodRatio joint{1.0};
  LikelihoodRatio lr_a{1.0};
  LikelihoodRatio lr_b{1.0};
  LikelihoodRatio lr_b_given_a{1.0};
  LikelihoodRatio lr_a_given_b{1.0};
  double product_of_marginals = 1.0;
  Interaction classification = Interaction::independent;
  // Largest |L(a,b) - L(a)L(b|a)|, |L(a,b) - L(b)L(a|b)| relative to max(1, L(a,b)).
  double chain_rule_residual = 0.0;
};

namespace detail {

inline double chain_residual(double joint, double product) {
  if (std::isinf(joint) || std::isinf(product)) return std::isinf(joint) && std::isinf(product) ? 0.0 : INFINITY;
  return std::abs(joint - product) / std::max(1.0, std::abs(joint));
}

}  // namespace detail

inline InteractionDiagnostics diagnose_interaction(const BayesNet& net, const Hypothesis& hyp,
                                                   const EvidenceAssignment& a, const EvidenceAssignment& b) {
  for (const auto& [k, _] : a)
    if (b.count(k)) throw ModelError("interaction items share variable '" + k + "'");
  EvidenceAssignment ab = a;
  ab.insert(b.begin(), b.end());

  InteractionDiagnostics d;
  d.joint = lr_general(net, hyp, ab);
  d.lr_a = lr_general(net, hyp, a);
  d.lr_b = lr_general(net, hyp, b);
  d.lr_b_given_a = lr_general(net, hyp, b, a);
  d.lr_a_given_b = lr_general(net, hyp, a, b);
  d.product_of_marginals = d.lr_a.value() * d.lr_b.value();
  d.chain_rule_residual = std::max(detail::chain_residual(d.joint.value(), d.lr_a.value() * d.lr_b_given_a.value()),
                                   detail::chain_residual(d.joint.value(), d.lr_b.value() * d.lr_a_given_b.value()));

  const double j = d.joint.value(), p = d.product_of_marginals;
  if (std::isinf(j) && std::isinf(p))
    d.classification = Interaction::independent;
  else if (j > p + kInteractionTolerance)
    d.classification = Interaction::synergistic;
  else if (j < p - kInteractionTolerance)
    d.classification = Interaction::redundant;
  return d;
}

// ---------------------------------------------------------------------------
// Report

struct LikelihoodReport {
  struct Diagnostics {
    double redundancy_gap = 0.0;  // L(b) - L(b | a)
    int synergism_flag = 0;       // sign of L(a,b) - L(a)L(b)
  };

  LikelihoodRatio lr{1.0};
  std::optional<std::vector<LikelihoodRatio>> decomposition;
  std::optional<Diagnostics> diagnostics;
};

inline LikelihoodReport make_report(const InteractionDiagnostics& d) {
  LikelihoodReport r;
  r.lr = d.joint;
  r.decomposition = std::vector<LikelihoodRatio>{d.lr_a, d.lr_b_given_a};
  LikelihoodReport::Diagnostics diag;
  const double lb = d.lr_b.value(), lba = d.lr_b_given_a.value();
  diag.redundancy_gap = std::isinf(lb) && std::isinf(lba) ? 0.0 : lb - lba;
  diag.synergism_flag = d.classification == Interaction::synergistic ? 1
                        : d.classification == Interaction::redundant ? -1
                                                                     : 0;
  r.diagnostics = diag;
  return r;
}

inline nlohmann::json to_json(const LikelihoodReport& r) {
  nlohmann::json j{{"lr", to_json(r.lr)}};
  if (r.decomposition) {
    auto& arr = j["decomposition"] = nlohmann::json::array();
    for (const auto& x : *r.decomposition) arr.push_back(to_json(x));
  }
  if (r.diagnostics) {
    const double g = r.diagnostics->redundancy_gap;
    j["diagnostics"] = {{"redundancy_gap", std::isinf(g) ? nlohmann::json(format_number(g)) : nlohmann::json(round_significant(g))},
                        {"synergism_flag", r.diagnostics->synergism_flag}};
  }
  return j;
}

inline nlohmann::json to_json(const InteractionDiagnostics& d) {
  return {{"joint_lr", to_json(d.joint)},
          {"lr_a", to_json(d.lr_a)},
          {"lr_b", to_json(d.lr_b)},
          {"lr_b_given_a", to_json(d.lr_b_given_a)},
          {"lr_a_given_b", to_json(d.lr_a_given_b)},
          {"product_of_marginals", std::isinf(d.product_of_marginals) ? nlohmann::json("inf")
                                                                       : nlohmann::json(round_significant(d.product_of_marginals))},
          {"classification", to_string(d.classification)},
          {"chain_rule_residual", round_significant(d.chain_rule_residual)}};
}

}  // namespace wigmore
