#pragma once

// Compilation of a validated chart into a Bayes net.
//
// Chart arcs run upward (evidence toward hypotheses); net arcs run the other
// way, so every CPT is a likelihood of a lower node given the nodes it bears
// on. Each evidence item becomes an event variable plus a report variable
// whose CPT rows are the source's hit and false-positive probabilities.
// Ancillary evidence contributes no variables; it is kept as provenance on
// the entries it bears on.

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wigmore/bayesnet.hpp"
#include "wigmore/chart.hpp"
#include "wigmore/error.hpp"

namespace wigmore {

inline void check_probability(double x, std::string_view what) {
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError(std::string(what) + " = " + std::to_string(x) + " is outside [0,1]");
}

// Hit probability h = P(report | event) and false-positive probability
// f = P(report | not event). h < f is legal.
struct CredibilityParams {
  double h = 0.0;
  double f = 0.0;

  void check(std::string_view who) const {
    check_probability(h, std::string(who) + " h");
    check_probability(f, std::string(who) + " f");
  }
};

// P(child event | parent true), P(child event | parent false).
struct LikelihoodPair {
  double if_true = 0.0;
  double if_false = 0.0;
};

struct ArcLikelihood {
  ArcRef arc;
  LikelihoodPair value;
};

// Joint CPT for a node with several parents. p_true is indexed in mixed
// radix over `parents` (true = 0, false = 1, last parent fastest).
struct NodeTable {
  NodeId node = 0;
  std::vector<NodeId> parents;
  std::vector<double> p_true;
};

inline std::map<ForceLabel, LikelihoodPair> default_force_table() {
  return {{ForceLabel::negligible, {0.55, 0.45}},
          {ForceLabel::weak, {0.7, 0.3}},
          {ForceLabel::moderate, {0.8, 0.2}},
          {ForceLabel::strong, {0.9, 0.1}},
          {ForceLabel::provisionally_forceful, {0.95, 0.05}}};
}

inline constexpr double kDefaultPrior = 0.5;

struct CompilationSpec {
  Chart chart;
  std::optional<NodeId> hypothesis;  // defaults to the ultimate probandum
  std::map<NodeId, double> priors;
  std::vector<ArcLikelihood> arc_likelihoods;
  std::vector<NodeTable> node_tables;
  std::map<NodeId, CredibilityParams> credibility;
  std::map<ForceLabel, LikelihoodPair> force_defaults = default_force_table();

  const ArcLikelihood* find_likelihood(ArcRef r) const {
    for (const auto& a : arc_likelihoods)
      if (a.arc == r) return &a;
    return nullptr;
  }
  const NodeTable* find_table(NodeId n) const {
    for (const auto& t : node_tables)
      if (t.node == n) return &t;
    return nullptr;
  }
};

enum class VariableRole { hypothesis, probandum, event, report };

inline constexpr std::string_view to_string(VariableRole r) {
  switch (r) {
    case VariableRole::hypothesis: return "hypothesis";
    case VariableRole::probandum: return "probandum";
    case VariableRole::event: return "event";
    case VariableRole::report: return "report";
  }
  return "?";
}

struct CompiledVariable {
  std::string name;
  NodeId node = 0;
  VariableRole role = VariableRole::event;
};

struct CompiledNetwork {
  BayesNet net;
  std::string hypothesis;
  std::vector<CompiledVariable> variables;
  // Every report variable at its observed state ("false" for missing evidence).
  EvidenceAssignment observed_reports;
  // CPT child name -> ancillary evidence ids that bear on it.
  std::map<std::string, std::vector<NodeId>> provenance;
  // Arcs whose likelihoods came from the force-label defaults.
  std::vector<ArcRef> defaulted_arcs;

  std::size_t count(VariableRole r) const {
    return static_cast<std::size_t>(
        std::count_if(variables.begin(), variables.end(), [&](const CompiledVariable& v) { return v.role == r; }));
  }
};

inline std::string report_name(std::string_view event_name) { return std::string(event_name) + "*"; }

namespace detail {

// Ancillary ids bearing on each compiled quantity. Attachments on an arc out
// of an evidence item bear on that item's credibility; attachments on any
// other arc bear on the arc's likelihoods.
struct AncillaryBasis {
  std::map<NodeId, std::vector<NodeId>> credibility;
  std::map<ArcRef, std::vector<NodeId>> arcs;
};

inline AncillaryBasis ancillary_basis(const Chart& chart) {
  AncillaryBasis b;
  for (const auto& att : chart.ancillary) {
    const auto* src = chart.find(att.target_arc.from);
    if (src && src->kind == NodeKind::evidence)
      b.credibility[src->id].push_back(att.evidence_id);
    else
      b.arcs[att.target_arc].push_back(att.evidence_id);
  }
  for (auto& [_, v] : b.credibility) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& [_, v] : b.arcs) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return b;
}

}  // namespace detail

inline CompiledNetwork compile_chart(const CompilationSpec& spec) {
  const Chart& chart = spec.chart;
  const auto report = validate_chart(chart);
  if (!report.ok())
    throw ModelError("cannot compile an invalid chart (" + std::to_string(report.violations.size()) + " violations)");

  const NodeId hyp = spec.hypothesis.value_or(*chart.ultimate());
  const auto* hyp_entry = chart.find(hyp);
  if (!hyp_entry || !is_probandum(hyp_entry->kind))
    throw ModelError("hypothesis " + std::to_string(hyp) + " is not a probandum in the chart");

  const auto roles = detail::relevance_roles(chart);
  detail::Adjacency reverse;
  for (const auto& a : chart.arcs) reverse[a.to].push_back(a.from);
  std::set<NodeId> included = detail::reaching(reverse, {hyp});
  for (NodeId n : roles.ancillary) included.erase(n);
  included.insert(hyp);

  // Net parents of a node are the included nodes its chart arcs point to.
  std::map<NodeId, std::vector<NodeId>> parents;
  for (const auto& a : chart.arcs)
    if (included.count(a.from) && included.count(a.to)) parents[a.from].push_back(a.to);
  for (auto& [_, p] : parents) std::sort(p.begin(), p.end());

  // Parents before children; ties by node id.
  std::vector<NodeId> order;
  {
    std::map<NodeId, std::size_t> pending;
    std::map<NodeId, std::vector<NodeId>> children;
    for (NodeId n : included) {
      pending[n] = parents[n].size();
      for (NodeId p : parents[n]) children[p].push_back(n);
    }
    std::set<NodeId> ready;
    for (const auto& [n, k] : pending)
      if (k == 0) ready.insert(n);
    while (!ready.empty()) {
      const NodeId n = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(n);
      for (NodeId c : children[n])
        if (--pending[c] == 0) ready.insert(c);
    }
  }

  const auto basis = detail::ancillary_basis(chart);
  CompiledNetwork out;
  out.hypothesis = chart.label(hyp);
  std::vector<Variable> vars;
  std::vector<Cpt> cpts;

  for (NodeId n : order) {
    const auto& entry = *chart.find(n);
    const std::string name = chart.label(n);
    vars.push_back(Variable{name, {"true", "false"}});
    Cpt cpt{name, {}, {}};
    for (NodeId p : parents[n]) cpt.parents.push_back(chart.label(p));

    if (n == hyp) {
      auto it = spec.priors.find(n);
      const double prior = it == spec.priors.end() ? kDefaultPrior : it->second;
      check_probability(prior, "prior of " + name);
      cpt.table = {{prior, 1.0 - prior}};
    } else if (const auto* table = spec.find_table(n)) {
      if (table->parents != parents[n])
        throw CompletenessError("node table for " + name + " must list parents in id order matching its arcs");
      if (table->p_true.size() != (std::size_t{1} << parents[n].size()))
        throw CompletenessError("node table for " + name + " has the wrong number of rows");
      for (double p : table->p_true) {
        check_probability(p, "node table entry for " + name);
        cpt.table.push_back({p, 1.0 - p});
      }
      for (NodeId p : parents[n])
        if (auto b = basis.arcs.find({n, p}); b != basis.arcs.end())
          out.provenance[name].insert(out.provenance[name].end(), b->second.begin(), b->second.end());
    } else {
      // Per-arc likelihoods; several parents combine as independent causes
      // (noisy-or over the per-arc probabilities).
      std::vector<LikelihoodPair> per_arc;
      for (NodeId p : parents[n]) {
        const ArcRef r{n, p};
        if (const auto* l = spec.find_likelihood(r)) {
          per_arc.push_back(l->value);
        } else {
          const auto* arc = chart.find_arc(r);
          auto d = spec.force_defaults.find(arc->force_label);
          if (d == spec.force_defaults.end())
            throw CompletenessError("arc " + std::to_string(n) + "->" + std::to_string(p) +
                                    " has no likelihoods and no default for force label '" +
                                    std::string(to_string(arc->force_label)) + "'");
          per_arc.push_back(d->second);
          out.defaulted_arcs.push_back(r);
        }
        const std::string arc_text = std::to_string(n) + "->" + std::to_string(p);
        check_probability(per_arc.back().if_true, "likelihood if true on arc " + arc_text);
        check_probability(per_arc.back().if_false, "likelihood if false on arc " + arc_text);
        if (auto b = basis.arcs.find(r); b != basis.arcs.end())
          out.provenance[name].insert(out.provenance[name].end(), b->second.begin(), b->second.end());
      }
      const std::size_t k = per_arc.size();
      for (std::size_t row = 0; row < (std::size_t{1} << k); ++row) {
        double p_true;
        if (k == 1) {
          p_true = row == 0 ? per_arc[0].if_true : per_arc[0].if_false;
        } else {
          double none = 1.0;
          for (std::size_t i = 0; i < k; ++i) {
            const bool parent_true = ((row >> (k - 1 - i)) & 1U) == 0;
            none *= 1.0 - (parent_true ? per_arc[i].if_true : per_arc[i].if_false);
          }
          p_true = 1.0 - none;
        }
        cpt.table.push_back({p_true, 1.0 - p_true});
      }
    }
    if (auto& pv = out.provenance[name]; !pv.empty()) {
      std::sort(pv.begin(), pv.end());
      pv.erase(std::unique(pv.begin(), pv.end()), pv.end());
    } else {
      out.provenance.erase(name);
    }
    cpts.push_back(std::move(cpt));

    const VariableRole role = n == hyp                      ? VariableRole::hypothesis
                              : entry.kind == NodeKind::evidence ? VariableRole::event
                                                                 : VariableRole::probandum;
    out.variables.push_back({name, n, role});

    if (entry.kind == NodeKind::evidence) {
      auto c = spec.credibility.find(n);
      if (c == spec.credibility.end())
        throw CompletenessError("evidence " + std::to_string(n) + " (" + name + ") has no credibility parameters");
      c->second.check("credibility of " + name);
      const std::string rname = report_name(name);
      vars.push_back(Variable{rname, {"true", "false"}});
      cpts.push_back(Cpt{rname, {name}, {{c->second.h, 1.0 - c->second.h}, {c->second.f, 1.0 - c->second.f}}});
      out.variables.push_back({rname, n, VariableRole::report});
      out.observed_reports[rname] = entry.evidence_form == EvidenceForm::missing ? "false" : "true";
      if (auto b = basis.credibility.find(n); b != basis.credibility.end()) out.provenance[rname] = b->second;
    }
  }
  std::sort(out.defaulted_arcs.begin(), out.defaulted_arcs.end());
  out.net = BayesNet(std::move(vars), std::move(cpts));
  return out;
}

// ---------------------------------------------------------------------------
// Ancillary provenance report

enum class EntryKind { arc_likelihood, node_table, credibility };

inline constexpr std::string_view to_string(EntryKind k) {
  switch (k) {
    case EntryKind::arc_likelihood: return "arc_likelihood";
    case EntryKind::node_table: return "node_table";
    case EntryKind::credibility: return "credibility";
  }
  return "?";
}

struct AnnotatedEntry {
  EntryKind kind = EntryKind::arc_likelihood;
  NodeId node = 0;
  std::optional<ArcRef> arc;
  std::vector<NodeId> basis;

  std::string describe() const {
    std::string s(to_string(kind));
    s += arc ? " " + std::to_string(arc->from) + "->" + std::to_string(arc->to) : " " + std::to_string(node);
    return s;
  }
};

struct AnnotationReport {
  std::vector<AnnotatedEntry> supported;
  std::vector<AnnotatedEntry> unsupported;
  std::vector<ArcRef> defaulted;  // direct arcs relying on force-label defaults
};

inline AnnotationReport annotate_from_ancillary(const CompilationSpec& spec) {
  const Chart& chart = spec.chart;
  const auto basis = detail::ancillary_basis(chart);
  std::vector<AnnotatedEntry> all;

  for (const auto& l : spec.arc_likelihoods) {
    AnnotatedEntry e{EntryKind::arc_likelihood, l.arc.from, l.arc, {}};
    if (auto b = basis.arcs.find(l.arc); b != basis.arcs.end()) e.basis = b->second;
    all.push_back(std::move(e));
  }
  for (const auto& t : spec.node_tables) {
    AnnotatedEntry e{EntryKind::node_table, t.node, std::nullopt, {}};
    for (NodeId p : t.parents)
      if (auto b = basis.arcs.find({t.node, p}); b != basis.arcs.end())
        e.basis.insert(e.basis.end(), b->second.begin(), b->second.end());
    std::sort(e.basis.begin(), e.basis.end());
    e.basis.erase(std::unique(e.basis.begin(), e.basis.end()), e.basis.end());
    all.push_back(std::move(e));
  }
  for (const auto& [node, _] : spec.credibility) {
    AnnotatedEntry e{EntryKind::credibility, node, std::nullopt, {}};
    if (auto b = basis.credibility.find(node); b != basis.credibility.end()) e.basis = b->second;
    all.push_back(std::move(e));
  }
  std::stable_sort(all.begin(), all.end(), [](const AnnotatedEntry& a, const AnnotatedEntry& b) {
    if (a.node != b.node) return a.node < b.node;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.arc < b.arc;
  });

  AnnotationReport out;
  for (auto& e : all) (e.basis.empty() ? out.unsupported : out.supported).push_back(std::move(e));

  const auto roles = detail::relevance_roles(chart);
  for (const auto& a : chart.arcs) {
    if (roles.ancillary.count(a.from) || roles.ancillary.count(a.to)) continue;
    const auto* to = chart.find(a.to);
    if (!to || to->kind == NodeKind::ultimate_probandum) continue;
    if (spec.find_likelihood(a.ref()) || spec.find_table(a.from)) continue;
    out.defaulted.push_back(a.ref());
  }
  std::sort(out.defaulted.begin(), out.defaulted.end());
  return out;
}

inline std::string render(const AnnotationReport& r) {
  std::ostringstream os;
  auto ids = [](const std::vector<NodeId>& v) {
    std::string s;
    for (NodeId n : v) s += (s.empty() ? "" : ", ") + std::to_string(n);
    return s;
  };
  os << "supported judgments:\n";
  for (const auto& e : r.supported) os << "  " << e.describe() << " <- ancillary " << ids(e.basis) << '\n';
  os << "unsupported judgments:\n";
  for (const auto& e : r.unsupported) os << "  " << e.describe() << '\n';
  os << "force-label defaults:\n";
  for (const auto& a : r.defaulted) os << "  arc " << a.from << "->" << a.to << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Compilation spec file

inline CompilationSpec parse_compilation_spec(const nlohmann::json& doc, Chart chart) {
  if (!doc.is_object()) throw ParseError("compilation spec: top level must be an object");
  CompilationSpec spec;
  spec.chart = std::move(chart);
  const Chart& c = spec.chart;
  auto number = [](const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = detail::require(j, key, where);
    if (!v.is_number()) throw ParseError(where + ": '" + key + "' must be a number");
    return v.get<double>();
  };

  if (auto h = doc.find("hypothesis"); h != doc.end()) spec.hypothesis = resolve_node_ref(c, *h, "hypothesis");

  if (auto p = doc.find("priors"); p != doc.end()) {
    if (!p->is_object()) throw ParseError("compilation spec: 'priors' must be an object");
    for (const auto& [key, val] : p->items()) {
      const nlohmann::json ref = std::all_of(key.begin(), key.end(), ::isdigit) && !key.empty()
                                     ? nlohmann::json(std::stoll(key))
                                     : nlohmann::json(key);
      if (!val.is_number()) throw ParseError("priors." + key + " must be a number");
      spec.priors[resolve_node_ref(c, ref, "priors")] = val.get<double>();
      check_probability(val.get<double>(), "prior of " + key);
    }
  }

  if (auto a = doc.find("arc_likelihoods"); a != doc.end()) {
    if (!a->is_array()) throw ParseError("compilation spec: 'arc_likelihoods' must be an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string where = "arc_likelihoods[" + std::to_string(i) + "]";
      const auto& j = (*a)[i];
      ArcLikelihood l{parse_arc_ref(c, j, where), {number(j, "if_true", where), number(j, "if_false", where)}};
      if (!c.find_arc(l.arc)) throw ParseError(where + ": arc is not in the chart");
      check_probability(l.value.if_true, where + ".if_true");
      check_probability(l.value.if_false, where + ".if_false");
      spec.arc_likelihoods.push_back(l);
    }
  }

  if (auto t = doc.find("node_tables"); t != doc.end()) {
    if (!t->is_array()) throw ParseError("compilation spec: 'node_tables' must be an array");
    for (std::size_t i = 0; i < t->size(); ++i) {
      const std::string where = "node_tables[" + std::to_string(i) + "]";
      const auto& j = (*t)[i];
      NodeTable nt;
      nt.node = resolve_node_ref(c, detail::require(j, "node", where), where);
      const auto& ps = detail::require(j, "parents", where);
      if (!ps.is_array()) throw ParseError(where + ": 'parents' must be an array");
      for (const auto& p : ps) nt.parents.push_back(resolve_node_ref(c, p, where));
      // Stored in id order; rows are re-keyed accordingly.
      std::vector<std::size_t> perm(nt.parents.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return nt.parents[x] < nt.parents[y]; });
      std::vector<NodeId> sorted;
      for (std::size_t k : perm) sorted.push_back(nt.parents[k]);
      const std::size_t k = nt.parents.size();
      nt.p_true.assign(std::size_t{1} << k, -1.0);
      const auto& rows = detail::require(j, "rows", where);
      if (!rows.is_array()) throw ParseError(where + ": 'rows' must be an array");
      for (const auto& row : rows) {
        const auto& given = detail::require(row, "given", where);
        if (!given.is_array() || given.size() != k) throw ParseError(where + ": row 'given' must list one state per parent");
        std::size_t r = 0;
        for (std::size_t pos = 0; pos < k; ++pos) {
          const auto& g = given[perm[pos]];
          if (!g.is_string() || (g != "true" && g != "false"))
            throw ParseError(where + ": parent states must be \"true\" or \"false\"");
          r = (r << 1) | (g == "false" ? 1U : 0U);
        }
        const double p = number(row, "p_true", where);
        check_probability(p, where + ".p_true");
        if (nt.p_true[r] >= 0.0) throw ParseError(where + ": duplicate row " + given.dump());
        nt.p_true[r] = p;
      }
      if (std::any_of(nt.p_true.begin(), nt.p_true.end(), [](double x) { return x < 0.0; }))
        throw ParseError(where + ": rows do not cover every parent combination");
      nt.parents = std::move(sorted);
      spec.node_tables.push_back(std::move(nt));
    }
  }

  if (auto cr = doc.find("credibility"); cr != doc.end()) {
    if (!cr->is_array()) throw ParseError("compilation spec: 'credibility' must be an array");
    for (std::size_t i = 0; i < cr->size(); ++i) {
      const std::string where = "credibility[" + std::to_string(i) + "]";
      const auto& j = (*cr)[i];
      const NodeId n = resolve_node_ref(c, detail::require(j, "node", where), where);
      const auto* e = c.find(n);
      if (!e || e->kind != NodeKind::evidence) throw ParseError(where + ": node " + std::to_string(n) + " is not evidence");
      CredibilityParams cp{number(j, "h", where), number(j, "f", where)};
      cp.check(where);
      spec.credibility[n] = cp;
    }
  }

  if (auto fd = doc.find("force_defaults"); fd != doc.end()) {
    if (!fd->is_object()) throw ParseError("compilation spec: 'force_defaults' must be an object");
    spec.force_defaults.clear();
    for (const auto& [label, val] : fd->items()) {
      if (!val.is_array() || val.size() != 2 || !val[0].is_number() || !val[1].is_number())
        throw ParseError("force_defaults." + label + " must be [if_true, if_false]");
      LikelihoodPair lp{val[0].get<double>(), val[1].get<double>()};
      check_probability(lp.if_true, "force_defaults." + label);
      check_probability(lp.if_false, "force_defaults." + label);
      spec.force_defaults[parse_force_label(label)] = lp;
    }
  }
  return spec;
}

// Loads a spec whose "case" path is resolved relative to the spec file.
inline CompilationSpec load_compilation_spec(const std::string& path) {
  const auto doc = detail::read_json_file(path);
  if (!doc.is_object() || !doc.contains("case") || !doc["case"].is_string())
    throw ParseError(path + ": missing string field 'case'");
  const auto case_path = std::filesystem::path(path).parent_path() / doc["case"].get<std::string>();
  Chart chart = load_chart(case_path.string());
  try {
    return parse_compilation_spec(doc, std::move(chart));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace wigmore
