#pragma once

// Wigmorean key lists and charts: parsing, structural validation, relevance
// classification and dot export.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wigmore/error.hpp"

namespace wigmore {

using NodeId = std::int64_t;

enum class NodeKind { ultimate_probandum, penultimate_probandum, interim_probandum, evidence };

enum class EvidenceForm { tangible, testimonial, missing, authoritative_record };

// Ordinal verbal strength carried on an arc.
enum class ForceLabel { negligible, weak, moderate, strong, provisionally_forceful };

inline constexpr std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::ultimate_probandum: return "ultimate_probandum";
    case NodeKind::penultimate_probandum: return "penultimate_probandum";
    case NodeKind::interim_probandum: return "interim_probandum";
    case NodeKind::evidence: return "evidence";
  }
  return "?";
}

inline constexpr std::string_view to_string(EvidenceForm f) {
  switch (f) {
    case EvidenceForm::tangible: return "tangible";
    case EvidenceForm::testimonial: return "testimonial";
    case EvidenceForm::missing: return "missing";
    case EvidenceForm::authoritative_record: return "authoritative_record";
  }
  return "?";
}

inline constexpr std::string_view to_string(ForceLabel f) {
  switch (f) {
    case ForceLabel::negligible: return "negligible";
    case ForceLabel::weak: return "weak";
    case ForceLabel::moderate: return "moderate";
    case ForceLabel::strong: return "strong";
    case ForceLabel::provisionally_forceful: return "provisionally_forceful";
  }
  return "?";
}

inline NodeKind parse_node_kind(std::string_view s) {
  for (auto k : {NodeKind::ultimate_probandum, NodeKind::penultimate_probandum,
                 NodeKind::interim_probandum, NodeKind::evidence})
    if (to_string(k) == s) return k;
  throw ParseError("unknown node kind '" + std::string(s) + "'");
}

inline EvidenceForm parse_evidence_form(std::string_view s) {
  for (auto f : {EvidenceForm::tangible, EvidenceForm::testimonial, EvidenceForm::missing,
                 EvidenceForm::authoritative_record})
    if (to_string(f) == s) return f;
  throw ParseError("unknown evidence form '" + std::string(s) + "'");
}

inline ForceLabel parse_force_label(std::string_view s) {
  for (auto f : {ForceLabel::negligible, ForceLabel::weak, ForceLabel::moderate, ForceLabel::strong,
                 ForceLabel::provisionally_forceful})
    if (to_string(f) == s) return f;
  throw ParseError("unknown force label '" + std::string(s) + "'");
}

inline bool is_probandum(NodeKind k) { return k != NodeKind::evidence; }

struct KeyListEntry {
  NodeId id = 0;
  std::string text;
  NodeKind kind = NodeKind::evidence;
  std::optional<EvidenceForm> evidence_form;
  std::optional<std::string> alias;
};

struct ArcRef {
  NodeId from = 0;
  NodeId to = 0;
  auto operator<=>(const ArcRef&) const = default;
};

struct ReasoningArc {
  NodeId from = 0;
  NodeId to = 0;
  ForceLabel force_label = ForceLabel::moderate;
  std::optional<std::string> generalization;

  ArcRef ref() const { return {from, to}; }
};

struct AncillaryAttachment {
  NodeId evidence_id = 0;
  ArcRef target_arc;
};

struct Chart {
  std::vector<KeyListEntry> key_list;
  std::vector<ReasoningArc> arcs;
  std::vector<AncillaryAttachment> ancillary;

  const KeyListEntry* find(NodeId id) const {
    for (const auto& e : key_list)
      if (e.id == id) return &e;
    return nullptr;
  }

  const ReasoningArc* find_arc(ArcRef r) const {
    for (const auto& a : arcs)
      if (a.ref() == r) return &a;
    return nullptr;
  }

  // Alias when present, otherwise the decimal id.
  std::string label(NodeId id) const {
    if (const auto* e = find(id); e && e->alias) return *e->alias;
    return std::to_string(id);
  }

  std::optional<NodeId> ultimate() const {
    for (const auto& e : key_list)
      if (e.kind == NodeKind::ultimate_probandum) return e.id;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Case file parsing

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, std::string_view where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string(where) + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key, std::string_view where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) throw ParseError(std::string(where) + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace detail

// Resolves an integer id or a key-list alias to a node id.
inline NodeId resolve_node_ref(const Chart& chart, const nlohmann::json& ref, std::string_view where) {
  if (ref.is_number_integer()) return ref.get<NodeId>();
  if (ref.is_string()) {
    const auto s = ref.get<std::string>();
    for (const auto& e : chart.key_list)
      if (e.alias && *e.alias == s) return e.id;
    throw ParseError(std::string(where) + ": unresolved node alias '" + s + "'");
  }
  throw ParseError(std::string(where) + ": node reference must be an integer id or alias string");
}

inline ArcRef parse_arc_ref(const Chart& chart, const nlohmann::json& j, std::string_view where) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": arc reference must be an object");
  return {resolve_node_ref(chart, detail::require(j, "from", where), where),
          resolve_node_ref(chart, detail::require(j, "to", where), where)};
}

namespace detail {

// Runs a label parser, prefixing any failure with the document location.
template <class Parse>
auto at(const std::string& where, Parse&& parse) {
  try {
    return parse();
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace detail

inline Chart parse_chart(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("case file: top level must be an object");
  Chart chart;

  const auto& keys = detail::require(doc, "key_list", "case file");
  if (!keys.is_array()) throw ParseError("case file: 'key_list' must be an array");
  std::set<std::string> aliases;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    const std::string where = "key_list[" + std::to_string(i) + "]";
    if (!k.is_object()) throw ParseError(where + ": entry must be an object");
    KeyListEntry e;
    const auto& id = detail::require(k, "id", where);
    if (!id.is_number_integer()) throw ParseError(where + ": 'id' must be an integer");
    e.id = id.get<NodeId>();
    e.text = detail::require_string(k, "text", where);
    const std::string kind = detail::require_string(k, "kind", where);
    e.kind = detail::at(where, [&] { return parse_node_kind(kind); });
    if (auto f = k.find("evidence_form"); f != k.end() && !f->is_null()) {
      if (!f->is_string()) throw ParseError(where + ": 'evidence_form' must be a string");
      e.evidence_form = detail::at(where, [&] { return parse_evidence_form(f->get<std::string>()); });
    }
    if (auto a = k.find("alias"); a != k.end() && !a->is_null()) {
      if (!a->is_string() || a->get<std::string>().empty())
        throw ParseError(where + ": 'alias' must be a non-empty string");
      e.alias = a->get<std::string>();
      if (!aliases.insert(*e.alias).second) throw ParseError(where + ": duplicate alias '" + *e.alias + "'");
    }
    chart.key_list.push_back(std::move(e));
  }

  if (auto it = doc.find("arcs"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("case file: 'arcs' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& a = (*it)[i];
      const std::string where = "arcs[" + std::to_string(i) + "]";
      if (!a.is_object()) throw ParseError(where + ": arc must be an object");
      ReasoningArc arc;
      arc.from = resolve_node_ref(chart, detail::require(a, "from", where), where);
      arc.to = resolve_node_ref(chart, detail::require(a, "to", where), where);
      const std::string label = detail::require_string(a, "force_label", where);
      arc.force_label = detail::at(where, [&] { return parse_force_label(label); });
      if (auto g = a.find("generalization"); g != a.end() && !g->is_null()) {
        if (!g->is_string()) throw ParseError(where + ": 'generalization' must be a string");
        arc.generalization = g->get<std::string>();
      }
      chart.arcs.push_back(std::move(arc));
    }
  }

  if (auto it = doc.find("ancillary"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("case file: 'ancillary' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& a = (*it)[i];
      const std::string where = "ancillary[" + std::to_string(i) + "]";
      if (!a.is_object()) throw ParseError(where + ": attachment must be an object");
      AncillaryAttachment att;
      att.evidence_id = resolve_node_ref(chart, detail::require(a, "evidence_id", where), where);
      att.target_arc = parse_arc_ref(chart, detail::require(a, "target_arc", where), where + ".target_arc");
      chart.ancillary.push_back(att);
    }
  }
  return chart;
}

inline Chart load_chart(const std::string& path) {
  try {
    return parse_chart(detail::read_json_file(path));
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ParseError(path + ": " + msg);
  }
}

inline nlohmann::json to_json(const Chart& chart) {
  nlohmann::json doc;
  auto& keys = doc["key_list"] = nlohmann::json::array();
  for (const auto& e : chart.key_list) {
    nlohmann::json k{{"id", e.id}, {"text", e.text}, {"kind", to_string(e.kind)}};
    if (e.evidence_form) k["evidence_form"] = to_string(*e.evidence_form);
    if (e.alias) k["alias"] = *e.alias;
    keys.push_back(std::move(k));
  }
  auto& arcs = doc["arcs"] = nlohmann::json::array();
  for (const auto& a : chart.arcs) {
    nlohmann::json j{{"from", a.from}, {"to", a.to}, {"force_label", to_string(a.force_label)}};
    if (a.generalization) j["generalization"] = *a.generalization;
    arcs.push_back(std::move(j));
  }
  auto& anc = doc["ancillary"] = nlohmann::json::array();
  for (const auto& a : chart.ancillary)
    anc.push_back({{"evidence_id", a.evidence_id},
                   {"target_arc", {{"from", a.target_arc.from}, {"to", a.target_arc.to}}}});
  return doc;
}

// ---------------------------------------------------------------------------
// Validation

namespace rule {
inline constexpr std::string_view invalid_id = "invalid_id";
inline constexpr std::string_view duplicate_id = "duplicate_id";
inline constexpr std::string_view evidence_form = "evidence_form";
inline constexpr std::string_view ultimate_count = "ultimate_count";
inline constexpr std::string_view unknown_node = "unknown_node";
inline constexpr std::string_view self_loop = "self_loop";
inline constexpr std::string_view acyclicity = "acyclicity";
inline constexpr std::string_view direction = "direction";
inline constexpr std::string_view penultimate_link = "penultimate_link";
inline constexpr std::string_view non_sequitur = "non_sequitur";
inline constexpr std::string_view ancillary_target = "ancillary_target";
inline constexpr std::string_view ancillary_source = "ancillary_source";
inline constexpr std::string_view ancillary_direct_arc = "ancillary_direct_arc";
inline constexpr std::string_view orphan_evidence = "orphan_evidence";
inline constexpr std::string_view ambiguous_relevance = "ambiguous_relevance";
}  // namespace rule

struct Violation {
  std::string rule;
  NodeId node = 0;
  std::optional<ArcRef> arc;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(std::string_view rule_name) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [&](const Violation& v) { return v.rule == rule_name; }));
  }
};

namespace detail {

inline int hierarchy_level(NodeKind k) {
  switch (k) {
    case NodeKind::evidence: return 0;
    case NodeKind::interim_probandum: return 1;
    case NodeKind::penultimate_probandum: return 2;
    case NodeKind::ultimate_probandum: return 3;
  }
  return 0;
}

// Upward means toward the ultimate probandum. Links between two interim
// probanda, or between two evidence items, are catenated steps on one level.
inline bool is_upward(NodeKind from, NodeKind to) {
  const int lf = hierarchy_level(from), lt = hierarchy_level(to);
  if (lf < lt) return true;
  return lf == lt && (from == NodeKind::interim_probandum || from == NodeKind::evidence);
}

using Adjacency = std::map<NodeId, std::vector<NodeId>>;

// Nodes from which any of `targets` is reachable along `forward` edges.
inline std::set<NodeId> reaching(const Adjacency& reverse, const std::set<NodeId>& targets) {
  std::set<NodeId> seen;
  std::deque<NodeId> queue(targets.begin(), targets.end());
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    auto it = reverse.find(n);
    if (it == reverse.end()) continue;
    for (NodeId p : it->second)
      if (seen.insert(p).second) queue.push_back(p);
  }
  return seen;
}

// Tarjan's strongly connected components; returns only components that
// contain a cycle (size > 1; self loops are handled separately).
inline std::vector<std::vector<NodeId>> cyclic_components(const std::vector<NodeId>& nodes,
                                                          const Adjacency& forward) {
  std::map<NodeId, int> index, low;
  std::set<NodeId> on_stack;
  std::vector<NodeId> stack;
  std::vector<std::vector<NodeId>> out;
  int counter = 0;

  std::function<void(NodeId)> visit = [&](NodeId v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    if (auto it = forward.find(v); it != forward.end()) {
      for (NodeId w : it->second) {
        if (!index.count(w)) {
          visit(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack.count(w)) {
          low[v] = std::min(low[v], index[w]);
        }
      }
    }
    if (low[v] == index[v]) {
      std::vector<NodeId> comp;
      NodeId w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1) {
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  };
  for (NodeId n : nodes)
    if (!index.count(n)) visit(n);
  std::sort(out.begin(), out.end());
  return out;
}

// Relevance roles computed over the arc graph.
struct RelevanceRoles {
  std::set<NodeId> direct;     // has a directed path to a penultimate probandum
  std::set<NodeId> ancillary;  // is, or feeds, the root of an ancillary attachment
};

inline RelevanceRoles relevance_roles(const Chart& chart) {
  Adjacency reverse;
  for (const auto& a : chart.arcs)
    if (a.from != a.to) reverse[a.to].push_back(a.from);
  std::set<NodeId> penultimate;
  for (const auto& e : chart.key_list)
    if (e.kind == NodeKind::penultimate_probandum) penultimate.insert(e.id);
  std::set<NodeId> roots;
  for (const auto& att : chart.ancillary) roots.insert(att.evidence_id);

  RelevanceRoles roles;
  roles.direct = reaching(reverse, penultimate);
  roles.ancillary = reaching(reverse, roots);
  roles.ancillary.insert(roots.begin(), roots.end());
  return roles;
}

}  // namespace detail

inline ValidationReport validate_chart(const Chart& chart) {
  std::vector<Violation> out;
  auto add = [&](std::string_view r, NodeId node, std::optional<ArcRef> arc, std::string msg) {
    out.push_back({std::string(r), node, arc, std::move(msg)});
  };
  auto arc_text = [](ArcRef a) { return std::to_string(a.from) + "->" + std::to_string(a.to); };

  std::map<NodeId, const KeyListEntry*> nodes;
  for (const auto& e : chart.key_list) {
    if (e.id <= 0) add(rule::invalid_id, e.id, std::nullopt, "node id must be a positive integer");
    if (!nodes.emplace(e.id, &e).second)
      add(rule::duplicate_id, e.id, std::nullopt, "id " + std::to_string(e.id) + " appears more than once");
    const bool is_evidence = e.kind == NodeKind::evidence;
    if (is_evidence && !e.evidence_form)
      add(rule::evidence_form, e.id, std::nullopt, "evidence node lacks an evidence_form");
    if (!is_evidence && e.evidence_form)
      add(rule::evidence_form, e.id, std::nullopt, "probandum node carries an evidence_form");
  }

  std::vector<NodeId> ultimates;
  for (const auto& [id, e] : nodes)
    if (e->kind == NodeKind::ultimate_probandum) ultimates.push_back(id);
  if (ultimates.empty()) add(rule::ultimate_count, 0, std::nullopt, "chart has no ultimate probandum");
  for (std::size_t i = 1; i < ultimates.size(); ++i)
    add(rule::ultimate_count, ultimates[i], std::nullopt,
        "second ultimate probandum (first is " + std::to_string(ultimates[0]) + ")");

  auto kind_of = [&](NodeId id) { return nodes.at(id)->kind; };

  detail::Adjacency forward;
  std::vector<ArcRef> graph_arcs;
  std::set<ArcRef> seen_arcs;
  for (const auto& a : chart.arcs) {
    const bool known_from = nodes.count(a.from) > 0, known_to = nodes.count(a.to) > 0;
    if (!known_from) add(rule::unknown_node, a.from, a.ref(), "arc " + arc_text(a.ref()) + " starts at an unknown node");
    if (!known_to) add(rule::unknown_node, a.to, a.ref(), "arc " + arc_text(a.ref()) + " ends at an unknown node");
    if (!known_from || !known_to) continue;
    if (a.from == a.to) {
      add(rule::self_loop, a.from, a.ref(), "arc " + arc_text(a.ref()) + " is a self loop");
      continue;
    }
    if (!seen_arcs.insert(a.ref()).second) continue;
    forward[a.from].push_back(a.to);
    graph_arcs.push_back(a.ref());
  }

  std::vector<NodeId> ids;
  for (const auto& [id, _] : nodes) ids.push_back(id);
  std::map<NodeId, std::size_t> component_of;
  const auto cycles = detail::cyclic_components(ids, forward);
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    std::string members;
    for (NodeId n : cycles[c]) {
      component_of[n] = c;
      members += (members.empty() ? "" : ", ") + std::to_string(n);
    }
    add(rule::acyclicity, cycles[c].front(), std::nullopt, "directed cycle through nodes " + members);
  }

  // An arc on a cycle is reported once, under acyclicity.
  for (const auto& r : graph_arcs) {
    auto cf = component_of.find(r.from), ct = component_of.find(r.to);
    if (cf != component_of.end() && ct != component_of.end() && cf->second == ct->second) continue;
    if (!detail::is_upward(kind_of(r.from), kind_of(r.to)))
      add(rule::direction, r.from, r,
          "arc " + arc_text(r) + " runs from " + std::string(to_string(kind_of(r.from))) + " down to " +
              std::string(to_string(kind_of(r.to))));
  }

  std::set<NodeId> attachment_roots;
  for (const auto& att : chart.ancillary) attachment_roots.insert(att.evidence_id);

  for (const auto& [id, e] : nodes) {
    if (e->kind == NodeKind::penultimate_probandum) {
      const bool linked = std::any_of(graph_arcs.begin(), graph_arcs.end(), [&](const ArcRef& r) {
        return r.from == id && kind_of(r.to) == NodeKind::ultimate_probandum;
      });
      if (!linked) add(rule::penultimate_link, id, std::nullopt, "penultimate probandum has no arc to the ultimate probandum");
    }
    if (e->kind == NodeKind::interim_probandum) {
      const bool has_in = std::any_of(graph_arcs.begin(), graph_arcs.end(), [&](const ArcRef& r) { return r.to == id; });
      const bool has_out = attachment_roots.count(id) > 0 ||
                           std::any_of(graph_arcs.begin(), graph_arcs.end(), [&](const ArcRef& r) { return r.from == id; });
      if (!has_in || !has_out)
        add(rule::non_sequitur, id, std::nullopt,
            !has_in && !has_out ? "interim probandum is disconnected"
            : !has_in           ? "interim probandum has no supporting arc"
                                : "interim probandum leads nowhere");
    }
  }

  std::set<NodeId> direct_arc_flagged;
  for (const auto& att : chart.ancillary) {
    const NodeId src = att.evidence_id;
    auto it = nodes.find(src);
    if (it == nodes.end()) {
      add(rule::unknown_node, src, att.target_arc, "ancillary attachment names an unknown node");
      continue;
    }
    if (it->second->kind == NodeKind::penultimate_probandum || it->second->kind == NodeKind::ultimate_probandum)
      add(rule::ancillary_source, src, att.target_arc, "ancillary attachment must originate at evidence or an interim link");
    if (!seen_arcs.count(att.target_arc))
      add(rule::ancillary_target, src, att.target_arc,
          "ancillary attachment targets arc " + arc_text(att.target_arc) + " which is not in the chart");
    for (const auto& r : graph_arcs) {
      if (r.from == src && is_probandum(kind_of(r.to)) && !direct_arc_flagged.count(src)) {
        direct_arc_flagged.insert(src);
        add(rule::ancillary_direct_arc, src, r,
            "ancillary node also feeds probandum " + std::to_string(r.to) + " directly");
      }
    }
  }

  const auto roles = detail::relevance_roles(chart);
  for (const auto& [id, e] : nodes) {
    if (e->kind != NodeKind::evidence) continue;
    const bool direct = roles.direct.count(id) > 0, anc = roles.ancillary.count(id) > 0;
    if (!direct && !anc)
      add(rule::orphan_evidence, id, std::nullopt, "evidence has no chain of reasoning to a penultimate probandum");
    else if (direct && anc && !direct_arc_flagged.count(id))
      add(rule::ambiguous_relevance, id, std::nullopt, "evidence is both directly relevant and ancillary");
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    if (a.node != b.node) return a.node < b.node;
    if (a.rule != b.rule) return a.rule < b.rule;
    return a.arc < b.arc;
  });
  return {std::move(out)};
}

inline std::string render(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& v : report.violations) {
    os << "node " << v.node;
    if (v.arc) os << " arc " << v.arc->from << "->" << v.arc->to;
    os << " [" << v.rule << "] " << v.message << '\n';
  }
  os << report.violations.size() << " violation" << (report.violations.size() == 1 ? "" : "s") << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Relevance

enum class Relevance { directly_relevant, ancillary };

inline constexpr std::string_view to_string(Relevance r) {
  return r == Relevance::directly_relevant ? "directly_relevant" : "ancillary";
}

struct RelevanceClassification {
  std::map<NodeId, Relevance> roles;
  std::size_t direct_count = 0;
  std::size_t ancillary_count = 0;
};

inline RelevanceClassification classify_relevance(const Chart& chart) {
  const auto roles = detail::relevance_roles(chart);
  RelevanceClassification out;
  for (const auto& e : chart.key_list) {
    if (e.kind != NodeKind::evidence) continue;
    const bool direct = roles.direct.count(e.id) > 0, anc = roles.ancillary.count(e.id) > 0;
    if (direct && anc)
      throw AmbiguityError("evidence " + std::to_string(e.id) + " is both directly relevant and ancillary");
    if (!direct && !anc)
      throw Error("evidence " + std::to_string(e.id) + " is neither directly relevant nor ancillary");
    out.roles[e.id] = direct ? Relevance::directly_relevant : Relevance::ancillary;
    ++(direct ? out.direct_count : out.ancillary_count);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dot export

enum class ExportStyle { full, direct_only };

inline ExportStyle parse_export_style(std::string_view s) {
  if (s == "full") return ExportStyle::full;
  if (s == "direct_only") return ExportStyle::direct_only;
  throw ParseError("unknown export style '" + std::string(s) + "'");
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

inline std::string node_shape(const KeyListEntry& e, bool ancillary) {
  switch (e.kind) {
    case NodeKind::ultimate_probandum: return "shape=doubleoctagon";
    case NodeKind::penultimate_probandum: return "shape=box";
    case NodeKind::interim_probandum: return "shape=circle";
    case NodeKind::evidence: break;
  }
  if (ancillary) return "shape=triangle, style=filled, fillcolor=black, fontcolor=white";
  if (e.evidence_form == EvidenceForm::tangible || e.evidence_form == EvidenceForm::authoritative_record)
    return "shape=box, style=diagonals";
  if (e.evidence_form == EvidenceForm::missing) return "shape=ellipse, style=dashed";
  return "shape=ellipse";
}

inline std::string node_name(NodeId id) { return "n" + std::to_string(id); }

}  // namespace detail

// Dot digraph, bottom-to-top so arcs point upward toward the ultimate
// probandum. Evidence labels carry the infinity mark; ancillary attachments
// end at a point node placed on the arc they bear on.
inline std::string export_chart(const Chart& chart, ExportStyle style) {
  const auto roles = detail::relevance_roles(chart);
  auto is_ancillary = [&](NodeId id) { return roles.ancillary.count(id) > 0; };
  auto shown = [&](NodeId id) { return style == ExportStyle::full || !is_ancillary(id); };

  std::vector<const KeyListEntry*> entries;
  for (const auto& e : chart.key_list) entries.push_back(&e);
  std::stable_sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<const ReasoningArc*> arcs;
  for (const auto& a : chart.arcs) arcs.push_back(&a);
  std::stable_sort(arcs.begin(), arcs.end(), [](auto* a, auto* b) { return a->ref() < b->ref(); });

  std::map<ArcRef, std::vector<NodeId>> attached;
  if (style == ExportStyle::full)
    for (const auto& att : chart.ancillary) attached[att.target_arc].push_back(att.evidence_id);
  for (auto& [_, v] : attached) std::sort(v.begin(), v.end());

  std::ostringstream os;
  os << "digraph wigmore {\n";
  os << "  rankdir=BT;\n";
  for (const auto* e : entries) {
    if (!shown(e->id)) continue;
    std::string label = std::to_string(e->id);
    if (e->kind == NodeKind::evidence) label = "\xE2\x88\x9E " + label;
    if (e->alias) label += " " + *e->alias;
    os << "  " << detail::node_name(e->id) << " [label=\"" << detail::dot_escape(label) << "\", "
       << detail::node_shape(*e, is_ancillary(e->id)) << ", tooltip=\"" << detail::dot_escape(e->text) << "\"];\n";
  }
  for (const auto* a : arcs) {
    if (!shown(a->from) || !shown(a->to)) continue;
    const std::string from = detail::node_name(a->from), to = detail::node_name(a->to);
    const std::string force = std::string(to_string(a->force_label));
    auto it = attached.find(a->ref());
    if (it == attached.end()) {
      os << "  " << from << " -> " << to << " [label=\"" << force << "\"];\n";
      continue;
    }
    const std::string mid = "a" + std::to_string(a->from) + "_" + std::to_string(a->to);
    os << "  " << mid << " [shape=point, label=\"\"];\n";
    os << "  " << from << " -> " << mid << " [arrowhead=none, label=\"" << force << "\"];\n";
    os << "  " << mid << " -> " << to << ";\n";
    for (NodeId anc : it->second) os << "  " << detail::node_name(anc) << " -> " << mid << " [style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace wigmore
