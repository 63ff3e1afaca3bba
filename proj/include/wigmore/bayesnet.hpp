#pragma once

// Discrete Bayesian networks with exact inference.
//
// CPT rows are laid out in mixed-radix order over the parents' states, the
// last parent varying fastest. Probabilities are kept in linear space.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wigmore/error.hpp"

namespace wigmore {

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kMaxStateSpace = 4194304.0;  // 2^22

struct Variable {
  std::string name;
  std::vector<std::string> states{"true", "false"};
};

struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::vector<std::vector<double>> table;  // table[parent row][child state]
};

// Observed state per variable name.
using EvidenceAssignment = std::map<std::string, std::string>;

class BayesNet {
 public:
  BayesNet() = default;

  BayesNet(std::vector<Variable> variables, std::vector<Cpt> cpts) : vars_(std::move(variables)) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      const auto& v = vars_[i];
      if (v.name.empty() || v.name.find_first_of(" \t\n,=") != std::string::npos)
        throw ModelError("invalid variable name '" + v.name + "'");
      if (!index_.emplace(v.name, i).second) throw ModelError("duplicate variable '" + v.name + "'");
      if (v.states.size() < 2) throw ModelError("variable '" + v.name + "' needs at least two states");
      std::set<std::string> uniq(v.states.begin(), v.states.end());
      if (uniq.size() != v.states.size()) throw ModelError("variable '" + v.name + "' has duplicate state labels");
    }

    cpts_.resize(vars_.size());
    parents_.resize(vars_.size());
    std::vector<bool> have(vars_.size(), false);
    for (auto& c : cpts) {
      const std::size_t child = index_of(c.child);
      if (have[child]) throw ModelError("more than one CPT for '" + c.child + "'");
      have[child] = true;
      std::size_t rows = 1;
      for (const auto& p : c.parents) {
        const std::size_t pi = index_of(p);
        if (pi == child) throw ModelError("variable '" + c.child + "' lists itself as a parent");
        if (std::find(parents_[child].begin(), parents_[child].end(), pi) != parents_[child].end())
          throw ModelError("CPT for '" + c.child + "' repeats parent '" + p + "'");
        parents_[child].push_back(pi);
        rows *= vars_[pi].states.size();
      }
      if (c.table.size() != rows)
        throw ModelError("CPT for '" + c.child + "' has " + std::to_string(c.table.size()) + " rows, expected " +
                         std::to_string(rows));
      for (std::size_t r = 0; r < rows; ++r) {
        auto& row = c.table[r];
        if (row.size() != vars_[child].states.size())
          throw ModelError("CPT for '" + c.child + "' row " + std::to_string(r) + " has wrong width");
        double sum = 0.0;
        for (double p : row) {
          if (!(p >= 0.0 && p <= 1.0))
            throw ModelError("CPT for '" + c.child + "' row " + std::to_string(r) + " has a value outside [0,1]");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
          throw ModelError("CPT for '" + c.child + "' row " + std::to_string(r) + " sums to " + std::to_string(sum));
        for (double& p : row) p /= sum;
      }
      cpts_[child] = std::move(c);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (!have[i]) throw ModelError("no CPT for '" + vars_[i].name + "'");

    strides_.resize(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      auto& s = strides_[i];
      s.assign(parents_[i].size(), 1);
      for (std::size_t k = parents_[i].size(); k-- > 1;) s[k - 1] = s[k] * vars_[parents_[i][k]].states.size();
    }

    // Kahn's algorithm, ties broken by declaration order.
    std::vector<std::size_t> indegree(vars_.size(), 0);
    std::vector<std::vector<std::size_t>> children(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i)
      for (std::size_t p : parents_[i]) {
        ++indegree[i];
        children[p].push_back(i);
      }
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (indegree[i] == 0) ready.insert(i);
    while (!ready.empty()) {
      const std::size_t n = *ready.begin();
      ready.erase(ready.begin());
      topo_.push_back(n);
      for (std::size_t c : children[n])
        if (--indegree[c] == 0) ready.insert(c);
    }
    if (topo_.size() != vars_.size()) throw ModelError("parent graph contains a cycle");
  }

  std::size_t size() const { return vars_.size(); }
  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& variable(std::size_t i) const { return vars_.at(i); }
  const Cpt& cpt(std::size_t i) const { return cpts_.at(i); }
  std::span<const std::size_t> parents(std::size_t i) const { return parents_.at(i); }
  std::span<const std::size_t> topological_order() const { return topo_; }
  std::size_t cardinality(std::size_t i) const { return vars_[i].states.size(); }

  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }

  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ModelError("unknown variable '" + std::string(name) + "'");
    return it->second;
  }

  std::size_t state_index(std::size_t var, std::string_view state) const {
    const auto& st = vars_.at(var).states;
    auto it = std::find(st.begin(), st.end(), state);
    if (it == st.end())
      throw ModelError("variable '" + vars_[var].name + "' has no state '" + std::string(state) + "'");
    return static_cast<std::size_t>(it - st.begin());
  }

  double state_space_size() const {
    double s = 1.0;
    for (const auto& v : vars_) s *= static_cast<double>(v.states.size());
    return s;
  }

  // Row of var's CPT selected by the parents' states in a full assignment.
  std::size_t row_index(std::size_t var, std::span<const std::size_t> assignment) const {
    std::size_t r = 0;
    for (std::size_t k = 0; k < parents_[var].size(); ++k) r += assignment[parents_[var][k]] * strides_[var][k];
    return r;
  }

  double conditional(std::size_t var, std::span<const std::size_t> assignment) const {
    return cpts_[var].table[row_index(var, assignment)][assignment[var]];
  }

  std::vector<std::optional<std::size_t>> resolve(const EvidenceAssignment& evidence) const {
    std::vector<std::optional<std::size_t>> out(vars_.size());
    for (const auto& [name, state] : evidence) {
      const std::size_t v = index_of(name);
      out[v] = state_index(v, state);
    }
    return out;
  }

  // Copy of this net with one CPT replaced; the result is fully revalidated.
  BayesNet with_table(std::string_view child, std::vector<std::vector<double>> table) const {
    std::vector<Cpt> cpts = cpts_;
    cpts[index_of(child)].table = std::move(table);
    return BayesNet(vars_, std::move(cpts));
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Cpt> cpts_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> topo_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

inline std::string to_string(const EvidenceAssignment& e) {
  std::string s;
  for (const auto& [k, v] : e) s += (s.empty() ? "" : ",") + k + "=" + v;
  return s.empty() ? "{}" : s;
}

// Parses "var=state[,var=state...]", ignoring blanks around names and states.
// Empty input yields an empty assignment.
inline EvidenceAssignment parse_assignment(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  EvidenceAssignment out;
  if (trim(text).empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = text.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    const std::string_view name = eq == std::string_view::npos ? item : trim(item.substr(0, eq));
    const std::string_view state = eq == std::string_view::npos ? std::string_view{} : trim(item.substr(eq + 1));
    if (eq == std::string_view::npos || name.empty() || state.empty())
      throw ParseError("malformed assignment '" + std::string(item) + "', expected var=state");
    if (!out.emplace(std::string(name), std::string(state)).second)
      throw ParseError("variable '" + std::string(name) + "' assigned twice");
    pos = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force enumeration

struct JointEnumeration {
  double evidence_probability = 0.0;
  std::map<std::string, std::vector<double>> marginals;  // unobserved variables only
};

inline JointEnumeration enumerate_joint(const BayesNet& net, const EvidenceAssignment& evidence) {
  if (net.state_space_size() > kMaxStateSpace)
    throw CapacityError("state space of " + std::to_string(net.state_space_size()) + " exceeds enumeration limit 2^22");
  const auto observed = net.resolve(evidence);
  const std::size_t n = net.size();

  std::vector<std::size_t> free_vars;
  std::vector<std::size_t> a(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (observed[i])
      a[i] = *observed[i];
    else
      free_vars.push_back(i);
  }

  std::vector<std::vector<double>> acc(n);
  for (std::size_t v : free_vars) acc[v].assign(net.cardinality(v), 0.0);

  double z = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < n && p != 0.0; ++i) p *= net.conditional(i, a);
    z += p;
    for (std::size_t v : free_vars) acc[v][a[v]] += p;

    std::size_t k = free_vars.size();
    while (k > 0) {
      const std::size_t v = free_vars[k - 1];
      if (++a[v] < net.cardinality(v)) break;
      a[v] = 0;
      --k;
    }
    if (k == 0) break;
  }

  if (z == 0.0) throw ImpossibleEvidenceError("evidence " + to_string(evidence) + " has probability zero");
  JointEnumeration out;
  out.evidence_probability = z;
  for (std::size_t v : free_vars) {
    for (double& x : acc[v]) x /= z;
    out.marginals.emplace(net.variable(v).name, std::move(acc[v]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variable elimination

namespace detail {

struct Factor {
  std::vector<std::size_t> vars;  // ascending variable indices
  std::vector<std::size_t> cards;
  std::vector<double> values;     // row-major, last variable fastest
};

inline std::vector<std::size_t> strides_of(const Factor& f) {
  std::vector<std::size_t> s(f.vars.size(), 1);
  for (std::size_t k = f.vars.size(); k-- > 1;) s[k - 1] = s[k] * f.cards[k];
  return s;
}

// Stride of each `target` variable inside `f` (0 when absent).
inline std::vector<std::size_t> embedded_strides(const Factor& f, const std::vector<std::size_t>& target) {
  const auto own = strides_of(f);
  std::vector<std::size_t> s(target.size(), 0);
  for (std::size_t t = 0; t < target.size(); ++t) {
    auto it = std::find(f.vars.begin(), f.vars.end(), target[t]);
    if (it != f.vars.end()) s[t] = own[static_cast<std::size_t>(it - f.vars.begin())];
  }
  return s;
}

inline Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(out.vars));
  std::size_t total = 1;
  for (std::size_t v : out.vars) {
    auto ia = std::find(a.vars.begin(), a.vars.end(), v);
    const std::size_t c = ia != a.vars.end() ? a.cards[static_cast<std::size_t>(ia - a.vars.begin())]
                                             : b.cards[static_cast<std::size_t>(
                                                   std::find(b.vars.begin(), b.vars.end(), v) - b.vars.begin())];
    out.cards.push_back(c);
    total *= c;
  }
  const auto sa = embedded_strides(a, out.vars), sb = embedded_strides(b, out.vars);
  out.values.resize(total);
  std::vector<std::size_t> idx(out.vars.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < total; ++i) {
    out.values[i] = a.values[ia] * b.values[ib];
    for (std::size_t k = out.vars.size(); k-- > 0;) {
      if (++idx[k] < out.cards[k]) {
        ia += sa[k];
        ib += sb[k];
        break;
      }
      ia -= sa[k] * (out.cards[k] - 1);
      ib -= sb[k] * (out.cards[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

inline Factor sum_out(const Factor& f, std::size_t var) {
  Factor out;
  for (std::size_t k = 0; k < f.vars.size(); ++k)
    if (f.vars[k] != var) {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
    }
  std::size_t total = 1;
  for (std::size_t c : out.cards) total *= c;
  out.values.assign(total, 0.0);
  const auto so = embedded_strides(out, f.vars);
  std::vector<std::size_t> idx(f.vars.size(), 0);
  std::size_t io = 0;
  for (double x : f.values) {
    out.values[io] += x;
    for (std::size_t k = f.vars.size(); k-- > 0;) {
      if (++idx[k] < f.cards[k]) {
        io += so[k];
        break;
      }
      io -= so[k] * (f.cards[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

// CPT of `var` with observed variables fixed to their states.
inline Factor cpt_factor(const BayesNet& net, std::size_t var, const std::vector<std::optional<std::size_t>>& observed) {
  std::vector<std::size_t> scope(net.parents(var).begin(), net.parents(var).end());
  scope.push_back(var);
  std::sort(scope.begin(), scope.end());
  Factor f;
  for (std::size_t v : scope)
    if (!observed[v]) {
      f.vars.push_back(v);
      f.cards.push_back(net.cardinality(v));
    }
  std::size_t total = 1;
  for (std::size_t c : f.cards) total *= c;
  f.values.resize(total);

  std::vector<std::size_t> a(net.size(), 0);
  for (std::size_t v : scope)
    if (observed[v]) a[v] = *observed[v];
  std::vector<std::size_t> idx(f.vars.size(), 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < f.vars.size(); ++k) a[f.vars[k]] = idx[k];
    f.values[i] = net.conditional(var, a);
    for (std::size_t k = f.vars.size(); k-- > 0;) {
      if (++idx[k] < f.cards[k]) break;
      idx[k] = 0;
    }
  }
  return f;
}

// Greedy min-degree order over the interaction graph of the reduced factors;
// ties go to the lexicographically smallest variable name.
inline std::vector<std::size_t> min_degree_order(const BayesNet& net, const std::vector<Factor>& factors,
                                                 const std::set<std::size_t>& to_eliminate) {
  std::map<std::size_t, std::set<std::size_t>> adj;
  for (const auto& f : factors)
    for (std::size_t a : f.vars) {
      adj[a];
      for (std::size_t b : f.vars)
        if (a != b) adj[a].insert(b);
    }
  std::set<std::size_t> remaining = to_eliminate;
  std::vector<std::size_t> order;
  while (!remaining.empty()) {
    std::size_t best = *remaining.begin();
    for (std::size_t v : remaining) {
      const std::size_t dv = adj[v].size(), db = adj[best].size();
      if (dv < db || (dv == db && net.variable(v).name < net.variable(best).name)) best = v;
    }
    const auto nbrs = adj[best];
    for (std::size_t a : nbrs) {
      adj[a].erase(best);
      for (std::size_t b : nbrs)
        if (a != b) adj[a].insert(b);
    }
    adj.erase(best);
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

struct Elimination {
  std::vector<Factor> factors;
  std::vector<std::size_t> order;
};

inline Elimination prepare(const BayesNet& net, const std::vector<std::optional<std::size_t>>& observed,
                           std::optional<std::size_t> keep) {
  Elimination e;
  std::set<std::size_t> to_eliminate;
  for (std::size_t v = 0; v < net.size(); ++v) {
    e.factors.push_back(cpt_factor(net, v, observed));
    if (!observed[v] && v != keep) to_eliminate.insert(v);
  }
  e.order = min_degree_order(net, e.factors, to_eliminate);
  return e;
}

// Sum-product over everything except `keep`; returns the unnormalized factor.
inline Factor sum_product(const BayesNet& net, const std::vector<std::optional<std::size_t>>& observed,
                          std::optional<std::size_t> keep) {
  auto [factors, order] = prepare(net, observed, keep);
  for (std::size_t v : order) {
    std::vector<Factor> rest;
    std::optional<Factor> prod;
    for (auto& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), v))
        prod = prod ? multiply(*prod, f) : std::move(f);
      else
        rest.push_back(std::move(f));
    }
    if (prod) rest.push_back(sum_out(*prod, v));
    factors = std::move(rest);
  }
  Factor result{{}, {}, {1.0}};
  for (const auto& f : factors) result = multiply(result, f);
  return result;
}

}  // namespace detail

inline std::vector<std::string> elimination_order(const BayesNet& net, const EvidenceAssignment& evidence,
                                                  std::optional<std::string> query = std::nullopt) {
  const auto observed = net.resolve(evidence);
  std::optional<std::size_t> keep;
  if (query) keep = net.index_of(*query);
  std::vector<std::string> names;
  for (std::size_t v : detail::prepare(net, observed, keep).order) names.push_back(net.variable(v).name);
  return names;
}

// P(evidence), summing every unobserved variable out by elimination.
inline double evidence_probability(const BayesNet& net, const EvidenceAssignment& evidence) {
  const auto f = detail::sum_product(net, net.resolve(evidence), std::nullopt);
  return f.values.front();
}

// Posterior distribution of `query` given `evidence`.
inline std::vector<double> eliminate(const BayesNet& net, const EvidenceAssignment& evidence, const std::string& query) {
  const auto observed = net.resolve(evidence);
  const std::size_t q = net.index_of(query);
  if (observed[q]) {
    if (evidence_probability(net, evidence) == 0.0)
      throw ImpossibleEvidenceError("evidence " + to_string(evidence) + " has probability zero");
    std::vector<double> out(net.cardinality(q), 0.0);
    out[*observed[q]] = 1.0;
    return out;
  }
  auto f = detail::sum_product(net, observed, q);
  const double z = std::accumulate(f.values.begin(), f.values.end(), 0.0);
  if (z == 0.0) throw ImpossibleEvidenceError("evidence " + to_string(evidence) + " has probability zero");
  for (double& x : f.values) x /= z;
  return f.values;
}

// ---------------------------------------------------------------------------
// Model file

inline BayesNet parse_model(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("model file: top level must be an object");
  auto vit = doc.find("variables"), cit = doc.find("cpts");
  if (vit == doc.end() || !vit->is_array()) throw ParseError("model file: 'variables' must be an array");
  if (cit == doc.end() || !cit->is_array()) throw ParseError("model file: 'cpts' must be an array");

  std::vector<Variable> vars;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vit->size(); ++i) {
    const auto& j = (*vit)[i];
    const std::string where = "variables[" + std::to_string(i) + "]";
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
      throw ParseError(where + ": needs a string 'name'");
    Variable v;
    v.name = j["name"].get<std::string>();
    if (auto s = j.find("states"); s != j.end()) {
      if (!s->is_array()) throw ParseError(where + ": 'states' must be an array");
      v.states.clear();
      for (const auto& x : *s) {
        if (!x.is_string()) throw ParseError(where + ": state labels must be strings");
        v.states.push_back(x.get<std::string>());
      }
    }
    index[v.name] = vars.size();
    vars.push_back(std::move(v));
  }

  std::vector<Cpt> cpts;
  for (std::size_t i = 0; i < cit->size(); ++i) {
    const auto& j = (*cit)[i];
    const std::string where = "cpts[" + std::to_string(i) + "]";
    if (!j.is_object() || !j.contains("child") || !j["child"].is_string())
      throw ParseError(where + ": needs a string 'child'");
    Cpt c;
    c.child = j["child"].get<std::string>();
    auto child_it = index.find(c.child);
    if (child_it == index.end()) throw ParseError(where + ": unknown child '" + c.child + "'");
    if (auto p = j.find("parents"); p != j.end()) {
      if (!p->is_array()) throw ParseError(where + ": 'parents' must be an array");
      for (const auto& x : *p) {
        if (!x.is_string() || !index.count(x.get<std::string>()))
          throw ParseError(where + ": unknown parent " + x.dump());
        c.parents.push_back(x.get<std::string>());
      }
    }
    std::vector<std::size_t> cards;
    std::size_t rows = 1;
    for (const auto& p : c.parents) {
      cards.push_back(vars[index[p]].states.size());
      rows *= cards.back();
    }
    c.table.resize(rows);
    std::vector<bool> seen(rows, false);
    const auto& rj = j.find("rows");
    if (rj == j.end() || !rj->is_array()) throw ParseError(where + ": 'rows' must be an array");
    for (const auto& row : *rj) {
      if (!row.is_object() || !row.contains("p") || !row["p"].is_array())
        throw ParseError(where + ": each row needs 'given' and 'p'");
      const auto given = row.value("given", nlohmann::json::array());
      if (!given.is_array() || given.size() != c.parents.size())
        throw ParseError(where + ": row 'given' must list one state per parent");
      std::size_t r = 0;
      for (std::size_t k = 0; k < c.parents.size(); ++k) {
        const auto& states = vars[index[c.parents[k]]].states;
        if (!given[k].is_string()) throw ParseError(where + ": parent states must be strings");
        auto it = std::find(states.begin(), states.end(), given[k].get<std::string>());
        if (it == states.end())
          throw ParseError(where + ": parent '" + c.parents[k] + "' has no state " + given[k].dump());
        r = r * cards[k] + static_cast<std::size_t>(it - states.begin());
      }
      if (seen[r]) throw ParseError(where + ": duplicate row for parent states " + given.dump());
      seen[r] = true;
      for (const auto& x : row["p"]) {
        if (!x.is_number()) throw ParseError(where + ": probabilities must be numbers");
        c.table[r].push_back(x.get<double>());
      }
    }
    for (std::size_t r = 0; r < rows; ++r)
      if (!seen[r]) throw ParseError(where + ": CPT for '" + c.child + "' does not cover every parent combination");
    cpts.push_back(std::move(c));
  }
  try {
    return BayesNet(std::move(vars), std::move(cpts));
  } catch (const ModelError& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

inline nlohmann::json to_json(const BayesNet& net) {
  nlohmann::json doc;
  auto& vars = doc["variables"] = nlohmann::json::array();
  auto& cpts = doc["cpts"] = nlohmann::json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& v = net.variable(i);
    vars.push_back({{"name", v.name}, {"states", v.states}});
    const auto& c = net.cpt(i);
    nlohmann::json rows = nlohmann::json::array();
    const auto parents = net.parents(i);
    for (std::size_t r = 0; r < c.table.size(); ++r) {
      std::vector<std::string> given(parents.size());
      std::size_t rem = r;
      for (std::size_t k = parents.size(); k-- > 0;) {
        const std::size_t card = net.cardinality(parents[k]);
        given[k] = net.variable(parents[k]).states[rem % card];
        rem /= card;
      }
      rows.push_back({{"given", given}, {"p", c.table[r]}});
    }
    cpts.push_back({{"child", c.child}, {"parents", c.parents}, {"rows", rows}});
  }
  return doc;
}

}  // namespace wigmore
