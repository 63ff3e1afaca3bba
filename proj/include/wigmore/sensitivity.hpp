#pragma once

// Parameter sweeps over likelihood and credibility ingredients, and
// side-by-side comparison of named scenarios.

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wigmore/bayesnet.hpp"
#include "wigmore/compile.hpp"
#include "wigmore/error.hpp"
#include "wigmore/format.hpp"
#include "wigmore/lr.hpp"

namespace wigmore {

inline constexpr std::size_t kMaxSweepRows = 1000000;
inline constexpr std::size_t kMaxSweptDimensions = 3;

enum class SweepTarget { lr_single, lr_second_given_first, posterior };
enum class OutputQuantity { lr, posterior, both };

inline constexpr std::string_view to_string(SweepTarget t) {
  switch (t) {
    case SweepTarget::lr_single: return "lr_single";
    case SweepTarget::lr_second_given_first: return "lr_second_given_first";
    case SweepTarget::posterior: return "posterior";
  }
  return "?";
}

inline constexpr std::string_view to_string(OutputQuantity q) {
  switch (q) {
    case OutputQuantity::lr: return "lr";
    case OutputQuantity::posterior: return "posterior";
    case OutputQuantity::both: return "both";
  }
  return "?";
}

inline SweepTarget parse_sweep_target(std::string_view s) {
  for (auto t : {SweepTarget::lr_single, SweepTarget::lr_second_given_first, SweepTarget::posterior})
    if (to_string(t) == s) return t;
  throw ParseError("unknown sweep target '" + std::string(s) + "'");
}

inline OutputQuantity parse_output_quantity(std::string_view s) {
  for (auto q : {OutputQuantity::lr, OutputQuantity::posterior, OutputQuantity::both})
    if (to_string(q) == s) return q;
  throw ParseError("unknown output quantity '" + std::string(s) + "'");
}

// Grid values are rounded to 12 significant digits so that accumulated
// step error never leaks into row labels.
inline std::vector<double> grid_range(double start, double stop, double step) {
  if (!(step > 0.0) || !(start <= stop)) throw SpecError("grid needs start <= stop and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (n > kMaxSweepRows) throw SpecError("grid has too many points");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = round_significant(start + static_cast<double>(i) * step);
  return v;
}

// 0.01, 0.02, ..., 0.99
inline std::vector<double> default_grid() { return grid_range(0.01, 0.99, 0.01); }

struct SweptParameter {
  std::string name;
  std::vector<double> values;
};

// Model-backed target: P(H | evidence, given) and the ratio for `evidence`.
struct ModelQuery {
  BayesNet net;
  Hypothesis hypothesis;
  EvidenceAssignment evidence;
  EvidenceAssignment given;
};

struct SweepSpec {
  SweepTarget target = SweepTarget::lr_single;
  std::map<std::string, double> fixed;
  std::vector<SweptParameter> swept;
  OutputQuantity output = OutputQuantity::lr;
  std::optional<ModelQuery> model;
};

struct PointResult {
  std::optional<LikelihoodRatio> lr;
  std::optional<double> posterior;
  bool undefined = false;
  std::string note;
};

struct SweepRow {
  std::vector<double> parameters;
  PointResult result;
};

struct GradientLocation {
  std::size_t from_row = 0;
  std::size_t to_row = 0;
  std::size_t dimension = 0;
  double value = 0.0;
};

struct SweepSummary {
  OutputQuantity quantity = OutputQuantity::lr;  // lr or posterior
  std::optional<double> min, max;
  std::optional<std::size_t> argmin_row, argmax_row;
  std::optional<GradientLocation> max_gradient;
  std::size_t infinite_count = 0;
  std::size_t undefined_count = 0;
};

struct SweepResult {
  std::vector<std::string> parameter_names;
  std::vector<std::size_t> grid_sizes;
  OutputQuantity output = OutputQuantity::lr;
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

// ---------------------------------------------------------------------------
// Parameter names

namespace detail {

inline const std::vector<std::string>& single_parameter_names() {
  static const std::vector<std::string> names{"p_e_given_h", "p_e_given_not_h", "h_p", "f_p"};
  return names;
}

inline const std::vector<std::string>& second_parameter_names() {
  static const std::vector<std::string> names{"p_e_given_h", "p_e_given_not_h", "h_p",  "f_p",
                                              "p_f_given_e", "p_f_given_not_e", "h_w", "f_w"};
  return names;
}

// A model parameter "child" or "child|parent=state,..." denotes
// P(child = first state | parents) in a binary child's CPT.
struct CptEntryRef {
  std::size_t variable = 0;
  std::size_t row = 0;
};

inline CptEntryRef resolve_cpt_entry(const BayesNet& net, const std::string& name) {
  const auto bar = name.find('|');
  const std::size_t v = net.index_of(name.substr(0, bar));
  if (net.cardinality(v) != 2) throw SpecError("parameter '" + name + "' refers to a non-binary variable");
  const auto parents = net.parents(v);
  EvidenceAssignment given;
  if (bar != std::string::npos) given = parse_assignment(name.substr(bar + 1));
  if (given.size() != parents.size())
    throw SpecError("parameter '" + name + "' must name a state for every parent of " + net.variable(v).name);
  std::size_t row = 0;
  for (std::size_t p : parents) {
    auto it = given.find(net.variable(p).name);
    if (it == given.end()) throw SpecError("parameter '" + name + "' is missing parent " + net.variable(p).name);
    row = row * net.cardinality(p) + net.state_index(p, it->second);
  }
  return {v, row};
}

inline bool is_known_parameter(const SweepSpec& spec, const std::string& name) {
  if (name == "prior") return spec.target != SweepTarget::posterior;
  switch (spec.target) {
    case SweepTarget::lr_single: {
      const auto& n = single_parameter_names();
      return std::find(n.begin(), n.end(), name) != n.end();
    }
    case SweepTarget::lr_second_given_first: {
      const auto& n = second_parameter_names();
      return std::find(n.begin(), n.end(), name) != n.end();
    }
    case SweepTarget::posterior:
      if (!spec.model) return false;
      try {
        resolve_cpt_entry(spec.model->net, name);
        return true;
      } catch (const Error&) {
        return false;
      }
  }
  return false;
}

inline double odds_update(double prior, const LikelihoodRatio& lr) {
  if (lr.is_infinite()) return prior > 0.0 ? 1.0 : 0.0;
  const double num = prior * lr.value();
  const double den = num + (1.0 - prior);
  return den == 0.0 ? 0.0 : num / den;
}

}  // namespace detail

inline void validate_sweep_spec(const SweepSpec& spec, bool allow_point = false) {
  if (spec.target == SweepTarget::posterior && !spec.model) throw SpecError("posterior target needs a model");
  if (spec.swept.size() > kMaxSweptDimensions || (spec.swept.empty() && !allow_point))
    throw SpecError("a sweep takes 1 to 3 swept parameters, got " + std::to_string(spec.swept.size()));

  std::set<std::string> names;
  double rows = 1.0;
  for (const auto& s : spec.swept) {
    if (!names.insert(s.name).second) throw SpecError("parameter '" + s.name + "' swept twice");
    if (spec.fixed.count(s.name)) throw SpecError("parameter '" + s.name + "' is both fixed and swept");
    if (s.values.empty()) throw SpecError("parameter '" + s.name + "' has an empty grid");
    for (double x : s.values)
      if (!(x >= 0.0 && x <= 1.0)) throw SpecError("grid value " + format_number(x) + " for '" + s.name + "' is outside [0,1]");
    rows *= static_cast<double>(s.values.size());
  }
  if (rows > static_cast<double>(kMaxSweepRows)) throw SpecError("sweep exceeds the 10^6 row limit");
  for (const auto& [name, value] : spec.fixed) {
    names.insert(name);
    if (!(value >= 0.0 && value <= 1.0)) throw SpecError("fixed value for '" + name + "' is outside [0,1]");
  }
  for (const auto& n : names)
    if (!detail::is_known_parameter(spec, n))
      throw SpecError("unknown parameter '" + n + "' for target " + std::string(to_string(spec.target)));

  const std::vector<std::string>* required = nullptr;
  if (spec.target == SweepTarget::lr_single) required = &detail::single_parameter_names();
  if (spec.target == SweepTarget::lr_second_given_first) required = &detail::second_parameter_names();
  if (required)
    for (const auto& r : *required)
      if (!names.count(r)) throw SpecError("parameter '" + r + "' is neither fixed nor swept");
}

// Evaluates one fully merged parameter point. Undefined ratios and
// degenerate conditioning are recorded in the result instead of thrown.
inline PointResult evaluate_point(const SweepSpec& spec, const std::map<std::string, double>& params) {
  auto get = [&](const std::string& k) { return params.at(k); };
  PointResult out;
  const bool want_lr = spec.output != OutputQuantity::posterior;
  const bool want_post = spec.output != OutputQuantity::lr;
  try {
    LikelihoodRatio lr{1.0};
    double posterior = 0.0;
    if (spec.target == SweepTarget::posterior) {
      const auto& m = *spec.model;
      std::map<std::size_t, std::vector<std::vector<double>>> tables;
      for (const auto& [name, value] : params) {
        const auto ref = detail::resolve_cpt_entry(m.net, name);
        auto [it, fresh] = tables.try_emplace(ref.variable, m.net.cpt(ref.variable).table);
        it->second[ref.row] = {value, 1.0 - value};
      }
      BayesNet net = m.net;
      for (auto& [v, table] : tables) net = net.with_table(net.variable(v).name, std::move(table));
      if (want_lr) lr = lr_general(net, m.hypothesis, m.evidence, m.given);
      if (want_post) {
        EvidenceAssignment all = m.given;
        all.insert(m.evidence.begin(), m.evidence.end());
        const auto dist = eliminate(net, all, m.hypothesis.variable);
        posterior = dist[net.state_index(net.index_of(m.hypothesis.variable), m.hypothesis.state)];
      }
    } else {
      SingleTestimonyParams first{get("p_e_given_h"), get("p_e_given_not_h"), {get("h_p"), get("f_p")}};
      if (spec.target == SweepTarget::lr_single) {
        lr = lr_single(first);
      } else {
        lr = lr_second_given_first(
            {first, get("p_f_given_e"), get("p_f_given_not_e"), {get("h_w"), get("f_w")}});
      }
      auto it = params.find("prior");
      posterior = detail::odds_update(it == params.end() ? kDefaultPrior : it->second, lr);
    }
    if (want_lr) out.lr = lr;
    if (want_post) out.posterior = posterior;
  } catch (const UndefinedForceError& e) {
    out.undefined = true;
    out.note = e.what();
  } catch (const ConditioningError& e) {
    out.undefined = true;
    out.note = e.what();
  } catch (const ImpossibleEvidenceError& e) {
    out.undefined = true;
    out.note = e.what();
  }
  return out;
}

namespace detail {

inline std::optional<double> summary_value(const PointResult& r, OutputQuantity q) {
  if (r.undefined) return std::nullopt;
  if (q == OutputQuantity::lr) {
    if (!r.lr || r.lr->is_infinite()) return std::nullopt;
    return r.lr->value();
  }
  return r.posterior;
}

}  // namespace detail

// Recomputes the summary from rows alone. Row order is lexicographic over
// grid indices, first parameter slowest.
inline SweepSummary summarize(const std::vector<SweepRow>& rows, const std::vector<std::size_t>& grid_sizes,
                              OutputQuantity output) {
  SweepSummary s;
  s.quantity = output == OutputQuantity::posterior ? OutputQuantity::posterior : OutputQuantity::lr;
  std::vector<std::optional<double>> q(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].result;
    if (r.undefined) ++s.undefined_count;
    if (r.lr && r.lr->is_infinite()) ++s.infinite_count;
    q[i] = detail::summary_value(r, s.quantity);
    if (!q[i]) continue;
    if (!s.min || *q[i] < *s.min) {
      s.min = q[i];
      s.argmin_row = i;
    }
    if (!s.max || *q[i] > *s.max) {
      s.max = q[i];
      s.argmax_row = i;
    }
  }

  std::vector<std::size_t> strides(grid_sizes.size(), 1);
  for (std::size_t k = grid_sizes.size(); k-- > 1;) strides[k - 1] = strides[k] * grid_sizes[k];

  // Ties resolve to the pair whose endpoints come first in parameter-value
  // order, so the location does not depend on traversal direction.
  auto key = [&](std::size_t a, std::size_t b) {
    const auto& pa = rows[a].parameters;
    const auto& pb = rows[b].parameters;
    return pa < pb ? std::make_pair(pa, pb) : std::make_pair(pb, pa);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!q[i]) continue;
    for (std::size_t d = 0; d < grid_sizes.size(); ++d) {
      if ((i / strides[d]) % grid_sizes[d] + 1 >= grid_sizes[d]) continue;
      const std::size_t j = i + strides[d];
      if (!q[j]) continue;
      const double dx = std::abs(rows[j].parameters[d] - rows[i].parameters[d]);
      if (dx == 0.0) continue;
      const double g = std::abs(*q[j] - *q[i]) / dx;
      if (!s.max_gradient || g > s.max_gradient->value ||
          (g == s.max_gradient->value && key(i, j) < key(s.max_gradient->from_row, s.max_gradient->to_row)))
        s.max_gradient = GradientLocation{i, j, d, g};
    }
  }
  return s;
}

inline SweepResult run_sweep(const SweepSpec& spec) {
  validate_sweep_spec(spec);
  SweepResult out;
  out.output = spec.output;
  std::size_t total = 1;
  for (const auto& s : spec.swept) {
    out.parameter_names.push_back(s.name);
    out.grid_sizes.push_back(s.values.size());
    total *= s.values.size();
  }
  out.rows.resize(total);

  auto evaluate_range = [&](std::size_t begin, std::size_t end) {
    std::map<std::string, double> params = spec.fixed;
    for (std::size_t i = begin; i < end; ++i) {
      auto& row = out.rows[i];
      row.parameters.resize(spec.swept.size());
      std::size_t rem = i;
      for (std::size_t d = spec.swept.size(); d-- > 0;) {
        const auto& s = spec.swept[d];
        row.parameters[d] = s.values[rem % s.values.size()];
        rem /= s.values.size();
        params[s.name] = row.parameters[d];
      }
      row.result = evaluate_point(spec, params);
    }
  };

  const std::size_t workers =
      total < 2048 ? 1 : std::min<std::size_t>(std::max(1U, std::thread::hardware_concurrency()), 16);
  if (workers == 1) {
    evaluate_range(0, total);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          evaluate_range(w * chunk, std::min(total, (w + 1) * chunk));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  out.summary = summarize(out.rows, out.grid_sizes, out.output);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::vector<std::string> quantity_columns(OutputQuantity q) {
  if (q == OutputQuantity::lr) return {"lr"};
  if (q == OutputQuantity::posterior) return {"posterior"};
  return {"lr", "posterior"};
}

inline std::vector<std::string> quantity_cells(const PointResult& r, OutputQuantity q) {
  std::vector<std::string> out;
  if (q != OutputQuantity::posterior) out.push_back(r.undefined || !r.lr ? "undefined" : r.lr->str());
  if (q != OutputQuantity::lr) out.push_back(r.undefined || !r.posterior ? "undefined" : format_number(*r.posterior));
  return out;
}

inline nlohmann::json number_or_marker(const std::string& cell) {
  if (cell == "inf" || cell == "undefined") return cell;
  return std::strtod(cell.c_str(), nullptr);
}

}  // namespace detail

inline std::string to_csv(const SweepResult& r) {
  std::ostringstream os;
  std::string header;
  for (const auto& n : r.parameter_names) header += (header.empty() ? "" : ",") + n;
  for (const auto& c : detail::quantity_columns(r.output)) header += (header.empty() ? "" : ",") + c;
  os << header << '\n';
  for (const auto& row : r.rows) {
    std::string line;
    for (double x : row.parameters) line += (line.empty() ? "" : ",") + format_number(x);
    for (const auto& c : detail::quantity_cells(row.result, r.output)) line += (line.empty() ? "" : ",") + c;
    os << line << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const SweepSummary& s, const SweepResult& r) {
  auto point = [&](std::size_t row) {
    nlohmann::json p = nlohmann::json::object();
    for (std::size_t d = 0; d < r.parameter_names.size(); ++d)
      p[r.parameter_names[d]] = round_significant(r.rows[row].parameters[d]);
    return p;
  };
  nlohmann::json j{{"quantity", to_string(s.quantity)},
                   {"infinite_count", s.infinite_count},
                   {"undefined_count", s.undefined_count}};
  j["min"] = s.min ? nlohmann::json(round_significant(*s.min)) : nlohmann::json();
  j["max"] = s.max ? nlohmann::json(round_significant(*s.max)) : nlohmann::json();
  j["argmin"] = s.argmin_row ? point(*s.argmin_row) : nlohmann::json();
  j["argmax"] = s.argmax_row ? point(*s.argmax_row) : nlohmann::json();
  if (s.max_gradient)
    j["max_gradient"] = {{"value", round_significant(s.max_gradient->value)},
                         {"dimension", r.parameter_names[s.max_gradient->dimension]},
                         {"from", point(s.max_gradient->from_row)},
                         {"to", point(s.max_gradient->to_row)}};
  else
    j["max_gradient"] = nullptr;
  return j;
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json j;
  nlohmann::json columns = r.parameter_names;
  for (const auto& c : detail::quantity_columns(r.output)) columns.push_back(c);
  j["columns"] = columns;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json line = nlohmann::json::array();
    for (double x : row.parameters) line.push_back(round_significant(x));
    for (const auto& c : detail::quantity_cells(row.result, r.output)) line.push_back(detail::number_or_marker(c));
    rows.push_back(std::move(line));
  }
  j["summary"] = to_json(r.summary, r);
  return j;
}

// ---------------------------------------------------------------------------
// Story tables

struct Scenario {
  std::string name;
  SweepSpec spec;
};

struct StoryTable {
  std::vector<std::string> columns;                 // scenario names
  std::vector<std::string> row_labels;              // parameters, then quantities
  std::vector<std::vector<std::string>> cells;      // cells[row][column]
};

// Each scenario must describe a single parameter point.
inline StoryTable story_table(const std::vector<Scenario>& scenarios) {
  if (scenarios.empty()) throw SpecError("story table needs at least one scenario");
  const OutputQuantity q = scenarios.front().spec.output;
  std::set<std::string> param_names;
  std::vector<std::pair<std::map<std::string, double>, PointResult>> points;
  for (const auto& s : scenarios) {
    if (s.spec.output != q) throw SpecError("scenario '" + s.name + "' reports a different output quantity");
    validate_sweep_spec(s.spec, /*allow_point=*/true);
    std::map<std::string, double> params = s.spec.fixed;
    for (const auto& sw : s.spec.swept) {
      if (sw.values.size() != 1) throw SpecError("scenario '" + s.name + "' must be a single grid point");
      params[sw.name] = sw.values.front();
    }
    PointResult r;
    if (s.spec.swept.empty())
      r = evaluate_point(s.spec, params);
    else
      r = run_sweep(s.spec).rows.front().result;
    for (const auto& [k, _] : params) param_names.insert(k);
    points.emplace_back(std::move(params), std::move(r));
  }

  StoryTable t;
  for (const auto& s : scenarios) t.columns.push_back(s.name);
  for (const auto& n : param_names) {
    t.row_labels.push_back(n);
    auto& row = t.cells.emplace_back();
    for (const auto& [params, _] : points) {
      auto it = params.find(n);
      row.push_back(it == params.end() ? "-" : format_number(it->second));
    }
  }
  const auto qcols = detail::quantity_columns(q);
  for (std::size_t k = 0; k < qcols.size(); ++k) {
    t.row_labels.push_back(qcols[k]);
    auto& row = t.cells.emplace_back();
    for (const auto& [_, r] : points) row.push_back(detail::quantity_cells(r, q)[k]);
  }
  return t;
}

inline std::string render(const StoryTable& t) {
  std::size_t label_w = 0;
  for (const auto& l : t.row_labels) label_w = std::max(label_w, l.size());
  std::vector<std::size_t> w(t.columns.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    w[c] = t.columns[c].size();
    for (const auto& row : t.cells) w[c] = std::max(w[c], row[c].size());
  }
  auto pad = [](const std::string& s, std::size_t n) { return s + std::string(n - s.size(), ' '); };
  std::ostringstream os;
  std::string line = pad("", label_w);
  for (std::size_t c = 0; c < t.columns.size(); ++c) line += "  " + pad(t.columns[c], w[c]);
  while (!line.empty() && line.back() == ' ') line.pop_back();
  os << line << '\n';
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    line = pad(t.row_labels[r], label_w);
    for (std::size_t c = 0; c < t.columns.size(); ++c) line += "  " + pad(t.cells[r][c], w[c]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Spec files

namespace detail {

inline EvidenceAssignment parse_assignment_json(const nlohmann::json& j, std::string_view where) {
  if (j.is_string()) return parse_assignment(j.get<std::string>());
  if (j.is_object()) {
    EvidenceAssignment out;
    for (const auto& [k, v] : j.items()) {
      if (!v.is_string()) throw ParseError(std::string(where) + ": states must be strings");
      out[k] = v.get<std::string>();
    }
    return out;
  }
  throw ParseError(std::string(where) + ": expected \"var=state,...\" or an object");
}

inline std::map<std::string, double> parse_fixed(const nlohmann::json& j, std::string_view where) {
  std::map<std::string, double> out;
  if (!j.is_object()) throw ParseError(std::string(where) + ": 'fixed' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ParseError(std::string(where) + ": fixed value for '" + k + "' must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

inline std::vector<SweptParameter> parse_swept(const nlohmann::json& j, std::string_view where) {
  if (!j.is_array()) throw ParseError(std::string(where) + ": 'swept' must be an array");
  std::vector<SweptParameter> out;
  for (const auto& s : j) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string())
      throw ParseError(std::string(where) + ": each swept entry needs a string 'name'");
    SweptParameter p{s["name"].get<std::string>(), {}};
    if (s.contains("values")) {
      if (!s["values"].is_array()) throw ParseError(std::string(where) + ": 'values' must be an array");
      for (const auto& x : s["values"]) {
        if (!x.is_number()) throw ParseError(std::string(where) + ": grid values must be numbers");
        p.values.push_back(x.get<double>());
      }
    } else if (s.contains("start") || s.contains("stop") || s.contains("step")) {
      for (const char* k : {"start", "stop", "step"})
        if (!s.contains(k) || !s[k].is_number())
          throw ParseError(std::string(where) + ": range grid for '" + p.name + "' needs numeric start, stop, step");
      p.values = grid_range(s["start"].get<double>(), s["stop"].get<double>(), s["step"].get<double>());
    } else {
      p.values = default_grid();
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Target, output and model settings shared by sweep and story documents.
inline SweepSpec parse_sweep_header(const nlohmann::json& doc, const std::filesystem::path& base) {
  SweepSpec spec;
  if (!doc.is_object()) throw ParseError("sweep spec: top level must be an object");
  spec.target = parse_sweep_target(require_string(doc, "target", "sweep spec"));
  if (doc.contains("output")) spec.output = parse_output_quantity(require_string(doc, "output", "sweep spec"));
  if (doc.contains("fixed")) spec.fixed = parse_fixed(doc["fixed"], "sweep spec");
  if (spec.target == SweepTarget::posterior) {
    ModelQuery m;
    if (doc.contains("model")) {
      m.net = parse_model(read_json_file((base / require_string(doc, "model", "sweep spec")).string()));
    } else if (doc.contains("compile")) {
      m.net = compile_chart(load_compilation_spec((base / require_string(doc, "compile", "sweep spec")).string())).net;
    } else {
      throw ParseError("sweep spec: posterior target needs 'model' or 'compile'");
    }
    m.hypothesis = parse_hypothesis(require_string(doc, "hypothesis", "sweep spec"));
    if (doc.contains("evidence")) m.evidence = parse_assignment_json(doc["evidence"], "sweep spec evidence");
    if (doc.contains("given")) m.given = parse_assignment_json(doc["given"], "sweep spec given");
    spec.model = std::move(m);
  }
  return spec;
}

}  // namespace detail

// Relative model paths resolve against `base`.
inline SweepSpec parse_sweep_spec(const nlohmann::json& doc, const std::filesystem::path& base = {}) {
  SweepSpec spec = detail::parse_sweep_header(doc, base);
  spec.swept = detail::parse_swept(detail::require(doc, "swept", "sweep spec"), "sweep spec");
  return spec;
}

inline SweepSpec load_sweep_spec(const std::string& path) {
  try {
    return parse_sweep_spec(detail::read_json_file(path), std::filesystem::path(path).parent_path());
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ParseError(path + ": " + msg);
  }
}

// {"target", "output", "fixed", model keys..., "scenarios": [{"name", "fixed", "swept"}]}
// Scenario "fixed" entries override the shared ones.
inline std::vector<Scenario> parse_story_spec(const nlohmann::json& doc, const std::filesystem::path& base = {}) {
  const SweepSpec shared = detail::parse_sweep_header(doc, base);
  const auto& list = detail::require(doc, "scenarios", "story spec");
  if (!list.is_array()) throw ParseError("story spec: 'scenarios' must be an array");
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& s = list[i];
    const std::string where = "scenarios[" + std::to_string(i) + "]";
    Scenario sc{detail::require_string(s, "name", where), shared};
    if (s.contains("fixed"))
      for (const auto& [k, v] : detail::parse_fixed(s["fixed"], where)) sc.spec.fixed[k] = v;
    if (s.contains("swept")) sc.spec.swept = detail::parse_swept(s["swept"], where);
    for (const auto& sw : sc.spec.swept) sc.spec.fixed.erase(sw.name);
    out.push_back(std::move(sc));
  }
  return out;
}

inline std::vector<Scenario> load_story_spec(const std::string& path) {
  try {
    return parse_story_spec(detail::read_json_file(path), std::filesystem::path(path).parent_path());
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ParseError(path + ": " + msg);
  }
}

}  // namespace wigmore
