#pragma once

// Command-line front end. Every subcommand is a thin adapter over the
// library; run_cli is separate from main so tests can drive it in-process.
//
// Exit codes: 0 success, 1 validation violations or an analytical failure
// (impossible evidence, undefined ratio), 2 parse or usage errors.

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wigmore/bayesnet.hpp"
#include "wigmore/chart.hpp"
#include "wigmore/compile.hpp"
#include "wigmore/error.hpp"
#include "wigmore/format.hpp"
#include "wigmore/lr.hpp"
#include "wigmore/sensitivity.hpp"

namespace wigmore::cli {

enum class Format { text, json, csv };

namespace detail {

struct Options {
  std::string case_path, model_path, spec_path;
  std::string query, hypothesis, evidence, given, item_a, item_b;
  std::string style = "full";
  std::string format = "text";
  bool annotate = false, reports = false, single = false, second = false;
  double p_e_given_h = -1, p_e_given_not_h = -1, h_p = -1, f_p = -1;
  double p_f_given_e = -1, p_f_given_not_e = -1, h_w = -1, f_w = -1;
};

inline Format parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw ParseError("unknown format '" + s + "'");
}

struct LoadedModel {
  BayesNet net;
  std::optional<CompiledNetwork> compiled;
};

inline LoadedModel load_model(const Options& o) {
  if (!o.model_path.empty() && !o.spec_path.empty()) throw ParseError("give either --model or --spec, not both");
  if (!o.model_path.empty()) return {parse_model(wigmore::detail::read_json_file(o.model_path)), std::nullopt};
  if (!o.spec_path.empty()) {
    auto compiled = compile_chart(load_compilation_spec(o.spec_path));
    BayesNet net = compiled.net;
    return {std::move(net), std::move(compiled)};
  }
  throw ParseError("this subcommand needs --model or --spec");
}

inline EvidenceAssignment evidence_of(const Options& o, const LoadedModel& m) {
  EvidenceAssignment e = parse_assignment(o.evidence);
  if (o.reports) {
    if (!m.compiled) throw ParseError("--reports needs --spec");
    for (const auto& [k, v] : m.compiled->observed_reports) e.emplace(k, v);
  }
  return e;
}

inline Hypothesis hypothesis_of(const Options& o, const LoadedModel& m) {
  if (!o.hypothesis.empty()) return parse_hypothesis(o.hypothesis);
  if (!o.query.empty()) return {o.query, m.net.variable(m.net.index_of(o.query)).states.front()};
  if (m.compiled) return {m.compiled->hypothesis, "true"};
  throw ParseError("give --hypothesis var=state");
}

inline void require_path(const std::string& p, const char* flag) {
  if (p.empty()) throw ParseError(std::string("missing required option ") + flag);
}

inline int cmd_validate(const Options& o, std::ostream& out) {
  require_path(o.case_path, "--case");
  const auto report = validate_chart(load_chart(o.case_path));
  out << render(report);
  return report.ok() ? 0 : 1;
}

inline int cmd_keylist(const Options& o, std::ostream& out, std::ostream& err) {
  require_path(o.case_path, "--case");
  const Chart chart = load_chart(o.case_path);
  const auto report = validate_chart(chart);
  if (!report.ok()) {
    err << render(report);
    return 1;
  }
  const auto cls = classify_relevance(chart);
  std::vector<const KeyListEntry*> entries;
  for (const auto& e : chart.key_list) entries.push_back(&e);
  std::stable_sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const auto* e : entries) {
    out << e->id << '\t' << to_string(e->kind);
    if (e->evidence_form) out << '\t' << to_string(*e->evidence_form) << '\t' << to_string(cls.roles.at(e->id));
    else out << "\t-\t-";
    out << '\t' << (e->alias ? *e->alias : "-") << '\t' << e->text << '\n';
  }
  out << "directly relevant: " << cls.direct_count << "\nancillary: " << cls.ancillary_count << '\n';
  return 0;
}

inline int cmd_export(const Options& o, std::ostream& out) {
  require_path(o.case_path, "--case");
  const Chart chart = load_chart(o.case_path);
  out << export_chart(chart, parse_export_style(o.style));
  return 0;
}

inline int cmd_compile(const Options& o, std::ostream& out) {
  require_path(o.spec_path, "--spec");
  const auto spec = load_compilation_spec(o.spec_path);
  const Format f = parse_format(o.format);
  if (o.annotate) {
    const auto r = annotate_from_ancillary(spec);
    if (f == Format::json) {
      auto entries = [](const std::vector<AnnotatedEntry>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& e : v) {
          nlohmann::json j{{"kind", to_string(e.kind)}, {"node", e.node}, {"basis", e.basis}};
          if (e.arc) j["arc"] = {{"from", e.arc->from}, {"to", e.arc->to}};
          a.push_back(std::move(j));
        }
        return a;
      };
      nlohmann::json d = nlohmann::json::array();
      for (const auto& a : r.defaulted) d.push_back({{"from", a.from}, {"to", a.to}});
      out << nlohmann::json{{"supported", entries(r.supported)}, {"unsupported", entries(r.unsupported)}, {"defaulted", d}}.dump(2)
          << '\n';
    } else {
      out << render(r);
    }
    return 0;
  }
  const auto compiled = compile_chart(spec);
  nlohmann::json doc = to_json(compiled.net);
  if (!compiled.defaulted_arcs.empty()) {
    auto& d = doc["defaulted_arcs"] = nlohmann::json::array();
    for (const auto& a : compiled.defaulted_arcs) d.push_back({{"from", a.from}, {"to", a.to}});
  }
  out << doc.dump(2) << '\n';
  return 0;
}

inline int cmd_query(const Options& o, std::ostream& out) {
  if (o.query.empty()) throw ParseError("missing required option --query");
  const auto m = load_model(o);
  EvidenceAssignment e = evidence_of(o, m);
  for (const auto& [k, v] : parse_assignment(o.given))
    if (!e.emplace(k, v).second) throw ParseError("variable '" + k + "' in both --evidence and --given");
  const auto post = eliminate(m.net, e, o.query);
  const double pe = evidence_probability(m.net, e);
  const auto& states = m.net.variable(m.net.index_of(o.query)).states;
  if (parse_format(o.format) == Format::json) {
    nlohmann::json p = nlohmann::json::object();
    for (std::size_t i = 0; i < states.size(); ++i) p[states[i]] = round_significant(post[i]);
    out << nlohmann::json{{"query", o.query}, {"evidence", e}, {"evidence_probability", round_significant(pe)}, {"posterior", p}}.dump(2)
        << '\n';
  } else {
    for (std::size_t i = 0; i < states.size(); ++i)
      out << "P(" << o.query << "=" << states[i] << " | " << to_string(e) << ") = " << format_number(post[i]) << '\n';
    out << "P(" << to_string(e) << ") = " << format_number(pe) << '\n';
  }
  return 0;
}

inline void emit_lr(const LikelihoodReport& r, const Options& o, std::ostream& out) {
  if (parse_format(o.format) == Format::json)
    out << to_json(r).dump(2) << '\n';
  else
    out << "lr = " << r.lr.str() << '\n';
}

inline double need(double v, const char* flag) {
  if (v < 0) throw ParseError(std::string("missing required option ") + flag);
  return v;
}

inline int cmd_lr(const Options& o, std::ostream& out) {
  if (o.single && o.second) throw ParseError("--single and --second are exclusive");
  if (o.single || o.second) {
    SingleTestimonyParams first{need(o.p_e_given_h, "--p-e-given-h"), need(o.p_e_given_not_h, "--p-e-given-not-h"),
                                {need(o.h_p, "--h-p"), need(o.f_p, "--f-p")}};
    LikelihoodReport r;
    try {
      if (o.single)
        r.lr = lr_single(first);
      else
        r.lr = lr_second_given_first({first, need(o.p_f_given_e, "--p-f-given-e"),
                                      need(o.p_f_given_not_e, "--p-f-given-not-e"), {need(o.h_w, "--h-w"), need(o.f_w, "--f-w")}});
    } catch (const ParameterError& e) {
      throw ParseError(e.what());
    }
    emit_lr(r, o, out);
    return 0;
  }
  const auto m = load_model(o);
  LikelihoodReport r;
  r.lr = lr_general(m.net, hypothesis_of(o, m), evidence_of(o, m), parse_assignment(o.given));
  emit_lr(r, o, out);
  return 0;
}

inline int cmd_interaction(const Options& o, std::ostream& out) {
  const auto m = load_model(o);
  if (o.item_a.empty() || o.item_b.empty()) throw ParseError("interaction needs --a and --b");
  const auto d = diagnose_interaction(m.net, hypothesis_of(o, m), parse_assignment(o.item_a), parse_assignment(o.item_b));
  if (parse_format(o.format) == Format::json) {
    nlohmann::json j = to_json(d);
    j["report"] = to_json(make_report(d));
    out << j.dump(2) << '\n';
  } else {
    out << "joint_lr = " << d.joint.str() << '\n'
        << "lr_a = " << d.lr_a.str() << '\n'
        << "lr_b = " << d.lr_b.str() << '\n'
        << "lr_b_given_a = " << d.lr_b_given_a.str() << '\n'
        << "lr_a_given_b = " << d.lr_a_given_b.str() << '\n'
        << "product_of_marginals = " << format_number(d.product_of_marginals) << '\n'
        << "classification = " << to_string(d.classification) << '\n';
  }
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out) {
  require_path(o.spec_path, "--spec");
  const auto result = run_sweep(load_sweep_spec(o.spec_path));
  if (parse_format(o.format) == Format::json)
    out << to_json(result).dump(2) << '\n';
  else
    out << to_csv(result);
  return 0;
}

inline int cmd_stories(const Options& o, std::ostream& out) {
  require_path(o.spec_path, "--spec");
  const auto table = story_table(load_story_spec(o.spec_path));
  if (parse_format(o.format) == Format::json) {
    nlohmann::json j{{"columns", table.columns}, {"rows", nlohmann::json::array()}};
    for (std::size_t r = 0; r < table.row_labels.size(); ++r)
      j["rows"].push_back({{"label", table.row_labels[r]}, {"values", table.cells[r]}});
    out << j.dump(2) << '\n';
  } else {
    out << render(table);
  }
  return 0;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::Options o;
  CLI::App app{"Wigmorean inference networks: validation, compilation and likelihood-ratio analysis", "wigmore"};
  app.require_subcommand(1);

  auto add_case = [&](CLI::App* s) { s->add_option("--case", o.case_path, "Case file (JSON)"); };
  auto add_model = [&](CLI::App* s) {
    s->add_option("--model", o.model_path, "Model file (JSON)");
    s->add_option("--spec", o.spec_path, "Compilation spec (JSON)");
  };
  auto add_format = [&](CLI::App* s) { s->add_option("--format", o.format, "text|json|csv"); };

  auto* validate = app.add_subcommand("validate", "Check chart invariants");
  add_case(validate);
  auto* keylist = app.add_subcommand("keylist", "Print the key list with relevance roles");
  add_case(keylist);
  auto* exp = app.add_subcommand("export", "Emit the chart as a dot digraph");
  add_case(exp);
  exp->add_option("--style", o.style, "full|direct_only");

  auto* compile = app.add_subcommand("compile", "Compile a chart into a model file");
  compile->add_option("--spec", o.spec_path, "Compilation spec (JSON)");
  compile->add_flag("--annotate", o.annotate, "Report ancillary provenance instead of the model");
  add_format(compile);

  auto* query = app.add_subcommand("query", "Posterior marginal of one variable");
  add_model(query);
  query->add_option("--query", o.query, "Query variable");
  query->add_option("--evidence", o.evidence, "var=state[,...]");
  query->add_option("--given", o.given, "var=state[,...]");
  query->add_flag("--reports", o.reports, "Observe every compiled report variable");
  add_format(query);

  auto* lr = app.add_subcommand("lr", "Likelihood ratio");
  add_model(lr);
  lr->add_flag("--single", o.single, "Closed form for a single testimony");
  lr->add_flag("--second", o.second, "Closed form for a second testimony given the first");
  lr->add_option("--p-e-given-h", o.p_e_given_h);
  lr->add_option("--p-e-given-not-h", o.p_e_given_not_h);
  lr->add_option("--h-p", o.h_p);
  lr->add_option("--f-p", o.f_p);
  lr->add_option("--p-f-given-e", o.p_f_given_e);
  lr->add_option("--p-f-given-not-e", o.p_f_given_not_e);
  lr->add_option("--h-w", o.h_w);
  lr->add_option("--f-w", o.f_w);
  lr->add_option("--hypothesis", o.hypothesis, "var=state");
  lr->add_option("--query", o.query, "Hypothesis variable (first state)");
  lr->add_option("--evidence", o.evidence, "var=state[,...]");
  lr->add_option("--given", o.given, "var=state[,...]");
  lr->add_flag("--reports", o.reports, "Use every compiled report variable as evidence");
  add_format(lr);

  auto* inter = app.add_subcommand("interaction", "Redundancy/synergism diagnostics for two evidence items");
  add_model(inter);
  inter->add_option("--hypothesis", o.hypothesis, "var=state");
  inter->add_option("--query", o.query, "Hypothesis variable (first state)");
  inter->add_option("--a", o.item_a, "First item, var=state[,...]");
  inter->add_option("--b", o.item_b, "Second item, var=state[,...]");
  add_format(inter);

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep");
  sweep->add_option("--spec", o.spec_path, "Sweep spec (JSON)");
  sweep->add_option("--format", o.format, "csv|json");

  auto* stories = app.add_subcommand("stories", "Compare named scenarios");
  stories->add_option("--spec", o.spec_path, "Story spec (JSON)");
  add_format(stories);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "wigmore: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*validate) return detail::cmd_validate(o, out);
    if (*keylist) return detail::cmd_keylist(o, out, err);
    if (*exp) return detail::cmd_export(o, out);
    if (*compile) return detail::cmd_compile(o, out);
    if (*query) return detail::cmd_query(o, out);
    if (*lr) return detail::cmd_lr(o, out);
    if (*inter) return detail::cmd_interaction(o, out);
    if (*sweep) {
      if (o.format == "text") o.format = "csv";
      return detail::cmd_sweep(o, out);
    }
    if (*stories) return detail::cmd_stories(o, out);
  } catch (const ParseError& e) {
    err << "wigmore: " << e.what() << '\n';
    return 2;
  } catch (const ModelError& e) {
    err << "wigmore: " << e.what() << '\n';
    return 2;
  } catch (const SpecError& e) {
    err << "wigmore: " << e.what() << '\n';
    return 2;
  } catch (const ParameterError& e) {
    err << "wigmore: " << e.what() << '\n';
    return 2;
  } catch (const CompletenessError& e) {
    err << "wigmore: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "wigmore: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace wigmore::cli
