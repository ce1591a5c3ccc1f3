#pragma once

// JSON scenario files: one chart, one field, one schedule, a list of
// analyses and where to write their artifacts.

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conefield/field.hpp"
#include "json.hpp"

namespace conefield::cli {

using Json = nlohmann::ordered_json;

struct Issue {
  std::string where;
  std::string message;
};

class ScenarioError : public Error {
 public:
  ScenarioError(ErrorCode code, std::vector<Issue> issues)
      : Error(code, summarize(issues)), issues_(std::move(issues)) {}
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  static std::string summarize(const std::vector<Issue>& issues) {
    std::string s = std::to_string(issues.size()) + " problem(s)";
    for (const Issue& i : issues) s += "\n  " + i.where + ": " + i.message;
    return s;
  }
  std::vector<Issue> issues_;
};

struct ScheduleBlock {
  int levels = 6;
  std::optional<double> eps0;  // default: twice the cell diameter
  double ratio = 0.5;
  int neighbor_radius = 2;
};

struct AnalysisSpec {
  std::string type;
  std::string name;
  Json args;
  Json expect;
};

struct OutputBlock {
  std::string dir = "out";
  std::string format = "both";  // csv | svg | both
};

struct Scenario {
  std::string name;
  std::string source;
  std::vector<Axis> axes;
  std::optional<std::vector<std::vector<std::string>>> metric;
  Json field_json;
  int refinement = 1;
  ScheduleBlock schedule;
  Json sets = Json::object();
  std::vector<AnalysisSpec> analyses;
  OutputBlock outputs;

  int dim() const { return static_cast<int>(axes.size()); }
};

/// Analysis types and the cell-set arguments each one requires.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& analysis_types() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> t{
      {"recurrent", {}},          {"lyapunov", {}},        {"temporal", {}},
      {"causality", {}},          {"gh", {}},              {"graph", {}},
      {"reach", {"from", "to"}},  {"sullivan", {"F"}},     {"stability", {"Y", "U"}},
      {"trapping", {"A"}},        {"semicontinuity", {"U"}}, {"jset", {"K", "K2"}},
      {"fj", {"K1", "K2"}},       {"length_bound", {"K"}}, {"sublevel", {}},
      {"smooth", {}},             {"epigraph", {"A"}},
  };
  return t;
}

namespace detail {

class Checker {
 public:
  explicit Checker(std::vector<Issue>& issues) : issues_(issues) {}

  void fail(const std::string& where, const std::string& msg) { issues_.push_back({where, msg}); }

  bool formula(const Json& j, const std::string& where, const std::vector<std::string>& vars) {
    if (!j.is_string()) {
      fail(where, "expected a formula string");
      return false;
    }
    try {
      Expr::compile(j.get<std::string>(), vars);
      return true;
    } catch (const Error& e) {
      fail(where, e.what());
      return false;
    }
  }

  std::optional<double> number(const Json& obj, const std::string& key, const std::string& where, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(where + "." + key, "missing");
      return std::nullopt;
    }
    const Json& v = obj.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(where + "." + key, "expected a finite number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<int> integer(const Json& obj, const std::string& key, const std::string& where, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(where + "." + key, "missing");
      return std::nullopt;
    }
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(where + "." + key, "expected an integer");
      return std::nullopt;
    }
    return v.get<int>();
  }

 private:
  std::vector<Issue>& issues_;
};

inline void check_field(Checker& ck, const Json& f, int dim, const std::string& where) {
  const auto vars = coordinate_names(dim);
  if (!f.is_object()) {
    ck.fail(where, "expected an object");
    return;
  }
  if (!f.contains("kind") || !f["kind"].is_string()) {
    ck.fail(where + ".kind", "missing (vector | angular | lorentz | standard | table | restriction)");
    return;
  }
  const std::string kind = f["kind"];
  if (kind == "vector") {
    if (!f.contains("components") || !f["components"].is_array() || f["components"].size() != static_cast<std::size_t>(dim)) {
      ck.fail(where + ".components", "expected " + std::to_string(dim) + " formulas");
      return;
    }
    for (std::size_t i = 0; i < f["components"].size(); ++i)
      ck.formula(f["components"][i], where + ".components[" + std::to_string(i) + "]", vars);
  } else if (kind == "angular") {
    if (dim != 2) ck.fail(where, "angular fields need a 2D chart");
    for (const char* key : {"center", "half_width"}) {
      if (!f.contains(key)) ck.fail(where + "." + key, "missing");
      else ck.formula(f[key], where + "." + key, vars);
    }
  } else if (kind == "lorentz") {
    const Json& m = f.contains("metric") ? f["metric"] : Json();
    if (!m.is_array() || m.size() != static_cast<std::size_t>(dim)) {
      ck.fail(where + ".metric", "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " formula matrix");
      return;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_array() || m[i].size() != static_cast<std::size_t>(dim)) {
        ck.fail(where + ".metric[" + std::to_string(i) + "]", "wrong row length");
        continue;
      }
      for (std::size_t j = 0; j < m[i].size(); ++j)
        ck.formula(m[i][j], where + ".metric[" + std::to_string(i) + "][" + std::to_string(j) + "]", vars);
    }
  } else if (kind == "standard") {
    const auto s = ck.number(f, "s", where, true);
    if (s && *s < 0.0) ck.fail(where + ".s", "must be non-negative");
  } else if (kind == "table") {
    if (!f.contains("entries") || !f["entries"].is_array()) {
      ck.fail(where + ".entries", "expected an array");
      return;
    }
    for (std::size_t i = 0; i < f["entries"].size(); ++i) {
      const Json& e = f["entries"][i];
      const std::string w = where + ".entries[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("cell") || !e["cell"].is_array() || e["cell"].size() != static_cast<std::size_t>(dim))
        ck.fail(w + ".cell", "expected " + std::to_string(dim) + " indices");
      if (!e.contains("cone")) ck.fail(w + ".cone", "missing");
      else if (!(e["cone"] == "full" || e["cone"] == "empty" || e["cone"].is_array()))
        ck.fail(w + ".cone", "expected \"full\", \"empty\" or a list of generators");
    }
  } else if (kind == "restriction") {
    if (!f.contains("inner")) ck.fail(where + ".inner", "missing");
    else check_field(ck, f["inner"], dim, where + ".inner");
    if (!f.contains("region")) ck.fail(where + ".region", "missing");
    else ck.formula(f["region"], where + ".region", vars);
  } else {
    ck.fail(where + ".kind", "unknown field kind '" + kind + "'");
  }
}

inline void check_set(Checker& ck, const Json& s, const std::string& where, const std::set<std::string>& names,
                      const std::vector<Axis>& axes) {
  const int dim = static_cast<int>(axes.size());
  if (s.is_string()) {
    const std::string n = s;
    if (n != "all" && n != "domain" && n != "recurrent" && !names.count(n))
      ck.fail(where, "unknown cell set '" + n + "'");
    return;
  }
  if (!s.is_object() || s.size() != 1) {
    ck.fail(where, "expected a set name or a one-key object");
    return;
  }
  const std::string key = s.begin().key();
  const Json& v = s.begin().value();
  if (key == "point") {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
      ck.fail(where + ".point", "expected " + std::to_string(dim) + " coordinates");
      return;
    }
    for (int i = 0; i < dim && i < static_cast<int>(axes.size()); ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        ck.fail(where + ".point", "coordinates must be numbers");
        return;
      }
      const double x = v[static_cast<std::size_t>(i)];
      if (!axes[static_cast<std::size_t>(i)].wrap && (x < axes[static_cast<std::size_t>(i)].lo || x > axes[static_cast<std::size_t>(i)].hi))
        ck.fail(where + ".point", "outside the chart");
    }
  } else if (key == "region") {
    ck.formula(v, where + ".region", coordinate_names(dim));
  } else if (key == "cells") {
    if (!v.is_array()) {
      ck.fail(where + ".cells", "expected a list of index tuples");
      return;
    }
    for (const Json& c : v) {
      if (!c.is_array() || c.size() != static_cast<std::size_t>(dim)) {
        ck.fail(where + ".cells", "each cell needs " + std::to_string(dim) + " indices");
        continue;
      }
      for (int i = 0; i < dim; ++i) {
        const Json& k = c[static_cast<std::size_t>(i)];
        if (!k.is_number_integer() || k.get<int>() < 0 || k.get<int>() >= axes[static_cast<std::size_t>(i)].cells)
          ck.fail(where + ".cells", "index " + k.dump() + " outside the chart");
      }
    }
  } else if (key == "future_closure" || key == "past_closure") {
    check_set(ck, v, where + "." + key, names, axes);
  } else if (key == "union" || key == "intersect") {
    if (!v.is_array() || v.empty()) {
      ck.fail(where + "." + key, "expected a nonempty list");
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) check_set(ck, v[i], where + "." + key + "[" + std::to_string(i) + "]", names, axes);
  } else if (key == "minus") {
    if (!v.is_array() || v.size() != 2) {
      ck.fail(where + ".minus", "expected [set, set]");
      return;
    }
    check_set(ck, v[0], where + ".minus[0]", names, axes);
    check_set(ck, v[1], where + ".minus[1]", names, axes);
  } else {
    ck.fail(where, "unknown set form '" + key + "'");
  }
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace detail

/// Parses and validates a scenario. Throws ScenarioError carrying every
/// problem found, not just the first.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(ErrorCode::ParseError,
                        {{source + ":" + std::to_string(detail::line_of(text, e.byte)), e.what()}});
  }
  std::vector<Issue> issues;
  detail::Checker ck(issues);
  Scenario sc;
  sc.source = source;
  if (!root.is_object()) throw ScenarioError(ErrorCode::ValidationError, {{"<root>", "expected an object"}});
  if (root.contains("name") && !root["name"].is_string()) ck.fail("name", "expected a string");
  else sc.name = root.value("name", std::string("scenario"));

  // chart
  if (!root.contains("chart") || !root["chart"].is_object()) {
    ck.fail("chart", "missing");
  } else {
    const Json& c = root["chart"];
    const Json bounds = c.value("bounds", Json());
    const Json res = c.value("resolution", Json());
    const Json wrap = c.value("wrap", Json());
    if (!bounds.is_array() || bounds.empty()) ck.fail("chart.bounds", "missing");
    if (res.is_null()) ck.fail("chart.resolution", "missing");
    if (bounds.is_array() && (bounds.size() < 2 || bounds.size() > 3)) ck.fail("chart.bounds", "charts are 2D or 3D");
    if (bounds.is_array() && bounds.size() >= 2 && bounds.size() <= 3 && !res.is_null()) {
      const std::size_t d = bounds.size();
      for (std::size_t i = 0; i < d; ++i) {
        Axis ax;
        const std::string w = "chart.bounds[" + std::to_string(i) + "]";
        if (!bounds[i].is_array() || bounds[i].size() != 2 || !bounds[i][0].is_number() || !bounds[i][1].is_number()) {
          ck.fail(w, "expected [lo, hi]");
        } else {
          ax.lo = bounds[i][0];
          ax.hi = bounds[i][1];
          if (!(ax.lo < ax.hi)) ck.fail(w, "lo must be below hi");
        }
        const Json& r = res.is_array() ? (i < res.size() ? res[i] : Json()) : res;
        if (!r.is_number_integer() || r.get<int>() < 2) ck.fail("chart.resolution", "each axis needs an integer >= 2");
        else ax.cells = r;
        if (wrap.is_array() && i < wrap.size()) {
          if (!wrap[i].is_boolean()) ck.fail("chart.wrap", "expected booleans");
          else ax.wrap = wrap[i];
        }
        sc.axes.push_back(ax);
      }
      if (res.is_array() && res.size() != d) ck.fail("chart.resolution", "one entry per axis");
      if (!wrap.is_null() && (!wrap.is_array() || wrap.size() != d)) ck.fail("chart.wrap", "one boolean per axis");
    }
    if (c.contains("metric")) {
      const Json& m = c["metric"];
      const std::size_t d = sc.axes.size();
      std::vector<std::vector<std::string>> rows;
      if (!m.is_array() || m.size() != d) {
        ck.fail("chart.metric", "expected a square formula matrix");
      } else {
        for (std::size_t i = 0; i < d; ++i) {
          rows.emplace_back();
          if (!m[i].is_array() || m[i].size() != d) {
            ck.fail("chart.metric", "expected a square formula matrix");
            continue;
          }
          for (std::size_t j = 0; j < d; ++j) {
            if (ck.formula(m[i][j], "chart.metric[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                           coordinate_names(static_cast<int>(d))))
              rows.back().push_back(m[i][j]);
          }
        }
        sc.metric = rows;
      }
    }
  }
  if (root.contains("charts")) ck.fail("charts", "one chart per scenario; multi-chart scenarios are not supported");
  const int dim = sc.dim();

  // field
  if (!root.contains("field")) ck.fail("field", "missing");
  else if (dim >= 2) detail::check_field(ck, root["field"], dim, "field");
  sc.field_json = root.value("field", Json());
  if (root.contains("refinement")) {
    const auto r = ck.integer(root, "refinement", "", false);
    if (r && (*r < 0 || *r > 8)) ck.fail("refinement", "must lie in [0, 8]");
    if (r) sc.refinement = *r;
  }

  // schedule
  if (root.contains("schedule")) {
    const Json& s = root["schedule"];
    if (!s.is_object()) {
      ck.fail("schedule", "expected an object");
    } else {
      if (auto n = ck.integer(s, "levels", "schedule", false)) {
        if (*n < 2) ck.fail("schedule.levels", "BadScheduleParams: need at least two levels");
        sc.schedule.levels = *n;
      }
      if (s.contains("eps0") && !(s["eps0"].is_string() && s["eps0"] == "auto")) {
        if (auto e = ck.number(s, "eps0", "schedule", false)) {
          if (*e <= 0.0) ck.fail("schedule.eps0", "BadScheduleParams: eps0 must be positive");
          sc.schedule.eps0 = *e;
        }
      }
      if (auto r = ck.number(s, "ratio", "schedule", false)) {
        if (!(*r > 0.0 && *r < 1.0)) ck.fail("schedule.ratio", "BadScheduleParams: ratio must lie in (0, 1)");
        sc.schedule.ratio = *r;
      }
      if (auto r = ck.integer(s, "neighbor_radius", "schedule", false)) {
        if (*r < 1) ck.fail("schedule.neighbor_radius", "must be at least 1");
        sc.schedule.neighbor_radius = *r;
      }
    }
  }

  // named sets
  std::set<std::string> names;
  if (root.contains("sets")) {
    if (!root["sets"].is_object()) ck.fail("sets", "expected an object of named cell sets");
    else {
      sc.sets = root["sets"];
      for (auto it = sc.sets.begin(); it != sc.sets.end(); ++it) names.insert(it.key());
      for (auto it = sc.sets.begin(); it != sc.sets.end(); ++it)
        if (dim >= 2) detail::check_set(ck, it.value(), "sets." + it.key(), names, sc.axes);
    }
  }

  // analyses
  if (root.contains("analyses")) {
    const Json& list = root["analyses"];
    if (!list.is_array()) ck.fail("analyses", "expected a list");
    std::set<std::string> seen;
    for (std::size_t i = 0; list.is_array() && i < list.size(); ++i) {
      const Json& a = list[i];
      const std::string w = "analyses[" + std::to_string(i) + "]";
      if (!a.is_object() || !a.contains("type") || !a["type"].is_string()) {
        ck.fail(w + ".type", "missing");
        continue;
      }
      AnalysisSpec spec;
      spec.type = a["type"];
      if (a.contains("name") && !a["name"].is_string()) {
        ck.fail(w + ".name", "expected a string");
        continue;
      }
      spec.name = a.value("name", spec.type + "_" + std::to_string(i));
      if (!seen.insert(spec.name).second) ck.fail(w + ".name", "duplicate analysis name '" + spec.name + "'");
      const auto& types = analysis_types();
      const auto t = std::find_if(types.begin(), types.end(), [&](const auto& p) { return p.first == spec.type; });
      if (t == types.end()) {
        ck.fail(w + ".type", "unknown analysis '" + spec.type + "'");
        continue;
      }
      for (const std::string& key : t->second) {
        if (!a.contains(key)) ck.fail(w + "." + key, "missing");
        else if (dim >= 2) detail::check_set(ck, a[key], w + "." + key, names, sc.axes);
      }
      if (spec.type == "smooth") {
        if (!a.contains("g")) ck.fail(w + ".g", "missing");
        else ck.formula(a["g"], w + ".g", {"y"});
        if (auto s = ck.number(a, "s", w, true); s && *s <= 0.0) ck.fail(w + ".s", "NonPositiveS: s must be positive");
        if (auto n = ck.integer(a, "samples", w, false); n && *n < 8) ck.fail(w + ".samples", "need at least 8 samples");
        if (a.contains("pins") && !a["pins"].is_array()) ck.fail(w + ".pins", "expected a list of abscissae");
      }
      if (spec.type == "epigraph") {
        if (auto s = ck.number(a, "s", w, true); s && *s <= 0.0) ck.fail(w + ".s", "NonPositiveS: s must be positive");
      }
      if (spec.type == "sublevel") {
        if (!a.contains("f")) ck.fail(w + ".f", "missing");
        else if (dim >= 2) ck.formula(a["f"], w + ".f", coordinate_names(dim));
        ck.number(a, "a", w, true);
      }
      if (spec.type == "gh") {
        if (auto m = ck.integer(a, "margin", w, false); m && *m < 1) ck.fail(w + ".margin", "must be at least 1");
      }
      if (a.contains("expect") && !a["expect"].is_object()) ck.fail(w + ".expect", "expected an object");
      spec.args = a;
      spec.expect = a.value("expect", Json::object());
      spec.args.erase("expect");
      sc.analyses.push_back(std::move(spec));
    }
  }

  // outputs
  if (root.contains("outputs")) {
    const Json& o = root["outputs"];
    if (!o.is_object()) ck.fail("outputs", "expected an object");
    else {
      sc.outputs.dir = o.value("dir", sc.outputs.dir);
      sc.outputs.format = o.value("format", sc.outputs.format);
      if (sc.outputs.format != "csv" && sc.outputs.format != "svg" && sc.outputs.format != "both")
        ck.fail("outputs.format", "expected csv, svg or both");
    }
  }

  if (!issues.empty()) throw ScenarioError(ErrorCode::ValidationError, std::move(issues));
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IOFailure, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

/// Builds the chart (with its metric) and the cone field of a scenario.
inline std::shared_ptr<const GridChart> build_chart(const Scenario& sc) {
  GridChart chart(sc.axes);
  if (sc.metric) {
    const auto names = coordinate_names(sc.dim());
    std::vector<std::vector<Expr>> m;
    for (const auto& row : *sc.metric) {
      m.emplace_back();
      for (const auto& t : row) m.back().push_back(Expr::compile(t, names));
    }
    std::vector<SymMatrix> per(chart.cell_count(), identity_metric());
    for (CellId c = 0; c < chart.cell_count(); ++c) {
      const Vec p = chart.center(c);
      const auto vals = coordinate_values(std::span<const double>(p.x.data(), static_cast<std::size_t>(p.dim)));
      for (int i = 0; i < sc.dim(); ++i)
        for (int j = 0; j < sc.dim(); ++j) per[c][static_cast<std::size_t>(3 * i + j)] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](vals);
    }
    chart.set_metric(std::move(per));
  }
  return std::make_shared<const GridChart>(std::move(chart));
}

inline FieldSpec field_spec(const Json& f, int dim) {
  const std::string kind = f.at("kind");
  if (kind == "vector") return vector_field(f.at("components").get<std::vector<std::string>>());
  if (kind == "angular") return angular_field(f.at("center"), f.at("half_width"));
  if (kind == "lorentz") return lorentz_field(f.at("metric").get<std::vector<std::vector<std::string>>>());
  if (kind == "standard") {
    const double s = f.at("s");
    return function_field([s, dim](const Vec&) { return Cone::standard(s, dim); },
                          "standard(" + Json(s).dump() + ")");
  }
  if (kind == "restriction") return restrict_field(field_spec(f.at("inner"), dim), f.at("region"));
  if (kind == "table") {
    TableSpec t;
    for (const Json& e : f.at("entries")) {
      CellIndex idx{0, 0, 0};
      for (int i = 0; i < dim; ++i) idx[static_cast<std::size_t>(i)] = e.at("cell")[static_cast<std::size_t>(i)];
      const Json& c = e.at("cone");
      if (c == "full") t.entries.emplace_back(idx, Cone::full(dim));
      else if (c == "empty") t.entries.emplace_back(idx, Cone::empty(dim));
      else {
        std::vector<Vec> gens;
        for (const Json& g : c) {
          Vec v = Vec::zero(dim);
          for (int i = 0; i < dim; ++i) v[i] = g.at(static_cast<std::size_t>(i));
          gens.push_back(v);
        }
        t.entries.emplace_back(idx, Cone::hull(dim, gens));
      }
    }
    return FieldSpec{t};
  }
  throw Error(ErrorCode::SpecParseError, "unknown field kind '" + kind + "'");
}

}  // namespace conefield::cli
