#pragma once

// Executes a parsed scenario: builds the field and schedule once, runs the
// analyses in order, checks their expectations and collects artifacts.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conefield/cli/emit.hpp"
#include "conefield/cli/scenario.hpp"
#include "conefield/hyperbolic.hpp"
#include "conefield/smoothing.hpp"

namespace conefield::cli {

struct Artifact {
  std::string filename;
  std::string content;
};

struct ReportBundle {
  Json report = Json::object();
  std::vector<Artifact> artifacts;
  bool passed = true;
};

struct RunOptions {
  std::string format;  // empty: use the scenario's choice
};

class Runner {
 public:
  Runner(const Scenario& sc, RunOptions opt) : sc_(sc), opt_(std::move(opt)) {
    chart_ = build_chart(sc_);
    field_ = std::make_shared<const ConeField>(build_field(field_spec(sc_.field_json, sc_.dim()), chart_, sc_.refinement));
    const double eps0 = sc_.schedule.eps0.value_or(2.0 * chart_->cell_diameter());
    schedule_ = make_schedule(field_, sc_.schedule.levels, eps0, sc_.schedule.ratio, sc_.schedule.neighbor_radius);
  }

  const EnlargementSchedule& schedule() const { return schedule_; }
  const ConeField& field() const { return *field_; }

  ReportBundle run() {
    ReportBundle b;
    b.report["scenario"] = sc_.name;
    b.report["field"] = field_->provenance();
    Json chart;
    chart["resolution"] = Json::array();
    for (const Axis& a : sc_.axes) chart["resolution"].push_back(a.cells);
    chart["cell_diameter"] = chart_->cell_diameter();
    b.report["chart"] = chart;
    b.report["schedule"] = {{"eps", schedule_.eps_list}, {"neighbor_radius", schedule_.neighbor_radius}};
    b.report["analyses"] = Json::array();
    for (const AnalysisSpec& a : sc_.analyses) {
      Json entry;
      entry["name"] = a.name;
      entry["type"] = a.type;
      try {
        Json result = dispatch(a, b.artifacts);
        Json checks = Json::array();
        bool ok = true;
        for (auto it = a.expect.begin(); it != a.expect.end(); ++it) {
          const bool pass = result.contains(it.key()) && matches(result[it.key()], it.value());
          checks.push_back({{"key", it.key()},
                            {"expected", it.value()},
                            {"actual", result.contains(it.key()) ? result[it.key()] : Json()},
                            {"pass", pass}});
          ok = ok && pass;
        }
        entry["result"] = std::move(result);
        if (!checks.empty()) entry["expectations"] = std::move(checks);
        entry["passed"] = ok;
        b.passed = b.passed && ok;
      } catch (const Error& e) {
        entry["error"] = "analysis '" + a.name + "' (" + sc_.source + "): " + e.what();
        entry["passed"] = false;
        b.passed = false;
      }
      b.report["analyses"].push_back(std::move(entry));
    }
    b.report["passed"] = b.passed;
    return b;
  }

  CellSet resolve(const Json& s, int depth = 0) {
    if (depth > 32) throw Error(ErrorCode::InvalidArgument, "cell set definitions are circular");
    const std::size_t n = chart_->cell_count();
    if (s.is_string()) {
      const std::string name = s;
      if (name == "all") return CellSet::all(n);
      if (name == "domain") return field_->domain();
      if (name == "recurrent") return recurrence().stabilized_set;
      if (sc_.sets.contains(name)) return resolve(sc_.sets[name], depth + 1);
      throw Error(ErrorCode::InvalidArgument, "unknown cell set '" + name + "'");
    }
    const std::string key = s.begin().key();
    const Json& v = s.begin().value();
    if (key == "point") {
      Vec p = Vec::zero(chart_->dim());
      for (int i = 0; i < chart_->dim(); ++i) p[i] = v[static_cast<std::size_t>(i)];
      const auto c = chart_->locate(p);
      if (!c) throw Error(ErrorCode::UnknownCell, "point " + to_string(p) + " is outside the chart");
      return CellSet::of(n, {*c});
    }
    if (key == "region") {
      const Expr e = Expr::compile(v.get<std::string>(), coordinate_names(chart_->dim()));
      CellSet out(n);
      for (CellId c = 0; c < n; ++c) {
        const Vec p = chart_->center(c);
        if (e(coordinate_values(std::span<const double>(p.x.data(), static_cast<std::size_t>(p.dim)))) <= 0.0) out.insert(c);
      }
      return out;
    }
    if (key == "cells") {
      CellSet out(n);
      for (const Json& c : v) {
        CellIndex idx{0, 0, 0};
        for (int i = 0; i < chart_->dim(); ++i) idx[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)];
        out.insert(chart_->id(idx));
      }
      return out;
    }
    if (key == "future_closure") return closure(schedule_.finest().graph, resolve(v, depth + 1));
    if (key == "past_closure") return closure(schedule_.finest().graph, resolve(v, depth + 1), Direction::Backward);
    if (key == "union" || key == "intersect") {
      CellSet acc = resolve(v[0], depth + 1);
      for (std::size_t i = 1; i < v.size(); ++i) acc = key == "union" ? (acc | resolve(v[i], depth + 1)) : (acc & resolve(v[i], depth + 1));
      return acc;
    }
    if (key == "minus") return resolve(v[0], depth + 1) - resolve(v[1], depth + 1);
    throw Error(ErrorCode::InvalidArgument, "unknown set form '" + key + "'");
  }

 private:
  const RecurrenceReport& recurrence() {
    if (!rec_) rec_ = recurrent_set(schedule_);
    return *rec_;
  }

  bool want_csv() const { return opt_.format != "svg"; }
  bool want_svg() const { return opt_.format != "csv"; }

  void scalar_artifacts(const std::string& name, const std::vector<double>& v, std::vector<Artifact>& out) {
    if (want_csv()) out.push_back({name + ".csv", scalar_csv(*chart_, v)});
    if (want_svg()) out.push_back({name + ".svg", svg_heatmap(*chart_, v, sc_.name + ": " + name)});
  }

  Json path_json(const std::vector<CellId>& cells) const {
    Json out = Json::array();
    for (CellId c : cells) {
      const CellIndex i = chart_->index(c);
      out.push_back(std::vector<int>(i.begin(), i.begin() + chart_->dim()));
    }
    return out;
  }

  static bool matches(const Json& actual, const Json& expected) {
    if (expected.is_object() && (expected.contains("min") || expected.contains("max"))) {
      if (!actual.is_number()) return false;
      const double a = actual;
      if (expected.contains("min") && a < expected["min"].get<double>()) return false;
      if (expected.contains("max") && a > expected["max"].get<double>()) return false;
      return true;
    }
    if (expected.is_number() && actual.is_number()) {
      const double a = actual, e = expected;
      return std::abs(a - e) <= 1e-9 * std::max(1.0, std::abs(e));
    }
    return actual == expected;
  }

  Json dispatch(const AnalysisSpec& a, std::vector<Artifact>& out) {
    const Json& args = a.args;
    const Digraph& g = schedule_.finest().graph;
    Json r;
    if (a.type == "recurrent") {
      const RecurrenceReport& rec = recurrence();
      r["levels"] = Json::array();
      for (const CellSet& s : rec.per_level) r["levels"].push_back(s.count());
      r["count"] = rec.stabilized_set.count();
      r["empty"] = rec.stabilized_set.empty();
      r["stabilized"] = rec.stabilized;
      r["classes"] = rec.classes.size();
      r["class_sizes"] = Json::array();
      for (const auto& c : rec.classes) r["class_sizes"].push_back(c.size());
      r["class_order"] = Json::array();
      for (const auto& [i, j] : rec.class_order) r["class_order"].push_back({i, j});
      if (want_csv()) out.push_back({a.name + ".csv", set_csv(*chart_, rec.stabilized_set)});
      if (want_svg()) {
        std::vector<double> v(chart_->cell_count(), 0.0);
        for (CellId c : rec.stabilized_set.cells()) v[c] = 1.0;
        out.push_back({a.name + ".svg", svg_heatmap(*chart_, v, sc_.name + ": " + a.name)});
      }
    } else if (a.type == "lyapunov") {
      const ScalarField tau = complete_lyapunov(schedule_);
      const Components comp = strongly_connected(g);
      bool monotone = true, strict = true;
      for (CellId u = 0; u < g.size(); ++u)
        for (CellId v : g.successors(u)) {
          if (tau.value[v] < tau.value[u]) monotone = false;
          if (comp.of[u] != comp.of[v] && !(tau.value[v] > tau.value[u])) strict = false;
        }
      r["monotone"] = monotone;
      r["strict_between_components"] = strict;
      r["components"] = comp.count();
      r["regular_cells"] = tau.regular_cells.count();
      r["min"] = *std::min_element(tau.value.begin(), tau.value.end());
      r["max"] = *std::max_element(tau.value.begin(), tau.value.end());
      scalar_artifacts(a.name, tau.value, out);
    } else if (a.type == "temporal") {
      const SteepResult st = steep_temporal(schedule_);
      r["ok"] = st.ok();
      r["violations"] = st.violations;
      if (st.tau) {
        r["max"] = *std::max_element(st.tau->value.begin(), st.tau->value.end());
        scalar_artifacts(a.name, st.tau->value, out);
      } else {
        r["reason"] = "NotCausal";
        if (st.causality.cycle) r["cycle"] = path_json(*st.causality.cycle);
        if (st.causality.singular) r["singular"] = path_json({*st.causality.singular})[0];
      }
    } else if (a.type == "causality") {
      const CausalityResult c = causality_check(schedule_);
      r["causal"] = c.causal;
      if (c.cycle) {
        r["cycle"] = path_json(*c.cycle);
        r["cycle_length"] = c.cycle->size() - 1;
        if (want_csv()) out.push_back({a.name + "_cycle.csv", path_csv(*chart_, *c.cycle)});
      }
      if (c.singular) r["singular"] = path_json({*c.singular})[0];
    } else if (a.type == "gh") {
      const GHReport gh = gh_report(schedule_, args.value("margin", 1));
      r["gh0"] = gh.gh0;
      r["gh1"] = gh.gh1.causal;
      r["gh2"] = gh.gh2.ok;
      bool all_bounded = true;
      for (const auto& p : gh.gh2.samples) all_bounded = all_bounded && p.bounded;
      r["gh3_samples"] = gh.gh2.samples.size();
      r["gh3_bounded"] = all_bounded;
      r["steep"] = gh.steep_tau.has_value();
      if (gh.gh1.cycle) r["cycle"] = path_json(*gh.gh1.cycle);
      if (gh.gh2.witness) r["gh2_witness"] = path_json({gh.gh2.witness->from, gh.gh2.witness->to});
    } else if (a.type == "graph") {
      r["edges"] = g.edge_count();
      r["loops"] = g.loops().count();
      if (want_csv()) out.push_back({a.name + ".csv", edges_csv(schedule_.finest())});
    } else if (a.type == "reach") {
      const CellSet from = resolve(args["from"]), to = resolve(args["to"]);
      if (from.count() != 1 || to.count() != 1) throw Error(ErrorCode::InvalidArgument, "reach needs single cells");
      const CellId s = from.cells().front(), t = to.cells().front();
      const CellSet fut = future(schedule_.finest(), from);
      const auto p = extract_path(schedule_.finest(), s, t);
      r["reachable"] = p.has_value();
      r["future_count"] = fut.count();
      r["past_count"] = past(schedule_.finest(), to).count();
      if (p) {
        r["length"] = p->length;
        r["path"] = path_json(p->cells);
        if (want_csv()) out.push_back({a.name + "_path.csv", path_csv(*chart_, p->cells)});
      }
      if (want_csv()) out.push_back({a.name + "_future.csv", set_csv(*chart_, fut)});
    } else if (a.type == "sullivan") {
      const CellSet f = resolve(args["F"]);
      const SullivanResult s = sullivan_regular_set(schedule_, f);
      const Digraph sub = g.restricted(f);
      bool strict = true;
      for (CellId u = 0; u < sub.size(); ++u)
        for (CellId v : sub.successors(u)) strict = strict && s.tau.value[v] > s.tau.value[u];
      r["fset"] = f.count();
      r["z_count"] = s.z.count();
      r["regular_cells"] = s.tau.regular_cells.count();
      r["strictly_increasing"] = strict;
      scalar_artifacts(a.name, s.tau.value, out);
    } else if (a.type == "stability") {
      const ASReport as = asymptotic_stability_check(schedule_, resolve(args["Y"]), resolve(args["U"]));
      r["as1"] = as.as1;
      r["as2"] = as.as2;
      r["as3"] = as.as3;
      r["as4"] = as.as4;
      r["agree"] = as.agree();
      Json w = Json::object();
      if (!as.as1_witness.empty()) w["as1"] = as.as1_witness;
      if (!as.as2_witness.empty()) w["as2"] = as.as2_witness;
      if (!as.as3_witness.empty()) w["as3"] = as.as3_witness;
      if (!as.as4_witness.empty()) w["as4"] = as.as4_witness;
      r["witnesses"] = w;
    } else if (a.type == "trapping") {
      const TrapResult t = trapping_domain_check(schedule_, resolve(args["A"]));
      r["trapping"] = t.trapping;
      r["eps"] = t.eps ? Json(*t.eps) : Json();
      if (t.witness) r["witness"] = path_json({t.witness->first, t.witness->second});
    } else if (a.type == "semicontinuity") {
      const auto e = semicontinuity_probe(schedule_, resolve(args["U"]));
      r["eps"] = e ? Json(*e) : Json();
      r["found"] = e.has_value();
    } else if (a.type == "jset") {
      const CellSet j = jset(schedule_, resolve(args["K"]), resolve(args["K2"]));
      r["count"] = j.count();
      if (want_csv()) out.push_back({a.name + ".csv", set_csv(*chart_, j)});
    } else if (a.type == "fj") {
      const FJResult f = fj_identity_check(schedule_, resolve(args["K1"]), resolve(args["K2"]));
      r["equal"] = f.equal;
      r["stabilized"] = f.stabilized;
      r["discrepancy"] = f.discrepancy.count();
    } else if (a.type == "length_bound") {
      const LengthBound l = length_bound(schedule_, resolve(args["K"]));
      r["finite"] = l.length.has_value();
      r["length"] = l.length ? Json(*l.length) : Json();
      if (l.cycle) r["cycle"] = path_json(*l.cycle);
    } else if (a.type == "sublevel") {
      const Expr e = Expr::compile(args["f"].get<std::string>(), coordinate_names(chart_->dim()));
      ScalarField f;
      f.value.resize(chart_->cell_count());
      for (CellId c = 0; c < chart_->cell_count(); ++c) {
        const Vec p = chart_->center(c);
        f.value[c] = e(coordinate_values(std::span<const double>(p.x.data(), static_cast<std::size_t>(p.dim))));
      }
      const SublevelResult s = sublevel_trap(f, args["a"].get<double>(), schedule_.finest());
      r["trapping"] = s.trapping;
      r["hypothesis"] = s.hypothesis;
      if (s.witness) r["witness"] = path_json({s.witness->first, s.witness->second});
    } else if (a.type == "smooth") {
      const Expr e = Expr::compile(args["g"].get<std::string>(), std::vector<std::string>{"y"});
      auto fn = [e](double y) {
        const double v = y;
        return e(std::span<const double>(&v, 1));
      };
      const auto n = static_cast<std::size_t>(args.value("samples", 4096));
      const LipschitzGraph src = LipschitzGraph::sample(fn, n, args.value("lo", -2.0), args.value("hi", 2.0));
      const std::vector<double> pins = args.value("pins", std::vector<double>{});
      const MollifyResult m = mollify(src, args["s"].get<double>(), KernelSpec{}, pins, args.value("pin_radius", 0.5));
      const auto band = args.value("band", std::vector<double>{-1.1, 1.1});
      if (band.size() != 2) throw Error(ErrorCode::InvalidArgument, "band needs [lo, hi]");
      r["sup_error"] = m.sup_error;
      r["lip"] = m.lip;
      r["input_lip"] = src.lip_bound();
      r["containment"] = check_containment(m.graph, [&](double) { return std::make_pair(band[0], band[1]); });
      double pin_err = 0.0;
      for (double p : pins) pin_err = std::max(pin_err, std::abs(m.graph(p) - fn(p)));
      r["pin_error"] = pin_err;
      if (want_csv()) out.push_back({a.name + ".csv", graph_csv(m.graph)});
    } else if (a.type == "epigraph") {
      const RegularizedBoundary rb = regularize_trapping_boundary(schedule_, resolve(args["A"]), args["s"].get<double>());
      r["s"] = rb.s;
      r["input_trapping"] = rb.input_trap.trapping;
      r["output_trapping"] = rb.output_trap.trapping;
      if (want_csv()) out.push_back({a.name + ".csv", graph_csv(rb.smoothed)});
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown analysis type '" + a.type + "'");
    }
    return r;
  }

  const Scenario& sc_;
  RunOptions opt_;
  std::shared_ptr<const GridChart> chart_;
  std::shared_ptr<const ConeField> field_;
  EnlargementSchedule schedule_;
  std::optional<RecurrenceReport> rec_;
};

inline ReportBundle run(const Scenario& sc, RunOptions opt = {}) {
  if (opt.format.empty()) opt.format = sc.outputs.format;
  Runner r(sc, opt);
  return r.run();
}

/// Writes report.json and every artifact under `dir`.
inline std::vector<std::filesystem::path> emit(const ReportBundle& b, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const Artifact& a : b.artifacts) {
    write_file(dir / a.filename, a.content);
    written.push_back(dir / a.filename);
  }
  write_file(dir / "report.json", b.report.dump(2) + "\n");
  written.push_back(dir / "report.json");
  return written;
}

}  // namespace conefield::cli
