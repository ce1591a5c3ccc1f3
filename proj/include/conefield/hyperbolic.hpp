#pragma once

// Causality and global hyperbolicity diagnostics on the finest graph of a
// schedule, steep temporal functions and causal length bounds.

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conefield/conley.hpp"

namespace conefield {

struct CausalityResult {
  bool causal = false;
  std::optional<std::vector<CellId>> cycle;  // closed walk, first == last
  std::optional<CellId> singular;
};

/// Causal iff the finest graph is acyclic and no cell is singular.
inline CausalityResult causality_check(const EnlargementSchedule& s) {
  CausalityResult r;
  const Digraph& g = s.finest().graph;
  const CellSet sing = s.field().singular_set() | g.loops();
  const CellSet cyc = cycle_cells(g);
  if (!(cyc - g.loops()).empty()) {
    Digraph plain(g.size(), g.edges(), CellSet(g.size()));
    r.cycle = shortest_cycle(plain, cyc - g.loops());
  }
  if (!sing.empty()) r.singular = sing.cells().front();
  r.causal = !r.cycle && !r.singular;
  return r;
}

/// (K u J+(K)) n (K' u J-(K')) at the finest level; K n K' always belongs to it.
inline CellSet jset(const EnlargementSchedule& s, const CellSet& k, const CellSet& k2) {
  const Digraph& g = s.finest().graph;
  return closure(g, k) & closure(g, k2, Direction::Backward);
}

struct ProbeSample {
  CellId from = 0, to = 0;
  bool bounded = true;
};

struct GH2Result {
  bool ok = true;
  std::vector<ProbeSample> samples;
  std::optional<ProbeSample> witness;
  CellSet escaping;  // the offending jset
};

namespace detail {

/// 5x5 (or 5x5x5) lattice of cells spread over the middle third of the chart.
inline std::vector<CellId> probe_cells(const GridChart& chart) {
  std::array<std::vector<int>, 3> coords;
  for (int i = 0; i < chart.dim(); ++i) {
    const int n = chart.axis(i).cells;
    const int lo = n / 3, hi = std::max(lo, (2 * n) / 3 - 1);
    for (int k = 0; k < 5; ++k) {
      const int v = lo + (hi - lo) * k / 4;
      if (coords[i].empty() || coords[i].back() != v) coords[i].push_back(v);
    }
  }
  if (chart.dim() == 2) coords[2] = {0};
  std::vector<CellId> out;
  for (int c : coords[2])
    for (int b : coords[1])
      for (int a : coords[0]) out.push_back(chart.id({a, b, c}));
  return out;
}

}  // namespace detail

/// Boundedness proxy: every probe jset stays at least `margin` cells from the
/// non-wrapped chart faces and avoids recurrent cells. Probes are all pairs
/// from a fixed lattice plus the caller's pairs.
inline GH2Result gh2_check(const EnlargementSchedule& s, int margin,
                           const std::vector<std::pair<CellSet, CellSet>>& extra = {}) {
  if (margin < 1) throw Error(ErrorCode::InvalidArgument, "margin must be at least one cell");
  const CausalGraph& cg = s.finest();
  const Digraph& g = cg.graph;
  const GridChart& chart = *cg.chart;
  const CellSet rec = cycle_cells(g);
  GH2Result r;
  auto bounded = [&](const CellSet& j) {
    if (!(j & rec).empty()) return false;
    for (CellId c : j.cells())
      if (chart.boundary_distance(c) < margin) return false;
    return true;
  };
  auto record = [&](CellId a, CellId b, const CellSet& j) {
    ProbeSample p{a, b, bounded(j)};
    r.samples.push_back(p);
    if (!p.bounded && r.ok) {
      r.ok = false;
      r.witness = p;
      r.escaping = j;
    }
  };
  const std::vector<CellId> probes = detail::probe_cells(chart);
  std::vector<CellSet> fut, pst;
  for (CellId p : probes) {
    const CellSet one = CellSet::of(g.size(), {p});
    fut.push_back(closure(g, one));
    pst.push_back(closure(g, one, Direction::Backward));
  }
  for (std::size_t i = 0; i < probes.size(); ++i)
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const CellSet js = fut[i] & pst[j];
      if (js.empty()) continue;
      record(probes[i], probes[j], js);
    }
  for (const auto& [k, k2] : extra) {
    const CellSet js = jset(s, k, k2);
    if (js.empty()) continue;
    record(k.empty() ? 0 : k.cells().front(), k2.empty() ? 0 : k2.cells().front(), js);
  }
  return r;
}

struct SteepResult {
  std::optional<ScalarField> tau;  // absent when not causal
  CausalityResult causality;
  std::size_t violations = 0;
  bool ok() const { return tau.has_value(); }
};

/// tau(b) - tau(a) >= len(a, b) on every edge, by longest paths from the DAG
/// sources (anchored at 0).
inline SteepResult steep_temporal(const EnlargementSchedule& s) {
  SteepResult r;
  r.causality = causality_check(s);
  if (!r.causality.causal) return r;
  const CausalGraph& cg = s.finest();
  const Digraph& g = cg.graph;
  const auto order = topological_order(g);
  if (!order) throw std::logic_error("causal graph is not acyclic");
  ScalarField tau;
  tau.value.assign(g.size(), 0.0);
  tau.regular_cells = s.field().domain();
  for (CellId a : *order)
    for (CellId b : g.successors(a)) tau.value[b] = std::max(tau.value[b], tau.value[a] + cg.edge_length(a, b));
  const double tol = 1e-12 * cg.chart->scale();
  for (CellId a = 0; a < g.size(); ++a)
    for (CellId b : g.successors(a))
      if (tau.value[b] - tau.value[a] < cg.edge_length(a, b) - tol) ++r.violations;
  if (r.violations != 0) throw std::logic_error("steep temporal function violates an edge constraint");
  r.tau = std::move(tau);
  return r;
}

struct LengthBound {
  std::optional<double> length;  // absent means unbounded
  std::optional<std::vector<CellId>> cycle;
};

/// Longest metric path of the finest graph restricted to K.
inline LengthBound length_bound(const EnlargementSchedule& s, const CellSet& k) {
  const CausalGraph& cg = s.finest();
  const Digraph sub = cg.graph.restricted(k);
  LengthBound r;
  const auto order = topological_order(sub);
  if (!order) {
    r.cycle = shortest_cycle(sub, cycle_cells(sub));
    return r;
  }
  std::vector<double> best(sub.size(), 0.0);
  double top = 0.0;
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    for (CellId b : sub.successors(*it)) best[*it] = std::max(best[*it], best[b] + cg.edge_length(*it, b));
    if (k.contains(*it)) top = std::max(top, best[*it]);
  }
  r.length = top;
  return r;
}

struct FJResult {
  bool equal = false;
  bool stabilized = false;
  CellSet f_set, j_set, discrepancy;
};

/// Stable (level-intersected) diamond versus the finest-level diamond.
inline FJResult fj_identity_check(const EnlargementSchedule& s, const CellSet& k1, const CellSet& k2) {
  FJResult r;
  const StableFutureReport fwd = stable_future(s, k1, Direction::Forward);
  const StableFutureReport bwd = stable_future(s, k2, Direction::Backward);
  r.f_set = fwd.stable & bwd.stable;
  r.j_set = jset(s, k1, k2);
  r.discrepancy = r.f_set ^ r.j_set;
  r.equal = r.discrepancy.empty();
  r.stabilized = fwd.stabilized && bwd.stabilized;
  return r;
}

struct GHReport {
  bool gh0 = false;
  CausalityResult gh1;
  GH2Result gh2;
  std::optional<ScalarField> steep_tau;
};

inline GHReport gh_report(const EnlargementSchedule& s, int margin = 1) {
  GHReport r;
  r.gh0 = s.field().domain().count() == s.field().size();
  r.gh1 = causality_check(s);
  r.gh2 = gh2_check(s, margin);
  if (r.gh1.causal) r.steep_tau = steep_temporal(s).tau;
  return r;
}

}  // namespace conefield
