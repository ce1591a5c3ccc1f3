#pragma once

// Recurrence, stable classes, complete Lyapunov layering, trapping domains,
// Sullivan sets, asymptotic stability and the semicontinuity probe.

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conefield/reach.hpp"

namespace conefield {

struct RecurrenceReport {
  std::vector<CellSet> per_level;  // coarsest first
  CellSet stabilized_set;          // finest level
  bool stabilized = false;         // last two levels agree
  std::vector<std::vector<CellId>> classes;
  std::vector<std::pair<std::size_t, std::size_t>> class_order;  // (i, j): class j reachable from class i
};

inline RecurrenceReport recurrent_set(const EnlargementSchedule& s) {
  RecurrenceReport r;
  for (const CausalGraph& g : s.levels) r.per_level.push_back(cycle_cells(g.graph));
  for (std::size_t k = 0; k + 1 < r.per_level.size(); ++k)
    if (!r.per_level[k + 1].is_subset_of(r.per_level[k]))
      throw std::logic_error("recurrent sets are not nested across levels");
  r.stabilized_set = r.per_level.back();
  r.stabilized = r.per_level.size() >= 2 && r.per_level.back() == r.per_level[r.per_level.size() - 2];

  const Digraph& g = s.finest().graph;
  const Components comp = strongly_connected(g);
  std::vector<std::size_t> class_of_comp(comp.count(), std::numeric_limits<std::size_t>::max());
  for (CellId c = 0; c < g.size(); ++c) {
    const std::size_t k = comp.of[c];
    if (!comp.nontrivial[k]) continue;
    if (class_of_comp[k] == std::numeric_limits<std::size_t>::max()) {
      class_of_comp[k] = r.classes.size();
      r.classes.emplace_back();
    }
    r.classes[class_of_comp[k]].push_back(c);
  }
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    CellSet src(g.size());
    for (CellId c : r.classes[i]) src.insert(c);
    const CellSet fut = reach(g, src);
    for (std::size_t j = 0; j < r.classes.size(); ++j)
      if (j != i && fut.contains(r.classes[j].front())) r.class_order.emplace_back(i, j);
  }
  return r;
}

struct ScalarField {
  std::vector<double> value;
  CellSet regular_cells;
};

namespace detail {

/// Layer of the condensation plus a small offset per recurrent component.
inline ScalarField layered_lyapunov(const Digraph& g, const CellSet& domain) {
  const Components comp = strongly_connected(g);
  const std::vector<std::size_t> layer = condensation_layers(g, comp);
  const double delta = 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(comp.count(), 1)));
  std::vector<std::size_t> class_id(comp.count(), 0);
  std::size_t next = 1;
  for (CellId c = 0; c < g.size(); ++c) {
    const std::size_t k = comp.of[c];
    if (comp.nontrivial[k] && class_id[k] == 0) class_id[k] = next++;
  }
  ScalarField tau;
  tau.value.resize(g.size());
  tau.regular_cells = CellSet(g.size());
  for (CellId c = 0; c < g.size(); ++c) {
    const std::size_t k = comp.of[c];
    tau.value[c] = static_cast<double>(layer[k]) + delta * static_cast<double>(class_id[k]);
    if (!comp.nontrivial[k] && domain.contains(c)) tau.regular_cells.insert(c);
  }
  return tau;
}

}  // namespace detail

/// Nondecreasing along every finest-level edge, strictly increasing between
/// components, distinct on distinct recurrent classes.
inline ScalarField complete_lyapunov(const EnlargementSchedule& s) {
  return detail::layered_lyapunov(s.finest().graph, s.field().domain());
}

struct TrapResult {
  bool trapping = false;
  std::optional<double> eps;                          // coarsest level without an escaping edge
  std::optional<std::pair<CellId, CellId>> witness;   // escaping edge at the finest level
};

inline std::optional<std::pair<CellId, CellId>> escaping_edge(const Digraph& g, const CellSet& a) {
  for (CellId u : a.cells())
    for (CellId v : g.successors(u))
      if (!a.contains(v)) return std::make_pair(u, v);
  return std::nullopt;
}

inline TrapResult trapping_domain_check(const EnlargementSchedule& s, const CellSet& a) {
  TrapResult r;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (!escaping_edge(s.levels[k].graph, a)) {
      r.trapping = true;
      r.eps = s.eps_list[k];
      return r;
    }
  r.witness = escaping_edge(s.finest().graph, a);
  return r;
}

struct SublevelResult {
  bool trapping = false;
  bool hypothesis = false;  // every edge meeting the level strictly increases f
  std::optional<std::pair<CellId, CellId>> witness;
};

/// {f > a} at one enlargement. The hypothesis asks every edge with an endpoint
/// at or below the level and one at or above it to increase f strictly; it
/// implies trapping, and that implication is enforced.
inline SublevelResult sublevel_trap(const ScalarField& f, double a, const CausalGraph& g) {
  if (f.value.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "scalar field does not match the graph");
  SublevelResult r;
  r.hypothesis = true;
  CellSet above(g.size());
  for (CellId c = 0; c < g.size(); ++c)
    if (f.value[c] > a) above.insert(c);
  for (CellId u = 0; u < g.size() && r.hypothesis; ++u)
    for (CellId v : g.successors(u)) {
      const double lo = std::min(f.value[u], f.value[v]), hi = std::max(f.value[u], f.value[v]);
      if (lo <= a && a <= hi && !(f.value[v] > f.value[u])) {
        r.hypothesis = false;
        break;
      }
    }
  r.witness = escaping_edge(g.graph, above);
  r.trapping = !r.witness;
  if (r.hypothesis && !r.trapping) throw std::logic_error("level hypothesis holds but {f > a} is not trapping");
  return r;
}

inline SublevelResult sublevel_trap(const ScalarField& f, double a, const ConeField& field, double eps,
                                    int neighbor_radius = 2) {
  return sublevel_trap(f, a, build_graph(field, eps, neighbor_radius));
}

struct SullivanResult {
  CellSet z;
  ScalarField tau;
};

/// Finest graph restricted to `fset`: Z holds the cells that are complete in
/// both directions inside `fset`; tau is the layered Lyapunov function there.
inline SullivanResult sullivan_regular_set(const EnlargementSchedule& s, const CellSet& fset) {
  const Digraph& g = s.finest().graph;
  const auto fwd = detail::completeness_map(g, fset, Direction::Forward);
  const auto bwd = detail::completeness_map(g, fset, Direction::Backward);
  SullivanResult r;
  r.z = CellSet(g.size());
  for (CellId c : fset.cells())
    if (fwd[c] != Completeness::Incomplete && bwd[c] != Completeness::Incomplete) r.z.insert(c);
  const CellSet dom = s.field().domain() & fset;
  r.tau = detail::layered_lyapunov(g.restricted(fset), dom);
  if (!(dom - r.z).is_subset_of(r.tau.regular_cells))
    throw std::logic_error("Lyapunov function is not regular off the complete set");
  return r;
}

struct ASReport {
  bool as1 = false, as2 = false, as3 = false, as4 = false;
  std::string as1_witness, as2_witness, as3_witness, as4_witness;
  CellSet basin;  // AS1 neighbourhood: cells of U whose causal future stays in U
  ScalarField tau;
  bool agree() const { return as1 == as2 && as2 == as3 && as3 == as4; }
};

namespace detail {

inline int chebyshev(const GridChart& chart, CellId a, CellId b) {
  const CellIndex ia = chart.index(a), ib = chart.index(b);
  int d = 0;
  for (int i = 0; i < chart.dim(); ++i) {
    int k = std::abs(ia[i] - ib[i]);
    if (chart.axis(i).wrap) k = std::min(k, chart.axis(i).cells - k);
    d = std::max(d, k);
  }
  return d;
}

inline int distance_to(const GridChart& chart, CellId c, const CellSet& y) {
  int best = std::numeric_limits<int>::max();
  for (CellId t : y.cells()) best = std::min(best, chebyshev(chart, c, t));
  return best;
}

inline std::string cell_name(const GridChart& chart, CellId c) {
  const CellIndex i = chart.index(c);
  std::string s = "(" + std::to_string(i[0]);
  for (int k = 1; k < chart.dim(); ++k) s += "," + std::to_string(i[k]);
  return s + ")";
}

}  // namespace detail

/// Discrete versions of four equivalent characterisations of an
/// asymptotically stable set Y with neighbourhood U, on the finest graph.
inline ASReport asymptotic_stability_check(const EnlargementSchedule& s, const CellSet& y, const CellSet& u) {
  if (y.empty()) throw Error(ErrorCode::InvalidArgument, "Y must be nonempty");
  if (!y.is_subset_of(u)) throw Error(ErrorCode::BadNesting, "Y is not contained in U");
  const CausalGraph& cg = s.finest();
  const Digraph& g = cg.graph;
  const GridChart& chart = *cg.chart;
  const CellSet rest = u - y;
  const CellSet fut_y = reach(g, y);
  const bool y_closed = fut_y.is_subset_of(y);
  ASReport r;

  // AS2: Y forward invariant, nothing in U - Y is backward complete inside U.
  {
    const auto bwd = detail::completeness_map(g, u, Direction::Backward);
    std::optional<CellId> bad;
    for (CellId c : rest.cells())
      if (bwd[c] != Completeness::Incomplete) {
        bad = c;
        break;
      }
    r.as2 = y_closed && !bad;
    if (!y_closed) r.as2_witness = "future of Y leaves Y at " + detail::cell_name(chart, (fut_y - y).cells().front());
    else if (bad) r.as2_witness = "backward complete cell " + detail::cell_name(chart, *bad) + " outside Y";
  }

  // AS3: stable future of Y inside Y, recurrence in U confined to Y.
  {
    const CellSet sf = stable_future(s, y).stable;
    const CellSet stray = (cycle_cells(g) & u) - y;
    r.as3 = sf.is_subset_of(y) && stray.empty();
    if (!sf.is_subset_of(y)) r.as3_witness = "stable future leaves Y at " + detail::cell_name(chart, (sf - y).cells().front());
    else if (!stray.empty()) r.as3_witness = "recurrent cell " + detail::cell_name(chart, stray.cells().front()) + " outside Y";
  }

  // AS4: tau = 0 on Y, negative and strictly increasing along edges on U - Y.
  {
    r.tau.value.assign(g.size(), 0.0);
    r.tau.regular_cells = CellSet(g.size());
    const Digraph sub = g.restricted(rest);
    const auto order = topological_order(sub);
    if (!y_closed) {
      r.as4_witness = "Y is not forward invariant";
    } else if (!order) {
      r.as4_witness = "U - Y carries a cycle";
    } else {
      std::vector<double> height(g.size(), 0.0);
      for (auto it = order->rbegin(); it != order->rend(); ++it) {
        if (!rest.contains(*it)) continue;
        for (CellId v : sub.successors(*it)) height[*it] = std::max(height[*it], height[v] + 1.0);
      }
      for (CellId c : rest.cells()) {
        r.tau.value[c] = -(1.0 + height[c]);
        r.tau.regular_cells.insert(c);
      }
      bool ok = true;
      for (CellId c : u.cells()) {
        if (r.tau.value[c] > 0.0 || (r.tau.value[c] == 0.0) != y.contains(c)) ok = false;
        if (!rest.contains(c)) continue;
        for (CellId v : g.successors(c))
          if (u.contains(v) && !(r.tau.value[v] > r.tau.value[c])) {
            ok = false;
            r.as4_witness = "tau does not increase on " + detail::cell_name(chart, c) + "->" + detail::cell_name(chart, v);
          }
      }
      r.as4 = ok;
    }
  }

  // AS1: the cells of U whose causal future stays in U form a neighbourhood
  // of Y, and every complete path from there ends within two cells of Y.
  {
    r.basin = CellSet(g.size());
    const CellSet outside = u.complement();
    const CellSet leaks = closure(g, outside, Direction::Backward);
    r.basin = u - leaks;
    const CellSet ends = (cycle_cells(g) & closure(g, r.basin));
    std::optional<CellId> far;
    for (CellId c : ends.cells())
      if (detail::distance_to(chart, c, y) > 2) {
        far = c;
        break;
      }
    r.as1 = y.is_subset_of(r.basin) && !far;
    if (!y.is_subset_of(r.basin)) r.as1_witness = "future of Y leaves U from " + detail::cell_name(chart, (y - r.basin).cells().front());
    else if (far) r.as1_witness = "complete path ends at " + detail::cell_name(chart, *far) + " away from Y";
  }
  return r;
}

/// Largest scheduled eps from which every finer level keeps its recurrent set
/// inside U. None when only the finest level qualifies and its recurrent set
/// has a neighbour outside U.
inline std::optional<double> semicontinuity_probe(const EnlargementSchedule& s, const CellSet& u) {
  const RecurrenceReport rec = recurrent_set(s);
  if (!rec.stabilized_set.is_subset_of(u))
    throw Error(ErrorCode::RecurrentSetEscapesU, "finest recurrent set is not contained in U");
  std::size_t k = s.size() - 1;
  while (k > 0 && rec.per_level[k - 1].is_subset_of(u)) --k;
  if (k + 1 < s.size()) return s.eps_list[k];
  // only the finest level fits: None when its recurrent set touches the edge of U
  const GridChart& chart = *s.finest().chart;
  const auto ring = stencil(chart.dim(), 1);
  for (CellId c : rec.stabilized_set.cells())
    for (const auto& off : ring) {
      const auto n = chart.shifted(c, off);
      if (n && !u.contains(*n)) return std::nullopt;
    }
  return s.eps_list[k];
}

}  // namespace conefield
