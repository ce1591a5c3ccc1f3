#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "conefield/causal.hpp"

namespace conefield {

/// Cells reachable from A by a nonempty path.
inline CellSet future(const CausalGraph& g, const CellSet& a) { return reach(g.graph, a, Direction::Forward); }

inline CellSet past(const CausalGraph& g, const CellSet& a) { return reach(g.graph, a, Direction::Backward); }

struct StableFutureReport {
  std::vector<CellSet> per_level;  // coarsest first
  CellSet stable;                  // A together with the intersection of all levels
  bool stabilized = false;         // last two levels agree
};

inline StableFutureReport stable_future(const EnlargementSchedule& s, const CellSet& a,
                                        Direction dir = Direction::Forward) {
  StableFutureReport r;
  CellSet meet = CellSet::all(a.universe());
  for (const CausalGraph& g : s.levels) {
    r.per_level.push_back(reach(g.graph, a, dir));
    meet = meet & r.per_level.back();
  }
  r.stable = a | meet;
  r.stabilized = r.per_level.size() >= 2 && r.per_level.back() == r.per_level[r.per_level.size() - 2];
  return r;
}

struct CellPath {
  std::vector<CellId> cells;
  bool closed = false;
  double length = 0.0;
};

/// Metric-shortest path (uniform-cost search). Ties go to the smaller cell id.
inline std::optional<CellPath> extract_path(const CausalGraph& g, CellId a, CellId b) {
  g.chart->check(a);
  g.chart->check(b);
  if (a == b) return CellPath{{a}, false, 0.0};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.size(), kInf);
  std::vector<CellId> parent(g.size(), a);
  std::vector<bool> done(g.size(), false);
  using Item = std::pair<double, CellId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[a] = 0.0;
  open.emplace(0.0, a);
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == b) break;
    for (CellId v : g.successors(u)) {
      const double nd = d + g.edge_length(u, v);
      if (nd < dist[v] || (nd == dist[v] && u < parent[v] && !done[v])) {
        dist[v] = nd;
        parent[v] = u;
        open.emplace(nd, v);
      }
    }
  }
  if (!done[b]) return std::nullopt;
  CellPath p;
  for (CellId c = b; c != a; c = parent[c]) p.cells.push_back(c);
  p.cells.push_back(a);
  std::reverse(p.cells.begin(), p.cells.end());
  p.length = dist[b];
  return p;
}

/// Sum of metric edge lengths along consecutive cells; throws if a step is not an edge.
inline double path_length(const CausalGraph& g, const std::vector<CellId>& cells) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const auto succ = g.successors(cells[i]);
    if (cells[i] == cells[i + 1]) {
      if (!g.graph.has_loop(cells[i])) throw Error(ErrorCode::InvalidArgument, "repeated cell without a loop");
      continue;
    }
    if (!std::binary_search(succ.begin(), succ.end(), cells[i + 1]))
      throw Error(ErrorCode::InvalidArgument, "consecutive path cells are not joined by an edge");
    len += g.edge_length(cells[i], cells[i + 1]);
  }
  return len;
}

enum class StopReason { TimeElapsed, LeftChart, LeftDomain };

struct ContinuousCurve {
  std::vector<Vec> points;
  std::vector<Vec> velocities;  // unit; velocities[k] moves points[k] to points[k+1]
  std::vector<CellId> cells;    // cell of points[k], for each velocity
  StopReason stop = StopReason::TimeElapsed;
};

namespace detail {

inline Vec wrap_point(const GridChart& chart, Vec p) {
  for (int i = 0; i < chart.dim(); ++i) {
    const Axis& ax = chart.axis(i);
    if (!ax.wrap) continue;
    const double w = ax.hi - ax.lo;
    p[i] = ax.lo + std::fmod(std::fmod(p[i] - ax.lo, w) + w, w);
  }
  return p;
}

}  // namespace detail

/// Explicit Euler flow of the selected interior direction of each cell.
inline ContinuousCurve integrate_timelike(const ConeField& f, const Vec& x0, double eps, double dt, double t_max) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "eps must be positive");
  if (!(dt > 0.0) || !(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt and T must be positive");
  const GridChart& chart = f.chart();
  const auto start = chart.locate(x0);
  if (!start || f.cone(*start).is_empty())
    throw Error(ErrorCode::StartsOutsideDomain, "start point " + to_string(x0) + " is not in the domain");
  ContinuousCurve curve;
  Vec x = detail::wrap_point(chart, x0);
  curve.points.push_back(x);
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    const auto c = chart.locate(x);
    if (!c) {
      curve.stop = StopReason::LeftChart;
      return curve;
    }
    if (f.cone(*c).is_empty()) {
      curve.stop = StopReason::LeftDomain;
      return curve;
    }
    const Vec v = select_vector(f, *c, eps);
    const double h = std::min(dt, t_max - dt * static_cast<double>(k));
    x = detail::wrap_point(chart, x + h * v);
    curve.velocities.push_back(v);
    curve.cells.push_back(*c);
    curve.points.push_back(x);
  }
  if (!chart.locate(x)) curve.stop = StopReason::LeftChart;
  return curve;
}

enum class Completeness { InfiniteLength, SingularLimit, Incomplete };

inline const char* to_string(Completeness c) {
  switch (c) {
    case Completeness::InfiniteLength: return "InfiniteLength";
    case Completeness::SingularLimit: return "SingularLimit";
    case Completeness::Incomplete: return "Incomplete";
  }
  return "?";
}

struct CompletenessTag {
  Completeness forward = Completeness::Incomplete;
  Completeness backward = Completeness::Incomplete;
};

namespace detail {

/// Per-cell classification of where paths inside `within` can end up:
/// a genuine cycle, a singular (loop) cell, or neither.
inline std::vector<Completeness> completeness_map(const Digraph& g, const CellSet& within, Direction dir) {
  const Digraph sub = g.restricted(within);
  const Digraph no_loops(sub.size(), sub.edges(), CellSet(sub.size()));
  const CellSet cyc = cycle_cells(no_loops) & within;
  const CellSet sing = sub.loops();
  const Direction back = dir == Direction::Forward ? Direction::Backward : Direction::Forward;
  const CellSet to_cycle = closure(sub, cyc, back) & within;
  const CellSet to_sing = closure(sub, sing, back) & within;
  std::vector<Completeness> out(g.size(), Completeness::Incomplete);
  for (CellId c = 0; c < g.size(); ++c) {
    if (to_cycle.contains(c)) out[c] = Completeness::InfiniteLength;
    else if (to_sing.contains(c)) out[c] = Completeness::SingularLimit;
  }
  return out;
}

}  // namespace detail

/// Forward: can the terminal cell reach a cycle (or else a singular cell)
/// without leaving `within`? Backward: the same for the first cell, against
/// the edges.
inline CompletenessTag completeness_check(const CausalGraph& g, const CellPath& path, const CellSet& within) {
  if (path.cells.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  for (CellId c : path.cells)
    if (!within.contains(c)) throw Error(ErrorCode::InvalidArgument, "path leaves the given cell set");
  CompletenessTag tag;
  tag.forward = detail::completeness_map(g.graph, within, Direction::Forward)[path.cells.back()];
  tag.backward = detail::completeness_map(g.graph, within, Direction::Backward)[path.cells.front()];
  return tag;
}

}  // namespace conefield
