#pragma once

// Discrete timelike relation: the graph induced on grid cells by an
// eps-enlarged cone field, and the nested schedule of such graphs.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conefield/field.hpp"
#include "conefield/graph.hpp"

namespace conefield {

/// Lattice offsets with Chebyshev norm in [1, radius], lexicographic.
inline std::vector<CellIndex> stencil(int dim, int radius) {
  std::vector<CellIndex> out;
  const int r = radius;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = (dim == 3 ? -r : 0); c <= (dim == 3 ? r : 0); ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        out.push_back({a, b, c});
      }
  return out;
}

struct CausalGraph {
  std::shared_ptr<const GridChart> chart;
  double eps = 0.0;
  int neighbor_radius = 2;
  std::vector<Cone> cones;  // enlarged cone per cell
  CellSet domain;
  Digraph graph;

  std::size_t size() const { return graph.size(); }
  std::span<const CellId> successors(CellId c) const { return graph.successors(c); }
  std::span<const CellId> predecessors(CellId c) const { return graph.predecessors(c); }

  /// Shortest lattice displacement from a to b (wrap-aware), if within the stencil.
  std::optional<Vec> displacement(CellId a, CellId b) const {
    const CellIndex ia = chart->index(a), ib = chart->index(b);
    CellIndex off{0, 0, 0};
    for (int i = 0; i < chart->dim(); ++i) {
      int d = ib[i] - ia[i];
      const Axis& ax = chart->axis(i);
      if (ax.wrap) {
        d = ((d % ax.cells) + ax.cells) % ax.cells;
        if (d > ax.cells / 2) d -= ax.cells;
      }
      if (std::abs(d) > neighbor_radius) return std::nullopt;
      off[i] = d;
    }
    return chart->displacement(off);
  }

  double edge_length(CellId a, CellId b) const {
    const auto d = displacement(a, b);
    if (!d) throw Error(ErrorCode::InvalidArgument, "cells are not stencil neighbours");
    return chart->edge_length(a, b, *d);
  }
};

namespace detail {

inline std::vector<Cone> enlarged_cones(const ConeField& f, double eps) {
  std::vector<Cone> out;
  out.reserve(f.size());
  for (const Cone& c : f.cones()) out.push_back(enlarge(c, eps));
  return out;
}

}  // namespace detail

/// Edge a->b for stencil neighbours when the centre-to-centre displacement is
/// strictly inside the enlarged cone at both a and b. Cells whose enlarged
/// cone is Full get a loop.
inline CausalGraph build_graph(const ConeField& f, double eps, int neighbor_radius = 2) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "eps must be positive");
  if (neighbor_radius < 1) throw Error(ErrorCode::InvalidArgument, "neighbor_radius must be at least 1");
  const GridChart& chart = f.chart();
  CausalGraph g;
  g.chart = f.chart_ptr();
  g.eps = eps;
  g.neighbor_radius = neighbor_radius;
  g.cones = detail::enlarged_cones(f, eps);
  g.domain = f.domain();

  const auto offsets = stencil(chart.dim(), neighbor_radius);
  std::vector<Vec> disp;
  disp.reserve(offsets.size());
  for (const auto& o : offsets) disp.push_back(chart.displacement(o));

  const std::size_t n = chart.cell_count();
  CellSet loops(n);
  std::vector<std::pair<CellId, CellId>> edges;
  std::vector<CellId> targets;
  for (CellId a = 0; a < n; ++a) {
    const Cone& ca = g.cones[a];
    if (ca.is_empty()) continue;
    if (ca.is_full()) loops.insert(a);
    targets.clear();
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const auto b = chart.shifted(a, offsets[k]);
      if (!b || *b == a) continue;
      if (!contains(ca, disp[k], true) || !contains(g.cones[*b], disp[k], true)) continue;
      targets.push_back(*b);
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (CellId b : targets) edges.emplace_back(a, b);
  }
  g.graph = Digraph(n, edges, std::move(loops));
  return g;
}

/// Nested enlargements eps0 > eps0*ratio > ... with one causal graph per level.
struct EnlargementSchedule {
  std::shared_ptr<const ConeField> base;
  std::vector<double> eps_list;
  int neighbor_radius = 2;
  std::vector<CausalGraph> levels;

  std::size_t size() const { return levels.size(); }
  const CausalGraph& finest() const { return levels.back(); }
  const CausalGraph& coarsest() const { return levels.front(); }
  const ConeField& field() const { return *base; }
};

inline EnlargementSchedule make_schedule(std::shared_ptr<const ConeField> f, int n, double eps0, double ratio,
                                         int neighbor_radius = 2) {
  if (!f) throw Error(ErrorCode::InvalidArgument, "null field");
  if (n < 2) throw Error(ErrorCode::BadScheduleParams, "need at least two levels");
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw Error(ErrorCode::BadScheduleParams, "eps0 must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::BadScheduleParams, "ratio must lie in (0, 1)");
  EnlargementSchedule s;
  s.base = f;
  s.neighbor_radius = neighbor_radius;
  for (int k = 0; k < n; ++k) s.eps_list.push_back(eps0 * std::pow(ratio, k));
  for (double eps : s.eps_list) s.levels.push_back(build_graph(*f, eps, neighbor_radius));
  for (std::size_t k = 0; k + 1 < s.levels.size(); ++k)
    for (CellId c = 0; c < f->size(); ++c) {
      if (!is_wider(s.levels[k].cones[c], s.levels[k + 1].cones[c]) ||
          !is_wider(s.levels[k + 1].cones[c], f->cone(c)))
        throw Error(ErrorCode::BadScheduleParams,
                    "enlargements not nested at cell " + std::to_string(c) + ", level " + std::to_string(k));
    }
  return s;
}

inline EnlargementSchedule make_schedule(const ConeField& f, int n, double eps0, double ratio,
                                         int neighbor_radius = 2) {
  return make_schedule(std::make_shared<const ConeField>(f), n, eps0, ratio, neighbor_radius);
}

/// Six levels, ratio 1/2, starting at twice the cell diameter.
inline EnlargementSchedule default_schedule(const ConeField& f, int neighbor_radius = 2) {
  return make_schedule(f, 6, 2.0 * f.chart().cell_diameter(), 0.5, neighbor_radius);
}

}  // namespace conefield
