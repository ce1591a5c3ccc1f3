#pragma once

// Directed graphs on grid cells and the generic algorithms used by the
// reachability, recurrence and Lyapunov code: traversal, strongly connected
// components, condensation layering, shortest cycles.

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "conefield/chart.hpp"

namespace conefield {

/// Compressed adjacency in both directions. Self-edges are not stored as
/// edges; a cell whose enlarged cone is the whole tangent space carries a
/// loop flag instead (a closed timelike curve inside the cell).
class Digraph {
 public:
  Digraph() = default;

  /// `edges` must be sorted by (source, target) and free of duplicates and self-edges.
  Digraph(std::size_t n, const std::vector<std::pair<CellId, CellId>>& edges, CellSet loops)
      : n_(n), loops_(std::move(loops)) {
    out_start_.assign(n + 1, 0);
    in_start_.assign(n + 1, 0);
    for (const auto& [a, b] : edges) {
      ++out_start_[a + 1];
      ++in_start_[b + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      out_start_[i + 1] += out_start_[i];
      in_start_[i + 1] += in_start_[i];
    }
    out_.resize(edges.size());
    in_.resize(edges.size());
    std::vector<std::size_t> fill_in(in_start_.begin(), in_start_.end() - 1);
    std::size_t k = 0;
    for (const auto& [a, b] : edges) {
      out_[k++] = b;
      in_[fill_in[b]++] = a;
    }
    if (loops_.universe() != n) loops_ = CellSet(n);
  }

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return out_.size(); }
  std::span<const CellId> successors(CellId c) const {
    return {out_.data() + out_start_[c], out_start_[c + 1] - out_start_[c]};
  }
  std::span<const CellId> predecessors(CellId c) const {
    return {in_.data() + in_start_[c], in_start_[c + 1] - in_start_[c]};
  }
  /// Index of the first out-edge of c in edge order.
  std::size_t edge_begin(CellId c) const { return out_start_[c]; }
  bool has_loop(CellId c) const { return loops_.contains(c); }
  const CellSet& loops() const { return loops_; }

  std::vector<std::pair<CellId, CellId>> edges() const {
    std::vector<std::pair<CellId, CellId>> e;
    e.reserve(out_.size());
    for (CellId a = 0; a < n_; ++a)
      for (CellId b : successors(a)) e.emplace_back(a, b);
    return e;
  }

  Digraph transposed() const {
    std::vector<std::pair<CellId, CellId>> e;
    e.reserve(out_.size());
    for (CellId a = 0; a < n_; ++a)
      for (CellId b : successors(a)) e.emplace_back(b, a);
    std::sort(e.begin(), e.end());
    return Digraph(n_, e, loops_);
  }

  /// Subgraph on `keep`: edges with both ends kept, loops on kept cells.
  Digraph restricted(const CellSet& keep) const {
    std::vector<std::pair<CellId, CellId>> e;
    for (CellId a = 0; a < n_; ++a) {
      if (!keep.contains(a)) continue;
      for (CellId b : successors(a))
        if (keep.contains(b)) e.emplace_back(a, b);
    }
    return Digraph(n_, e, loops_ & keep);
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> out_start_{0}, in_start_{0};
  std::vector<CellId> out_, in_;
  CellSet loops_;
};

enum class Direction { Forward, Backward };

/// Cells reachable from `sources` by a nonempty path (a loop counts as a path
/// of length one). Sources are included only when they are reached again.
inline CellSet reach(const Digraph& g, const CellSet& sources, Direction dir = Direction::Forward) {
  CellSet seen(g.size());
  std::deque<CellId> queue;
  auto next = [&](CellId c) { return dir == Direction::Forward ? g.successors(c) : g.predecessors(c); };
  for (CellId s : sources.cells()) {
    if (g.has_loop(s) && !seen.contains(s)) {
      seen.insert(s);
      queue.push_back(s);
    }
    for (CellId t : next(s))
      if (!seen.contains(t)) {
        seen.insert(t);
        queue.push_back(t);
      }
  }
  while (!queue.empty()) {
    const CellId c = queue.front();
    queue.pop_front();
    for (CellId t : next(c))
      if (!seen.contains(t)) {
        seen.insert(t);
        queue.push_back(t);
      }
  }
  return seen;
}

/// `sources` together with everything reachable from them.
inline CellSet closure(const Digraph& g, const CellSet& sources, Direction dir = Direction::Forward) {
  return sources | reach(g, sources, dir);
}

struct Components {
  std::vector<std::size_t> of;       // component id per cell
  std::vector<std::size_t> size;     // cells per component
  std::vector<bool> nontrivial;      // carries a cycle (size >= 2 or a loop)
  std::size_t count() const { return size.size(); }
};

/// Tarjan's algorithm, iterative. Component ids come out in reverse
/// topological order of the condensation (sinks first).
inline Components strongly_connected(const Digraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<CellId> stack;
  Components comp;
  comp.of.assign(n, kUnset);
  std::size_t counter = 0;
  struct Frame {
    CellId v;
    std::size_t next;
  };
  std::vector<Frame> call;
  for (CellId root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto succ = g.successors(f.v);
      if (f.next < succ.size()) {
        const CellId w = succ[f.next++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const CellId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        const std::size_t id = comp.size.size();
        std::size_t sz = 0;
        bool loop = false;
        CellId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.of[w] = id;
          ++sz;
          loop = loop || g.has_loop(w);
        } while (w != v);
        comp.size.push_back(sz);
        comp.nontrivial.push_back(sz >= 2 || loop);
      }
    }
  }
  return comp;
}

/// Cells lying on a cycle (including loop cells).
inline CellSet cycle_cells(const Digraph& g, const Components& comp) {
  CellSet s(g.size());
  for (CellId c = 0; c < g.size(); ++c)
    if (comp.nontrivial[comp.of[c]]) s.insert(c);
  return s;
}

inline CellSet cycle_cells(const Digraph& g) { return cycle_cells(g, strongly_connected(g)); }

/// Longest-path layer of each component in the condensation DAG (sources at 0).
inline std::vector<std::size_t> condensation_layers(const Digraph& g, const Components& comp) {
  std::vector<std::vector<std::size_t>> members(comp.count());
  for (CellId c = 0; c < g.size(); ++c) members[comp.of[c]].push_back(c);
  std::vector<std::size_t> layer(comp.count(), 0);
  // Tarjan ids are reverse-topological, so walk from the highest id down.
  for (std::size_t k = comp.count(); k-- > 0;)
    for (CellId a : members[k])
      for (CellId b : g.successors(a)) {
        const std::size_t kb = comp.of[b];
        if (kb != k) layer[kb] = std::max(layer[kb], layer[k] + 1);
      }
  return layer;
}

/// Cells in topological order, if the graph (loops included) is acyclic.
inline std::optional<std::vector<CellId>> topological_order(const Digraph& g) {
  std::vector<std::size_t> indeg(g.size(), 0);
  for (CellId a = 0; a < g.size(); ++a) {
    if (g.has_loop(a)) return std::nullopt;
    for (CellId b : g.successors(a)) ++indeg[b];
  }
  std::vector<CellId> order;
  order.reserve(g.size());
  std::deque<CellId> ready;
  for (CellId a = 0; a < g.size(); ++a)
    if (indeg[a] == 0) ready.push_back(a);
  while (!ready.empty()) {
    const CellId a = ready.front();
    ready.pop_front();
    order.push_back(a);
    for (CellId b : g.successors(a))
      if (--indeg[b] == 0) ready.push_back(b);
  }
  if (order.size() != g.size()) return std::nullopt;
  return order;
}

/// Shortest closed walk (by edge count) among the given candidate cells, as
/// a cell sequence whose first and last entries coincide.
inline std::optional<std::vector<CellId>> shortest_cycle(const Digraph& g, const CellSet& candidates) {
  std::optional<std::vector<CellId>> best;
  for (CellId s : candidates.cells()) {
    if (g.has_loop(s)) return std::vector<CellId>{s, s};
  }
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.size(), kUnset);
  std::vector<CellId> parent(g.size(), 0);
  std::vector<CellId> touched;
  for (CellId s : candidates.cells()) {
    for (CellId t : touched) dist[t] = kUnset;
    touched.clear();
    std::deque<CellId> q{s};
    dist[s] = 0;
    touched.push_back(s);
    std::optional<CellId> closing;
    while (!q.empty() && !closing) {
      const CellId a = q.front();
      q.pop_front();
      if (best && dist[a] + 1 >= best->size() - 1) break;
      for (CellId b : g.successors(a)) {
        if (b == s) {
          closing = a;
          break;
        }
        if (dist[b] == kUnset) {
          dist[b] = dist[a] + 1;
          parent[b] = a;
          touched.push_back(b);
          q.push_back(b);
        }
      }
    }
    if (!closing) continue;
    std::vector<CellId> path{s};
    for (CellId c = *closing; c != s; c = parent[c]) path.push_back(c);
    path.push_back(s);
    std::reverse(path.begin() + 1, path.end() - 1);
    if (!best || path.size() < best->size()) best = std::move(path);
  }
  return best;
}

}  // namespace conefield
