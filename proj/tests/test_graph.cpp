#include <gtest/gtest.h>

#include <random>

#include "conefield/graph.hpp"

using namespace conefield;

namespace {

using Matrix = std::vector<std::vector<bool>>;

struct Random {
  Digraph g;
  Matrix adj;  // adj[a][b] for edges and loops
};

Random random_graph(std::mt19937& rng, std::size_t n, double p, double p_loop) {
  std::bernoulli_distribution edge(p), loop(p_loop);
  Random r;
  r.adj.assign(n, std::vector<bool>(n, false));
  std::vector<std::pair<CellId, CellId>> e;
  CellSet loops(n);
  for (CellId a = 0; a < n; ++a)
    for (CellId b = 0; b < n; ++b) {
      if (a == b) {
        if (loop(rng)) {
          loops.insert(a);
          r.adj[a][a] = true;
        }
      } else if (edge(rng)) {
        e.emplace_back(a, b);
        r.adj[a][b] = true;
      }
    }
  r.g = Digraph(n, e, loops);
  return r;
}

Matrix multiply(const Matrix& x, const Matrix& y) {
  const std::size_t n = x.size();
  Matrix z(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (x[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (y[k][j]) z[i][j] = true;
  return z;
}

// walks[k][a][b]: a walk of exactly k+1 steps from a to b
std::vector<Matrix> walks(const Matrix& adj, std::size_t max_len) {
  std::vector<Matrix> w{adj};
  while (w.size() < max_len) w.push_back(multiply(w.back(), adj));
  return w;
}

}  // namespace

TEST(Digraph, AccessorsAndTranspose) {
  const Digraph g(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, CellSet::of(4, {3}));
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(std::vector<CellId>(g.successors(0).begin(), g.successors(0).end()), (std::vector<CellId>{1, 2}));
  EXPECT_EQ(std::vector<CellId>(g.predecessors(3).begin(), g.predecessors(3).end()), (std::vector<CellId>{1, 2}));
  EXPECT_TRUE(g.has_loop(3));
  const Digraph t = g.transposed();
  EXPECT_EQ(std::vector<CellId>(t.successors(3).begin(), t.successors(3).end()), (std::vector<CellId>{1, 2}));
  EXPECT_TRUE(t.has_loop(3));
  EXPECT_EQ(t.transposed().edges(), g.edges());
  const Digraph r = g.restricted(CellSet::of(4, {0, 1, 3}));
  EXPECT_EQ(r.edges(), (std::vector<std::pair<CellId, CellId>>{{0, 1}, {1, 3}}));
}

TEST(Digraph, ReachExcludesSourcesUnlessRevisited) {
  const Digraph g(3, {{0, 1}, {1, 2}}, CellSet(3));
  EXPECT_EQ(reach(g, CellSet::of(3, {0})).cells(), (std::vector<CellId>{1, 2}));
  EXPECT_EQ(closure(g, CellSet::of(3, {0})).cells(), (std::vector<CellId>{0, 1, 2}));
  EXPECT_EQ(reach(g, CellSet::of(3, {2}), Direction::Backward).cells(), (std::vector<CellId>{0, 1}));
  EXPECT_TRUE(reach(g, CellSet(3)).empty());
  const Digraph l(2, {}, CellSet::of(2, {1}));
  EXPECT_EQ(reach(l, CellSet::of(2, {0, 1})).cells(), std::vector<CellId>{1});
}

TEST(Oracle, ReachMatchesWalkEnumeration) {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const Random r = random_graph(rng, 25, 0.02 + 0.003 * trial, 0.03);
    const auto w = walks(r.adj, 25);
    std::bernoulli_distribution pick(0.15);
    CellSet a(25);
    for (CellId c = 0; c < 25; ++c)
      if (pick(rng)) a.insert(c);
    CellSet fwd(25), bwd(25);
    for (const Matrix& m : w)
      for (CellId s : a.cells())
        for (CellId t = 0; t < 25; ++t) {
          if (m[s][t]) fwd.insert(t);
          if (m[t][s]) bwd.insert(t);
        }
    EXPECT_EQ(reach(r.g, a), fwd) << trial;
    EXPECT_EQ(reach(r.g, a, Direction::Backward), bwd) << trial;
  }
}

TEST(Oracle, CyclesAndComponents) {
  std::mt19937 rng(103);
  for (int trial = 0; trial < 60; ++trial) {
    const Random r = random_graph(rng, 25, 0.02 + 0.003 * trial, 0.04);
    const auto w = walks(r.adj, 25);
    Matrix conn(25, std::vector<bool>(25, false));
    for (const Matrix& m : w)
      for (CellId a = 0; a < 25; ++a)
        for (CellId b = 0; b < 25; ++b) conn[a][b] = conn[a][b] || m[a][b];
    CellSet on_cycle(25);
    for (CellId c = 0; c < 25; ++c)
      if (conn[c][c]) on_cycle.insert(c);
    const Components comp = strongly_connected(r.g);
    EXPECT_EQ(cycle_cells(r.g, comp), on_cycle) << trial;
    for (CellId a = 0; a < 25; ++a)
      for (CellId b = 0; b < 25; ++b) {
        const bool same = a == b || (conn[a][b] && conn[b][a]);
        EXPECT_EQ(comp.of[a] == comp.of[b], same);
      }
    // reverse topological ids: every cross-component edge goes to a smaller id
    for (const auto& [a, b] : r.g.edges())
      if (comp.of[a] != comp.of[b]) EXPECT_GT(comp.of[a], comp.of[b]);
    const auto layer = condensation_layers(r.g, comp);
    for (const auto& [a, b] : r.g.edges())
      if (comp.of[a] != comp.of[b]) EXPECT_LT(layer[comp.of[a]], layer[comp.of[b]]);

    // shortest cycle length equals the first k with a closed walk of length k
    if (!on_cycle.empty()) {
      const auto cyc = shortest_cycle(r.g, on_cycle);
      ASSERT_TRUE(cyc);
      std::size_t best = 0;
      for (std::size_t k = 0; k < w.size() && !best; ++k)
        for (CellId c = 0; c < 25; ++c)
          if (w[k][c][c]) best = k + 1;
      EXPECT_EQ(cyc->size() - 1, best);
      EXPECT_EQ(cyc->front(), cyc->back());
      for (std::size_t i = 0; i + 1 < cyc->size(); ++i) EXPECT_TRUE(r.adj[(*cyc)[i]][(*cyc)[i + 1]]);
      EXPECT_FALSE(topological_order(r.g));
    } else {
      EXPECT_FALSE(shortest_cycle(r.g, CellSet::all(25)));
      const auto order = topological_order(r.g);
      ASSERT_TRUE(order);
      std::vector<std::size_t> pos(25);
      for (std::size_t i = 0; i < order->size(); ++i) pos[(*order)[i]] = i;
      for (const auto& [a, b] : r.g.edges()) EXPECT_LT(pos[a], pos[b]);
    }
  }
}

TEST(Components, LoopMakesSingletonNontrivial) {
  const Digraph g(3, {{0, 1}}, CellSet::of(3, {2}));
  const Components c = strongly_connected(g);
  EXPECT_EQ(c.count(), 3u);
  EXPECT_EQ(cycle_cells(g, c).cells(), std::vector<CellId>{2});
  EXPECT_EQ(*shortest_cycle(g, CellSet::of(3, {2})), (std::vector<CellId>{2, 2}));
}
