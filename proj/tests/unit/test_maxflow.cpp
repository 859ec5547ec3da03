#include <random>
#include <stdexcept>

#include "doctest.h"
#include "rfimlab/maxflow.hpp"

using namespace rfimlab;

namespace {

struct Graph {
  std::size_t n;
  std::vector<std::int64_t> src, snk;
  std::vector<std::vector<std::int64_t>> cap;  // cap[u][v]
};

Graph random_graph(std::mt19937_64& rng, std::size_t n) {
  Graph g{n, std::vector<std::int64_t>(n), std::vector<std::int64_t>(n),
          std::vector<std::vector<std::int64_t>>(n, std::vector<std::int64_t>(n, 0))};
  for (std::size_t v = 0; v < n; ++v) {
    g.src[v] = rng() % 3 == 0 ? static_cast<std::int64_t>(rng() % 6) : 0;
    g.snk[v] = rng() % 3 == 0 ? static_cast<std::int64_t>(rng() % 6) : 0;
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && rng() % 3 == 0) g.cap[u][v] = static_cast<std::int64_t>(rng() % 4);
  return g;
}

// Enumerates every source side; returns the min cut and the union of all
// optimal source sides (the largest one, since min cuts are closed under union).
std::pair<std::int64_t, std::vector<bool>> brute_min_cut(const Graph& g) {
  std::int64_t best = INT64_MAX;
  std::vector<bool> largest(g.n, false);
  for (std::uint32_t mask = 0; mask < (1u << g.n); ++mask) {
    std::int64_t cut = 0;
    for (std::size_t v = 0; v < g.n; ++v) {
      const bool in = (mask >> v) & 1u;
      cut += in ? g.snk[v] : g.src[v];
      if (!in) continue;
      for (std::size_t w = 0; w < g.n; ++w)
        if (!((mask >> w) & 1u)) cut += g.cap[v][w];
    }
    if (cut < best) {
      best = cut;
      largest.assign(g.n, false);
    }
    if (cut == best)
      for (std::size_t v = 0; v < g.n; ++v)
        if ((mask >> v) & 1u) largest[v] = true;
  }
  return {best, largest};
}

}  // namespace

TEST_SUITE("maxflow") {
  TEST_CASE("single arc chain") {
    MinCut c(2);
    c.add_terminal(0, 5, 0);
    c.add_edge(0, 1, 3, 0);
    c.add_terminal(1, 0, 4);
    CHECK(c.solve() == 3);
    CHECK(c.maximal_source_side() == std::vector<bool>{true, false});
  }

  TEST_CASE("ties resolve to the largest source side") {
    MinCut c(1);
    c.add_terminal(0, 2, 2);
    CHECK(c.solve() == 2);
    CHECK(c.maximal_source_side() == std::vector<bool>{true});
  }

  TEST_CASE("matches exhaustive cut enumeration") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + rng() % 9;
      const Graph g = random_graph(rng, n);
      MinCut c(n);
      for (std::size_t v = 0; v < n; ++v) c.add_terminal(v, g.src[v], g.snk[v]);
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
          if (g.cap[u][v] || g.cap[v][u]) c.add_edge(u, v, g.cap[u][v], g.cap[v][u]);
      const auto [value, side] = brute_min_cut(g);
      CHECK(c.solve() == value);
      CHECK(c.maximal_source_side() == side);
    }
  }

  TEST_CASE("misuse is reported") {
    MinCut c(2);
    CHECK_THROWS_AS(c.add_terminal(2, 1, 0), std::out_of_range);
    CHECK_THROWS_AS(c.add_edge(0, 1, -1, 0), std::invalid_argument);
    CHECK_THROWS_AS(c.maximal_source_side(), std::logic_error);
    c.solve();
    CHECK_THROWS_AS(c.solve(), std::logic_error);
  }
}
