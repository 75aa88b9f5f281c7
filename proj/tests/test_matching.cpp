#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/max_cardinality_matching.hpp>

#include "dynmatch/matching.hpp"
#include "dynmatch/rng.hpp"

using namespace dynmatch;

namespace {

using Graph = std::vector<std::vector<int>>;

Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Graph g(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    g[static_cast<std::size_t>(a)].push_back(b);
    g[static_cast<std::size_t>(b)].push_back(a);
  }
  return g;
}

// Exhaustive maximum matching over vertex subsets (memoized on the bitmask of
// still-available vertices).
int brute_force_max_matching(const Graph& g) {
  const int n = static_cast<int>(g.size());
  std::vector<int> memo(std::size_t{1} << n, -1);
  std::function<int(unsigned)> best = [&](unsigned avail) -> int {
    if (avail == 0) return 0;
    int& slot = memo[avail];
    if (slot >= 0) return slot;
    const int v = __builtin_ctz(avail);
    const unsigned rest = avail & ~(1u << v);
    int r = best(rest);  // v stays unmatched
    for (int u : g[static_cast<std::size_t>(v)])
      if (rest & (1u << u)) r = std::max(r, 1 + best(rest & ~(1u << u)));
    return slot = r;
  };
  return best((n == 32 ? 0u : (1u << n)) - 1u);
}

void check_valid(const Graph& g, const std::vector<int>& mate) {
  REQUIRE(mate.size() == g.size());
  for (std::size_t v = 0; v < mate.size(); ++v) {
    if (mate[v] < 0) continue;
    const auto u = static_cast<std::size_t>(mate[v]);
    REQUIRE(mate[u] == static_cast<int>(v));
    const auto& nb = g[v];
    REQUIRE(std::find(nb.begin(), nb.end(), static_cast<int>(u)) != nb.end());
  }
}

Graph random_graph(Rng& rng, int n, double p) {
  Graph g(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (rng.uniform() < p) {
        g[static_cast<std::size_t>(a)].push_back(b);
        g[static_cast<std::size_t>(b)].push_back(a);
      }
  return g;
}

}  // namespace

TEST_CASE("blossom matches exhaustive enumeration on 500 small random graphs") {
  Rng rng(777);
  for (int inst = 0; inst < 500; ++inst) {
    const int n = 1 + static_cast<int>(rng.index(12));
    const double p = 0.1 + 0.8 * rng.uniform();
    const Graph g = random_graph(rng, n, p);
    const auto mate = maximum_matching(g);
    check_valid(g, mate);
    REQUIRE(matching_size(mate) == brute_force_max_matching(g));
  }
}

TEST_CASE("odd cycles need blossom contraction") {
  // Triangle with a pendant on each corner: perfect matching of size 3.
  const Graph g = from_edges(6, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 4}, {2, 5}});
  CHECK(matching_size(maximum_matching(g)) == 3);
  // Two pentagons joined by an edge.
  const Graph h = from_edges(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}, {0, 5}});
  CHECK(matching_size(maximum_matching(h)) == 5);
}

TEST_CASE("path of four: matching the middle pair is not maximum") {
  // a1 - a2 - a3 - a4
  const Graph g = from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto mate = maximum_matching(g);
  CHECK(matching_size(mate) == 2);
  CHECK(mate[0] == 1);
  CHECK(mate[2] == 3);
}

TEST_CASE("two sellers, two buyers") {
  // s1=0, b1=1, s2=2, b2=3; edges s1-b1, s2-b1, s1-b2.
  const Graph g = from_edges(4, {{0, 1}, {2, 1}, {0, 3}});
  const auto mate = maximum_matching(g);
  CHECK(matching_size(mate) == 2);
  CHECK(mate[0] == 3);
  CHECK(mate[2] == 1);
}

TEST_CASE("degenerate inputs") {
  CHECK(maximum_matching({}).empty());
  CHECK(matching_size(maximum_matching(Graph(5))) == 0);
  Graph loop(2);
  loop[0].push_back(0);
  CHECK(matching_size(maximum_matching(loop)) == 0);
}

TEST_CASE("blossom agrees with Boost's Edmonds on medium random graphs") {
  using BGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
  Rng rng(99);
  for (int inst = 0; inst < 30; ++inst) {
    const int n = 50 + static_cast<int>(rng.index(400));
    const double p = (1.0 + 6.0 * rng.uniform()) / n;
    const Graph g = random_graph(rng, n, p);
    BGraph bg(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
      for (int b : g[static_cast<std::size_t>(a)])
        if (a < b) boost::add_edge(static_cast<std::size_t>(a), static_cast<std::size_t>(b), bg);
    std::vector<boost::graph_traits<BGraph>::vertex_descriptor> bmate(static_cast<std::size_t>(n));
    boost::edmonds_maximum_cardinality_matching(bg, &bmate[0]);
    const auto ours = maximum_matching(g);
    check_valid(g, ours);
    CHECK(matching_size(ours) == static_cast<int>(boost::matching_size(bg, &bmate[0])));
  }
}
