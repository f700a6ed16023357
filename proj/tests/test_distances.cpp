#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ngf/distances.hpp"
#include "ngf/generators.hpp"
#include "oracles.hpp"

using namespace ngf;

TEST_CASE("path graph distances") {
  const Graph path = Graph::from_edges(3, {{0, 1}, {1, 2}});
  const DistanceMatrix d = bfs_distances(path);
  CHECK(d(0, 2) == 2);
  CHECK(d(2, 0) == 2);
  CHECK(d(0, 1) == 1);
  CHECK(d(1, 1) == 0);
}

TEST_CASE("disconnected pairs carry the unreachable marker") {
  const Graph g(2);
  const DistanceMatrix d = bfs_distances(g);
  CHECK(d(0, 1) == kUnreachable);
  CHECK(d(0, 0) == 0);
}

TEST_CASE("bfs matches floyd-warshall on random graphs") {
  for (std::uint64_t s = 0; s < 25; ++s) {
    const Graph g = generate_er(16, 0.3, s);
    CHECK(bfs_distances(g) == oracles::floyd_warshall(g));
  }
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Graph g = generate_er(32, 0.08, 100 + s);  // sparse, often disconnected
    CHECK(bfs_distances(g) == oracles::floyd_warshall(g));
  }
}

TEST_CASE("distance matrix properties: symmetry, zero diagonal, triangle inequality") {
  const Graph g = generate_er(24, 0.15, 9);
  const DistanceMatrix d = bfs_distances(g);
  for (Index i = 0; i < 24; ++i) {
    CHECK(d(i, i) == 0);
    for (Index j = 0; j < 24; ++j) {
      CHECK(d(i, j) == d(j, i));
      for (Index k = 0; k < 24; ++k) {
        if (d(i, j) != kUnreachable && d(i, k) != kUnreachable && d(k, j) != kUnreachable) {
          CHECK(d(i, j) <= d(i, k) + d(k, j));
        }
      }
    }
  }
}

TEST_CASE("components and connectivity") {
  Graph g = Graph::from_edges(5, {{0, 1}, {2, 3}});
  const auto labels = connected_components(g);
  CHECK(component_count(labels) == 3);
  CHECK(labels[0] == labels[1]);
  CHECK(labels[2] == labels[3]);
  CHECK(labels[0] != labels[2]);
  CHECK_FALSE(is_connected(g));
  CHECK(is_connected(Graph::from_edges(2, {{0, 1}})));
  CHECK(is_connected(Graph(1)));

  const auto biggest = largest_component_nodes(g);
  CHECK(biggest.size() == 2);  // 0-1 discovered first among the size-2 ties
  CHECK(biggest[0] == 0);
}

TEST_CASE("small world C8 has diameter 4") {
  const Graph c8 = generate_small_world(8, 2, 0.0, 1);
  const DistanceMatrix d = bfs_distances(c8);
  CHECK(d.maxCoeff() == 4);
}

TEST_CASE("induced subgraph remaps indices and keeps weights") {
  Graph g = Graph::from_edges(5, {{0, 1, 2.0}, {1, 2}, {3, 4}});
  const Graph sub = induced_subgraph(g, {1, 2, 3});
  CHECK(sub.num_nodes() == 3);
  CHECK(sub.num_edges() == 1);
  CHECK(sub.has_edge(0, 1));  // old (1,2)
}
