#pragma once

#include <cstdint>
#include <vector>

#include "ngf/graph.hpp"
#include "ngf/types.hpp"

namespace ngf {

/// Hop-count matrix. kUnreachable marks pairs in different components.
using DistanceMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;
constexpr std::int32_t kUnreachable = -1;

/// Single-source hop distances on a prebuilt adjacency list; -1 = unreachable.
inline void bfs_from(const std::vector<std::vector<Index>>& adj, Index source,
                     std::vector<std::int32_t>& dist, std::vector<Index>& queue) {
  dist.assign(adj.size(), kUnreachable);
  queue.clear();
  dist[static_cast<std::size_t>(source)] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index u = queue[head];
    const std::int32_t du = dist[static_cast<std::size_t>(u)];
    for (Index v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] == kUnreachable) {
        dist[static_cast<std::size_t>(v)] = du + 1;
        queue.push_back(v);
      }
    }
  }
}

/// All-pairs hop distances by BFS from every node. Edge weights are ignored:
/// distances count hops on the binarized adjacency.
inline DistanceMatrix bfs_distances(const Graph& g) {
  const Index n = g.num_nodes();
  const auto adj = g.adjacency_list();
  DistanceMatrix d(n, n);
  std::vector<std::int32_t> row;
  std::vector<Index> queue;
  for (Index i = 0; i < n; ++i) {
    bfs_from(adj, i, row, queue);
    for (Index j = 0; j < n; ++j) d(i, j) = row[static_cast<std::size_t>(j)];
  }
  return d;
}

/// Component label per node, 0-based in order of discovery.
inline std::vector<Index> connected_components(const Graph& g) {
  const Index n = g.num_nodes();
  const auto adj = g.adjacency_list();
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  std::vector<Index> queue;
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] != -1) continue;
    label[static_cast<std::size_t>(s)] = next;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (Index v : adj[static_cast<std::size_t>(queue[head])]) {
        if (label[static_cast<std::size_t>(v)] == -1) {
          label[static_cast<std::size_t>(v)] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

inline Index component_count(const std::vector<Index>& labels) {
  Index maxl = -1;
  for (Index l : labels) maxl = std::max(maxl, l);
  return maxl + 1;
}

inline bool is_connected(const Graph& g) {
  if (g.num_nodes() <= 1) return true;
  return component_count(connected_components(g)) == 1;
}

/// Nodes of the largest connected component (ties broken by lowest label).
inline std::vector<Index> largest_component_nodes(const Graph& g) {
  const auto labels = connected_components(g);
  const Index k = component_count(labels);
  std::vector<Index> size(static_cast<std::size_t>(k), 0);
  for (Index l : labels) ++size[static_cast<std::size_t>(l)];
  Index best = 0;
  for (Index c = 1; c < k; ++c) {
    if (size[static_cast<std::size_t>(c)] > size[static_cast<std::size_t>(best)]) best = c;
  }
  std::vector<Index> nodes;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == best) nodes.push_back(i);
  }
  return nodes;
}

/// Induced subgraph on `nodes` (kept in the given order), with edge weights.
inline Graph induced_subgraph(const Graph& g, const std::vector<Index>& nodes) {
  std::vector<Index> remap(static_cast<std::size_t>(g.num_nodes()), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[static_cast<std::size_t>(nodes[i])] = static_cast<Index>(i);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    const Index u = remap[static_cast<std::size_t>(e.u)];
    const Index v = remap[static_cast<std::size_t>(e.v)];
    if (u != -1 && v != -1) edges.push_back(Edge{u, v, e.w});
  }
  return Graph::from_edges(static_cast<Index>(nodes.size()), std::move(edges));
}

}  // namespace ngf
