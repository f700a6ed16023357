#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "ngf/graph.hpp"
#include "ngf/rng.hpp"
#include "ngf/types.hpp"

namespace ngf {

/// Erdos-Renyi G(n, p): each unordered pair drawn independently.
inline Graph generate_er(Index n, double p, std::uint64_t seed) {
  if (n < 1) throw ConfigError("generate_er: n must be >= 1");
  if (p < 0.0 || p > 1.0) throw ConfigError("generate_er: p must be in [0,1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) edges.push_back(Edge{i, j});
    }
  }
  return Graph::from_edges(n, std::move(edges));
}

struct SbmGraph {
  Graph graph;
  std::vector<int> labels;  // community id per node, contiguous blocks
};

/// Stochastic block model with equally-sized communities. Intra-community
/// pairs drawn with p_in, inter-community with p_out.
inline SbmGraph generate_sbm(Index n, Index communities, double p_in, double p_out,
                             std::uint64_t seed) {
  if (n < 1 || communities < 1) throw ConfigError("generate_sbm: need n, communities >= 1");
  if (n % communities != 0) {
    throw ConfigError("generate_sbm: n=" + std::to_string(n) +
                      " not divisible by communities=" + std::to_string(communities));
  }
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
    throw ConfigError("generate_sbm: probabilities must be in [0,1]");
  }
  const Index block = n / communities;
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i / block);

  Rng rng(seed);
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                           ? p_in
                           : p_out;
      if (rng.bernoulli(p)) edges.push_back(Edge{i, j});
    }
  }
  return SbmGraph{Graph::from_edges(n, std::move(edges)), std::move(labels)};
}

/// Watts-Strogatz small world: ring lattice with k_ring nearest neighbours,
/// then each lattice edge rewired with probability beta to a uniform target,
/// skipping self-loops and duplicates. Rewiring moves edges, never adds them,
/// so the edge count stays n * k_ring / 2.
inline Graph generate_small_world(Index n, Index k_ring, double beta, std::uint64_t seed) {
  if (k_ring % 2 != 0) throw ConfigError("generate_small_world: k_ring must be even");
  if (k_ring < 0 || k_ring >= n) throw ConfigError("generate_small_world: need 0 <= k_ring < n");
  if (beta < 0.0 || beta > 1.0) throw ConfigError("generate_small_world: beta must be in [0,1]");

  std::vector<std::unordered_set<Index>> adj(static_cast<std::size_t>(n));
  auto connect = [&](Index a, Index b) {
    adj[static_cast<std::size_t>(a)].insert(b);
    adj[static_cast<std::size_t>(b)].insert(a);
  };
  auto disconnect = [&](Index a, Index b) {
    adj[static_cast<std::size_t>(a)].erase(b);
    adj[static_cast<std::size_t>(b)].erase(a);
  };

  for (Index i = 0; i < n; ++i) {
    for (Index off = 1; off <= k_ring / 2; ++off) connect(i, (i + off) % n);
  }

  Rng rng(seed);
  for (Index i = 0; i < n; ++i) {
    for (Index off = 1; off <= k_ring / 2; ++off) {
      const Index j = (i + off) % n;
      if (!adj[static_cast<std::size_t>(i)].contains(j)) continue;  // already rewired away
      if (!rng.bernoulli(beta)) continue;
      if (static_cast<Index>(adj[static_cast<std::size_t>(i)].size()) >= n - 1) continue;
      Index target;
      do {
        target = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n)));
      } while (target == i || adj[static_cast<std::size_t>(i)].contains(target));
      disconnect(i, j);
      connect(i, target);
    }
  }

  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j : adj[static_cast<std::size_t>(i)]) {
      if (i < j) edges.push_back(Edge{i, j});
    }
  }
  return Graph::from_edges(n, std::move(edges));
}

namespace detail {

inline Index round_half_up(double x) { return static_cast<Index>(std::floor(x + 0.5)); }

}  // namespace detail

/// Topology perturbation: removes round(destroy_pct * |E|) existing edges and
/// adds round(create_pct * |E|) of the original graph's non-edges, both
/// sampled uniformly without replacement. Counts are relative to the original
/// edge set, so equal rates preserve the edge count.
inline Graph perturb(const Graph& g, double create_pct, double destroy_pct,
                     std::uint64_t seed) {
  if (create_pct < 0.0 || create_pct > 1.0 || destroy_pct < 0.0 || destroy_pct > 1.0) {
    throw ConfigError("perturb: percentages must be in [0,1]");
  }
  const Index n = g.num_nodes();
  const Index m = g.num_edges();
  const Index destroy_count = detail::round_half_up(destroy_pct * static_cast<double>(m));
  const Index create_count = detail::round_half_up(create_pct * static_cast<double>(m));
  if (destroy_count == 0 && create_count == 0) return g;

  const Index possible = n * (n - 1) / 2;
  const Index available = possible - m;
  if (create_count > available) {
    throw ConfigError("perturb: cannot add " + std::to_string(create_count) +
                      " edges, only " + std::to_string(available) + " non-edges available");
  }

  Rng rng(seed);

  // Removals: partial Fisher-Yates over edge indices.
  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < destroy_count; ++i) {
    const Index j = i + static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(m - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<bool> removed(static_cast<std::size_t>(m), false);
  for (Index i = 0; i < destroy_count; ++i) removed[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m - destroy_count + create_count));
  for (Index i = 0; i < m; ++i) {
    if (!removed[static_cast<std::size_t>(i)]) edges.push_back(g.edges()[static_cast<std::size_t>(i)]);
  }

  // Additions come from the original graph's non-edges, so a removed edge
  // cannot be re-created within the same call. Rejection sampling is fine at
  // low density; near-complete graphs enumerate instead.
  if (create_count > 0) {
    const bool enumerate = available < 2 * create_count || m * 2 > possible;
    if (enumerate) {
      std::vector<Edge> non_edges;
      non_edges.reserve(static_cast<std::size_t>(available));
      for (Index u = 0; u < n; ++u) {
        for (Index v = u + 1; v < n; ++v) {
          if (!g.has_edge(u, v)) non_edges.push_back(Edge{u, v});
        }
      }
      for (Index i = 0; i < create_count; ++i) {
        const Index j = i + static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(available - i)));
        std::swap(non_edges[static_cast<std::size_t>(i)], non_edges[static_cast<std::size_t>(j)]);
        edges.push_back(non_edges[static_cast<std::size_t>(i)]);
      }
    } else {
      std::unordered_set<std::uint64_t> chosen;
      Index added = 0;
      while (added < create_count) {
        const Index u = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n)));
        const Index v = static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n)));
        if (u == v || g.has_edge(u, v)) continue;
        const Index a = std::min(u, v), b = std::max(u, v);
        const std::uint64_t key = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) +
                                  static_cast<std::uint64_t>(b);
        if (!chosen.insert(key).second) continue;
        edges.push_back(Edge{a, b});
        ++added;
      }
    }
  }
  return Graph::from_edges(n, std::move(edges));
}

}  // namespace ngf
