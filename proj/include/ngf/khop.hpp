#pragma once

#include <vector>

#include "ngf/bit_matrix.hpp"
#include "ngf/distances.hpp"
#include "ngf/graph.hpp"
#include "ngf/types.hpp"

namespace ngf {

/// The ordered family of hop-adjacency matrices: mats[k](i,j) = 1 iff the
/// hop distance between i and j is exactly k. mats[0] is the identity,
/// mats[1] the binarized adjacency, and every mats[k] with k > diameter is
/// the zero matrix. Each (i,j) pair is set in at most one k, so within a
/// connected component the stack sums to the all-ones pattern.
struct KHopStack {
  std::vector<BitMatrix> mats;
  Index diameter = 0;              // longest finite hop distance
  std::vector<Index> components;   // component id per node

  Index n() const { return mats.empty() ? 0 : mats.front().rows(); }
  Index k_max() const { return static_cast<Index>(mats.size()) - 1; }
};

/// Builds mats[0..k_max] with per-row BFS; the full distance matrix is never
/// materialized, so memory stays at (k_max+1) * n^2 bits.
inline KHopStack khop_stack(const Graph& g, Index k_max) {
  if (k_max < 0) throw ConfigError("khop_stack: k_max must be >= 0");
  const Index n = g.num_nodes();
  const auto adj = g.adjacency_list();

  KHopStack stack;
  stack.mats.reserve(static_cast<std::size_t>(k_max) + 1);
  for (Index k = 0; k <= k_max; ++k) stack.mats.emplace_back(n, n);
  stack.components.assign(static_cast<std::size_t>(n), -1);

  std::vector<std::int32_t> dist;
  std::vector<Index> queue;
  Index next_component = 0;
  for (Index i = 0; i < n; ++i) {
    bfs_from(adj, i, dist, queue);
    if (stack.components[static_cast<std::size_t>(i)] == -1) {
      const Index c = next_component++;
      for (Index j : queue) stack.components[static_cast<std::size_t>(j)] = c;
    }
    for (Index j = 0; j < n; ++j) {
      const std::int32_t d = dist[static_cast<std::size_t>(j)];
      if (d == kUnreachable) continue;
      if (d > stack.diameter) stack.diameter = d;
      if (d <= k_max) stack.mats[static_cast<std::size_t>(d)].set(i, j);
    }
  }
  return stack;
}

/// Stack covering every hop shell: k_max = diameter.
inline KHopStack khop_stack_full(const Graph& g) {
  // Two passes: a cheap diameter probe, then the sized build.
  const auto adj = g.adjacency_list();
  std::vector<std::int32_t> dist;
  std::vector<Index> queue;
  Index diameter = 0;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    bfs_from(adj, i, dist, queue);
    for (std::int32_t d : dist) {
      if (d != kUnreachable && d > diameter) diameter = d;
    }
  }
  return khop_stack(g, diameter);
}

}  // namespace ngf
