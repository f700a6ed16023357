#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ngf/types.hpp"

namespace ngf {

/// One undirected edge, stored canonically with u < v.
struct Edge {
  Index u = 0;
  Index v = 0;
  double w = 1.0;

  friend bool operator<(const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  }
  friend bool operator==(const Edge& a, const Edge& b) {
    return a.u == b.u && a.v == b.v && a.w == b.w;
  }
};

/// Simple undirected graph: no self-loops, no duplicate edges, indices in
/// [0, n). Edges are kept sorted so lookups are binary searches and writers
/// emit a canonical order.
class Graph {
 public:
  Graph() = default;
  explicit Graph(Index n) : n_(n) {
    if (n < 0) throw ConfigError("graph node count must be non-negative");
  }

  static Graph from_edges(Index n, std::vector<Edge> edges) {
    Graph g(n);
    for (Edge& e : edges) {
      validate_pair(n, e.u, e.v);
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
        throw ConfigError("duplicate edge (" + std::to_string(edges[i].u) + "," +
                          std::to_string(edges[i].v) + ")");
      }
    }
    g.edges_ = std::move(edges);
    return g;
  }

  Index num_nodes() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(Index u, Index v) const {
    if (u > v) std::swap(u, v);
    const Edge probe{u, v, 0.0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), probe);
    return it != edges_.end() && it->u == u && it->v == v;
  }

  void add_edge(Index u, Index v, double w = 1.0) {
    validate_pair(n_, u, v);
    if (u > v) std::swap(u, v);
    const Edge e{u, v, w};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it != edges_.end() && it->u == u && it->v == v) {
      throw ConfigError("duplicate edge (" + std::to_string(u) + "," +
                        std::to_string(v) + ")");
    }
    edges_.insert(it, e);
  }

  void remove_edge(Index u, Index v) {
    if (u > v) std::swap(u, v);
    const Edge probe{u, v, 0.0};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), probe);
    if (it == edges_.end() || it->u != u || it->v != v) {
      throw ConfigError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") not present");
    }
    edges_.erase(it);
  }

  std::vector<std::vector<Index>> adjacency_list() const {
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n_));
    for (const Edge& e : edges_) {
      adj[static_cast<std::size_t>(e.u)].push_back(e.v);
      adj[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    return adj;
  }

  /// Dense adjacency. `binary` drops edge weights (hop semantics); otherwise
  /// the stored weights are used.
  Matrix adjacency_matrix(bool binary = false) const {
    Matrix a = Matrix::Zero(n_, n_);
    for (const Edge& e : edges_) {
      const double w = binary ? 1.0 : e.w;
      a(e.u, e.v) = w;
      a(e.v, e.u) = w;
    }
    return a;
  }

  std::vector<Index> degrees() const {
    std::vector<Index> deg(static_cast<std::size_t>(n_), 0);
    for (const Edge& e : edges_) {
      ++deg[static_cast<std::size_t>(e.u)];
      ++deg[static_cast<std::size_t>(e.v)];
    }
    return deg;
  }

  bool is_weighted() const {
    for (const Edge& e : edges_) {
      if (e.w != 1.0) return true;
    }
    return false;
  }

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  static void validate_pair(Index n, Index u, Index v) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw ConfigError("edge endpoint out of range [0," + std::to_string(n) +
                        "): (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    if (u == v) throw ConfigError("self-loop at node " + std::to_string(u));
  }

  Index n_ = 0;
  std::vector<Edge> edges_;  // sorted, canonical u < v
};

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Edge-list text format: one "u v [weight]" per line, 0-based, '#' comments.
/// The writer leads with "# nodes N" so isolated trailing nodes survive a
/// round trip; readers without that line fall back to max index + 1.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  out << "# nodes " << g.num_nodes() << "\n";
  const bool weighted = g.is_weighted();
  for (const Edge& e : g.edges()) {
    out << e.u << " " << e.v;
    if (weighted) out << " " << detail::format_double(e.w);
    out << "\n";
  }
}

inline Graph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  Index declared_n = -1;
  Index max_index = -1;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') {
      std::istringstream comment(line.substr(start + 1));
      std::string tag;
      long long n = 0;
      if (comment >> tag >> n && tag == "nodes") declared_n = static_cast<Index>(n);
      continue;
    }
    std::istringstream fields(line);
    long long u = 0, v = 0;
    double w = 1.0;
    if (!(fields >> u >> v)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected 'u v [weight]', got '" + line + "'");
    }
    fields >> w;
    edges.push_back(Edge{static_cast<Index>(u), static_cast<Index>(v), w});
    max_index = std::max({max_index, static_cast<Index>(u), static_cast<Index>(v)});
  }
  const Index n = declared_n >= 0 ? declared_n : max_index + 1;
  return Graph::from_edges(n, std::move(edges));
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list: " + path);
  return read_edge_list(in);
}

}  // namespace ngf
