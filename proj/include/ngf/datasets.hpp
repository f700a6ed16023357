#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ngf/distances.hpp"
#include "ngf/graph.hpp"
#include "ngf/io.hpp"
#include "ngf/rng.hpp"
#include "ngf/types.hpp"

namespace ngf {

struct SplitMasks {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

struct LoadReport {
  Index nodes = 0;
  Index features = 0;
  Index classes = 0;
  Index edges = 0;
  Index dropped_citations = 0;   // lines naming an id absent from the content file
  Index self_citations = 0;
  Index duplicate_citations = 0;
  Index component_count = 0;
  Index largest_cc_size = 0;
};

/// Citation network: one node per document, undirected citation edges,
/// word-presence feature rows aligned with node order.
struct CitationDataset {
  Graph graph;
  Matrix features;                       // n x F
  std::vector<int> labels;               // class id per node
  std::vector<std::string> class_names;  // id -> name, first-appearance order
  std::vector<std::string> node_ids;     // original document ids
  SplitMasks split;
};

struct LoadOptions {
  bool binarize = true;         // threshold real-valued features at > 0
  bool largest_cc_only = false;
  Index max_nodes = 0;          // 0 = no cap; otherwise BFS-prefix of the largest CC
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

}  // namespace detail

/// Loads the tab-separated content/cites pair: content lines are
/// "id <TAB> w1..wF <TAB> class", cites lines are "cited <TAB> citing".
/// Document ids are remapped to dense 0-based indices in content-file order;
/// citation edges are symmetrized; lines naming unknown ids are dropped and
/// counted in the report.
inline CitationDataset load_citation(const std::string& content_path,
                                     const std::string& cites_path,
                                     const LoadOptions& options = {},
                                     LoadReport* report = nullptr) {
  std::ifstream content(content_path);
  if (!content) throw ParseError("cannot open content file: " + content_path);

  CitationDataset ds;
  std::unordered_map<std::string, Index> id_of;
  std::unordered_map<std::string, int> class_of;
  std::vector<std::vector<double>> rows;
  Index width = -1;

  std::string line;
  Index line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() < 3) {
      throw ParseError(content_path + ":" + std::to_string(line_no) +
                       ": expected 'id<TAB>w1..wF<TAB>class'");
    }
    const Index f = static_cast<Index>(fields.size()) - 2;
    if (width == -1) {
      width = f;
    } else if (f != width) {
      throw ParseError(content_path + ":" + std::to_string(line_no) + ": feature width " +
                       std::to_string(f) + " differs from " + std::to_string(width));
    }
    const std::string& id = fields.front();
    if (id_of.count(id)) {
      throw ParseError(content_path + ":" + std::to_string(line_no) + ": duplicate id " + id);
    }
    id_of.emplace(id, static_cast<Index>(ds.node_ids.size()));
    ds.node_ids.push_back(id);

    std::vector<double> row(static_cast<std::size_t>(width));
    for (Index j = 0; j < width; ++j) {
      double v;
      try {
        v = parse_double(fields[static_cast<std::size_t>(j) + 1]);
      } catch (const ParseError&) {
        throw ParseError(content_path + ":" + std::to_string(line_no) +
                         ": bad feature value '" + fields[static_cast<std::size_t>(j) + 1] + "'");
      }
      row[static_cast<std::size_t>(j)] = options.binarize ? (v > 0.0 ? 1.0 : 0.0) : v;
    }
    rows.push_back(std::move(row));

    const std::string& cls = fields.back();
    auto it = class_of.find(cls);
    if (it == class_of.end()) {
      it = class_of.emplace(cls, static_cast<int>(ds.class_names.size())).first;
      ds.class_names.push_back(cls);
    }
    ds.labels.push_back(it->second);
  }
  const Index n = static_cast<Index>(rows.size());
  if (n == 0) throw ParseError(content_path + ": no documents found");

  ds.features.resize(n, width);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < width; ++j) ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  std::ifstream cites(cites_path);
  if (!cites) throw ParseError("cannot open cites file: " + cites_path);
  LoadReport rep;
  Graph g(n);
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(cites_path + ":" + std::to_string(line_no) +
                       ": expected 'cited<TAB>citing'");
    }
    const auto a = id_of.find(fields[0]);
    const auto b = id_of.find(fields[1]);
    if (a == id_of.end() || b == id_of.end()) {
      ++rep.dropped_citations;
      continue;
    }
    if (a->second == b->second) {
      ++rep.self_citations;
      continue;
    }
    if (g.has_edge(a->second, b->second)) {
      ++rep.duplicate_citations;
      continue;
    }
    g.add_edge(a->second, b->second);
  }
  ds.graph = std::move(g);

  if (options.largest_cc_only || options.max_nodes > 0) {
    std::vector<Index> keep = largest_component_nodes(ds.graph);
    if (options.max_nodes > 0 && static_cast<Index>(keep.size()) > options.max_nodes) {
      // BFS prefix keeps the subsample connected and deterministic.
      const auto adj = ds.graph.adjacency_list();
      std::vector<std::int32_t> dist;
      std::vector<Index> order;
      bfs_from(adj, keep.front(), dist, order);
      order.resize(static_cast<std::size_t>(options.max_nodes));
      std::sort(order.begin(), order.end());
      keep = std::move(order);
    }
    ds.graph = induced_subgraph(ds.graph, keep);
    Matrix features(static_cast<Index>(keep.size()), width);
    std::vector<int> labels;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      features.row(static_cast<Index>(i)) = ds.features.row(keep[i]);
      labels.push_back(ds.labels[static_cast<std::size_t>(keep[i])]);
      ids.push_back(ds.node_ids[static_cast<std::size_t>(keep[i])]);
    }
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    ds.node_ids = std::move(ids);
  }

  rep.nodes = ds.graph.num_nodes();
  rep.features = width;
  rep.classes = static_cast<Index>(ds.class_names.size());
  rep.edges = ds.graph.num_edges();
  const auto components = connected_components(ds.graph);
  rep.component_count = component_count(components);
  std::vector<Index> sizes(static_cast<std::size_t>(rep.component_count), 0);
  for (Index c : components) ++sizes[static_cast<std::size_t>(c)];
  for (Index s : sizes) rep.largest_cc_size = std::max(rep.largest_cc_size, s);
  if (report) *report = rep;
  return ds;
}

/// Inverse of load_citation for round-tripping and fixture generation.
inline void save_citation(const CitationDataset& ds, const std::string& content_path,
                          const std::string& cites_path) {
  atomic_write(content_path, [&](std::ostream& out) {
    for (Index i = 0; i < ds.graph.num_nodes(); ++i) {
      out << ds.node_ids[static_cast<std::size_t>(i)];
      for (Index j = 0; j < ds.features.cols(); ++j) {
        out << "\t" << format_double(ds.features(i, j));
      }
      out << "\t" << ds.class_names[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] << "\n";
    }
  });
  atomic_write(cites_path, [&](std::ostream& out) {
    for (const Edge& e : ds.graph.edges()) {
      out << ds.node_ids[static_cast<std::size_t>(e.u)] << "\t"
          << ds.node_ids[static_cast<std::size_t>(e.v)] << "\n";
    }
  });
}

struct GraphMetrics {
  Index radius = 0;
  Index diameter = 0;
  Index largest_cc_size = 0;
};

/// Eccentricity-based radius and diameter of the largest connected
/// component, by BFS from each of its nodes. No all-pairs matrix is stored,
/// so this works at citation-network scale.
inline GraphMetrics graph_metrics(const Graph& g) {
  if (g.num_nodes() == 0) throw ConfigError("graph_metrics: empty graph");
  const std::vector<Index> nodes = largest_component_nodes(g);
  const Graph cc = induced_subgraph(g, nodes);
  const auto adj = cc.adjacency_list();

  GraphMetrics metrics;
  metrics.largest_cc_size = cc.num_nodes();
  metrics.radius = std::numeric_limits<Index>::max();
  std::vector<std::int32_t> dist;
  std::vector<Index> queue;
  for (Index i = 0; i < cc.num_nodes(); ++i) {
    bfs_from(adj, i, dist, queue);
    std::int32_t ecc = 0;
    for (std::int32_t d : dist) ecc = std::max(ecc, d);
    metrics.radius = std::min<Index>(metrics.radius, ecc);
    metrics.diameter = std::max<Index>(metrics.diameter, ecc);
  }
  if (cc.num_nodes() <= 1) metrics.radius = 0;
  return metrics;
}

/// Stratified split: train_per_class per class, then disjoint random
/// validation and test draws from the remainder. Deterministic in the seed.
inline SplitMasks make_split(Index n, Index train_per_class, Index val_count, Index test_count,
                             const std::vector<int>& labels, std::uint64_t seed) {
  if (static_cast<Index>(labels.size()) != n) throw ConfigError("make_split: labels size != n");
  int num_classes = 0;
  for (int l : labels) num_classes = std::max(num_classes, l + 1);

  Rng rng(seed);
  auto shuffle = [&](std::vector<Index>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const std::size_t j = i + rng.bounded(static_cast<std::uint64_t>(v.size() - i));
      std::swap(v[i], v[j]);
    }
  };

  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(num_classes));
  for (Index i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);

  SplitMasks masks;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (int c = 0; c < num_classes; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    if (static_cast<Index>(pool.size()) < train_per_class) {
      throw ConfigError("make_split: class " + std::to_string(c) + " has only " +
                        std::to_string(pool.size()) + " nodes, need " +
                        std::to_string(train_per_class));
    }
    shuffle(pool);
    for (Index i = 0; i < train_per_class; ++i) {
      masks.train.push_back(pool[static_cast<std::size_t>(i)]);
      taken[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = true;
    }
  }
  std::sort(masks.train.begin(), masks.train.end());

  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  if (static_cast<Index>(rest.size()) < val_count + test_count) {
    throw ConfigError("make_split: " + std::to_string(rest.size()) +
                      " nodes left for validation+test, need " +
                      std::to_string(val_count + test_count));
  }
  shuffle(rest);
  masks.val.assign(rest.begin(), rest.begin() + val_count);
  masks.test.assign(rest.begin() + val_count, rest.begin() + val_count + test_count);
  std::sort(masks.val.begin(), masks.val.end());
  std::sort(masks.test.begin(), masks.test.end());
  return masks;
}

}  // namespace ngf
