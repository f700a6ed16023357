#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ngf/gso.hpp"
#include "ngf/graph.hpp"
#include "ngf/io.hpp"
#include "ngf/khop.hpp"
#include "ngf/rng.hpp"
#include "ngf/types.hpp"

namespace ngf {

enum class FilterKind { classical, neighborhood };

inline std::string to_string(FilterKind k) {
  return k == FilterKind::classical ? "classical" : "neighborhood";
}

/// Recipe for a graph filter: polynomial in the GSO (classical) or a linear
/// combination of hop-adjacency matrices (neighborhood). coeffs holds the
/// taps h_0..h_{K-1}; gso is only consulted for classical filters.
struct FilterSpec {
  FilterKind kind = FilterKind::classical;
  Vector coeffs;
  GsoChoice gso;
};

/// Realized filter with its provenance.
struct FilterMatrix {
  Matrix m;
  FilterSpec spec;
  Graph graph;
};

namespace detail {

inline void check_coeffs(const Vector& h) {
  if (h.size() < 1) throw ConfigError("filter needs at least one coefficient");
  if (!h.allFinite()) throw ConfigError("filter coefficients must be finite");
}

}  // namespace detail

/// Classical polynomial filter sum_k h_k S^k, accumulated Horner style
/// (acc = S * acc + h_k I) so no power of S is ever formed on its own.
/// Overflow to non-finite entries fails loudly with the power reached.
inline FilterMatrix build_classical(const Graph& g, const FilterSpec& spec) {
  if (spec.kind != FilterKind::classical) {
    throw ConfigError("build_classical: spec.kind must be classical");
  }
  detail::check_coeffs(spec.coeffs);
  const Index n = g.num_nodes();
  const Index taps = spec.coeffs.size();
  const Matrix s = gso(g, spec.gso);

  Matrix acc = Matrix::Zero(n, n);
  acc.diagonal().array() = spec.coeffs(taps - 1);
  for (Index k = taps - 2; k >= 0; --k) {
    acc = (s * acc).eval();
    acc.diagonal().array() += spec.coeffs(k);
    if (!acc.allFinite()) {
      throw NumericalError("build_classical: non-finite entries while accumulating S^" +
                           std::to_string(taps - 1 - k) + " term");
    }
  }
  return FilterMatrix{std::move(acc), spec, g};
}

/// Neighborhood filter sum_k h_k A_N(k). Entries never exceed max_k |h_k|
/// because each pair lives in exactly one hop shell.
inline FilterMatrix build_ngf(const KHopStack& stack, const Vector& h,
                              const Graph& provenance = Graph()) {
  detail::check_coeffs(h);
  if (h.size() > static_cast<Index>(stack.mats.size())) {
    throw ConfigError("build_ngf: " + std::to_string(h.size()) +
                      " coefficients but stack only holds " +
                      std::to_string(stack.mats.size()) + " hop matrices");
  }
  const Index n = stack.n();
  Matrix acc = Matrix::Zero(n, n);
  for (Index k = 0; k < h.size(); ++k) {
    stack.mats[static_cast<std::size_t>(k)].add_scaled_to(acc, h(k));
  }
  FilterSpec spec;
  spec.kind = FilterKind::neighborhood;
  spec.coeffs = h;
  return FilterMatrix{std::move(acc), std::move(spec), provenance};
}

/// y = H x. Columns of x are independent graph signals.
inline Matrix apply(const FilterMatrix& f, const Eigen::Ref<const Matrix>& x) {
  if (x.rows() != f.m.cols()) {
    throw ConfigError("apply: signal has " + std::to_string(x.rows()) +
                      " rows, filter expects " + std::to_string(f.m.cols()));
  }
  return f.m * x;
}

/// ||H_pert - H_true||_F^2 / ||H_true||_F^2.
inline double normalized_error(const FilterMatrix& f_true, const FilterMatrix& f_pert) {
  if (f_true.m.rows() != f_pert.m.rows() || f_true.m.cols() != f_pert.m.cols()) {
    throw ConfigError("normalized_error: filter dimensions differ");
  }
  const double denom = f_true.m.squaredNorm();
  if (denom == 0.0) throw ConfigError("normalized_error: reference filter has zero norm");
  return (f_pert.m - f_true.m).squaredNorm() / denom;
}

/// k i.i.d. uniform draws on (0,1], scaled so the taps sum to one.
inline Vector random_coeffs(Index k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("random_coeffs: k must be >= 1");
  Rng rng(seed);
  Vector h(k);
  for (Index i = 0; i < k; ++i) h(i) = rng.uniform_pos();
  return h / h.sum();
}

/// Coefficient vector as a single CSV line.
inline void write_coeffs(const Vector& h, std::ostream& out) {
  for (Index i = 0; i < h.size(); ++i) {
    if (i > 0) out << ",";
    out << format_double(h(i));
  }
  out << "\n";
}

inline Vector parse_coeffs(const std::string& line) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r\n");
    const auto e = field.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) throw ParseError("empty coefficient field");
    values.push_back(parse_double(field.substr(b, e - b + 1)));
  }
  if (values.empty()) throw ParseError("no coefficients found");
  Vector h(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) h(static_cast<Index>(i)) = values[i];
  return h;
}

inline Vector load_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open coefficient file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty coefficient file: " + path);
  return parse_coeffs(line);
}

}  // namespace ngf
