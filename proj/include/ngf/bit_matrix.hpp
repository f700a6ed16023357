#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "ngf/types.hpp"

namespace ngf {

/// Dense binary matrix packed 64 entries per word, row-major. Hop-adjacency
/// matrices are 0/1 and mutually disjoint across hops, so packing them keeps
/// a full stack of them at n^2/8 bytes per hop.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(Index rows, Index cols)
      : rows_(rows),
        cols_(cols),
        words_per_row_((static_cast<std::size_t>(cols) + 63) / 64),
        words_(static_cast<std::size_t>(rows) * words_per_row_, 0) {}

  static BitMatrix identity(Index n) {
    BitMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m.set(i, i);
    return m;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  void set(Index i, Index j) {
    words_[word_index(i, j)] |= std::uint64_t(1) << (j & 63);
  }

  bool get(Index i, Index j) const {
    return (words_[word_index(i, j)] >> (j & 63)) & 1;
  }

  /// Number of set entries.
  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  bool is_zero() const {
    for (std::uint64_t w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  bool operator==(const BitMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && words_ == other.words_;
  }

  /// acc += scale * (*this), with acc dense.
  void add_scaled_to(Matrix& acc, double scale) const {
    for (Index i = 0; i < rows_; ++i) {
      for_each_in_row(i, [&](Index j) { acc(i, j) += scale; });
    }
  }

  /// (*this) * x for a dense right factor.
  Matrix apply(const Eigen::Ref<const Matrix>& x) const {
    Matrix y = Matrix::Zero(rows_, x.cols());
    for (Index i = 0; i < rows_; ++i) {
      for_each_in_row(i, [&](Index j) { y.row(i) += x.row(j); });
    }
    return y;
  }

  /// Sum of w over the set entries (Frobenius inner product <this, w>).
  double masked_sum(const Eigen::Ref<const Matrix>& w) const {
    double s = 0.0;
    for (Index i = 0; i < rows_; ++i) {
      for_each_in_row(i, [&](Index j) { s += w(i, j); });
    }
    return s;
  }

  Matrix to_dense() const {
    Matrix m = Matrix::Zero(rows_, cols_);
    for (Index i = 0; i < rows_; ++i) {
      for_each_in_row(i, [&](Index j) { m(i, j) = 1.0; });
    }
    return m;
  }

  template <typename F>
  void for_each_in_row(Index i, F&& f) const {
    const std::size_t base = static_cast<std::size_t>(i) * words_per_row_;
    for (std::size_t w = 0; w < words_per_row_; ++w) {
      std::uint64_t bits = words_[base + w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        f(static_cast<Index>(w * 64 + static_cast<std::size_t>(b)));
        bits &= bits - 1;
      }
    }
  }

 private:
  std::size_t word_index(Index i, Index j) const {
    return static_cast<std::size_t>(i) * words_per_row_ +
           (static_cast<std::size_t>(j) >> 6);
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace ngf
