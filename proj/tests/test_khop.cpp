#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ngf/bit_matrix.hpp"
#include "ngf/distances.hpp"
#include "ngf/generators.hpp"
#include "ngf/khop.hpp"

using namespace ngf;

TEST_CASE("bit matrix basics") {
  BitMatrix m(3, 70);  // forces a second word per row
  m.set(0, 0);
  m.set(1, 64);
  m.set(2, 69);
  CHECK(m.get(0, 0));
  CHECK(m.get(1, 64));
  CHECK_FALSE(m.get(1, 63));
  CHECK(m.count() == 3);
  CHECK_FALSE(m.is_zero());

  Matrix dense = m.to_dense();
  CHECK(dense(1, 64) == 1.0);
  CHECK(dense.sum() == 3.0);

  Matrix acc = Matrix::Zero(3, 70);
  m.add_scaled_to(acc, 2.5);
  CHECK(acc(2, 69) == 2.5);
  CHECK(acc.sum() == 7.5);
}

TEST_CASE("bit matrix apply equals dense multiplication") {
  BitMatrix m(4, 4);
  m.set(0, 1);
  m.set(0, 3);
  m.set(2, 2);
  Matrix x(4, 2);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK((m.apply(x) - m.to_dense() * x).norm() == 0.0);

  Matrix w = Matrix::Zero(4, 4);
  w(0, 1) = 1.5;
  w(0, 3) = -0.5;
  w(2, 2) = 2.0;
  w(3, 3) = 100.0;  // not a set entry, must be ignored
  CHECK(m.masked_sum(w) == doctest::Approx(3.0));
}

TEST_CASE("khop stack on the complete graph K4") {
  const Graph k4 = generate_er(4, 1.0, 1);
  const KHopStack stack = khop_stack(k4, 3);
  CHECK(stack.diameter == 1);
  CHECK(stack.mats[0] == BitMatrix::identity(4));
  CHECK(stack.mats[2].is_zero());
  CHECK(stack.mats[3].is_zero());
}

TEST_CASE("khop stack on the 3-path") {
  const Graph path = Graph::from_edges(3, {{0, 1}, {1, 2}});
  const KHopStack stack = khop_stack(path, 2);
  CHECK(stack.diameter == 2);
  CHECK(stack.mats[2].count() == 2);
  CHECK(stack.mats[2].get(0, 2));
  CHECK(stack.mats[2].get(2, 0));
}

TEST_CASE("mats[1] is the binarized adjacency") {
  const Graph g = Graph::from_edges(4, {{0, 1, 3.5}, {2, 3, 0.25}});
  const KHopStack stack = khop_stack(g, 1);
  CHECK((stack.mats[1].to_dense() - g.adjacency_matrix(/*binary=*/true)).norm() == 0.0);
}

TEST_CASE("hop shells partition pairs within each component") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Graph g = generate_er(16, 0.3, s);
    const KHopStack stack = khop_stack_full(g);
    const DistanceMatrix d = bfs_distances(g);

    // Summing all shells hits each pair in the same component exactly once
    // and unreachable pairs never (checked against the BFS oracle).
    Matrix total = Matrix::Zero(16, 16);
    for (const BitMatrix& m : stack.mats) m.add_scaled_to(total, 1.0);
    for (Index i = 0; i < 16; ++i) {
      for (Index j = 0; j < 16; ++j) {
        const bool same_component = d(i, j) != kUnreachable;
        CHECK(total(i, j) == (same_component ? 1.0 : 0.0));
        CHECK(same_component ==
              (stack.components[static_cast<std::size_t>(i)] ==
               stack.components[static_cast<std::size_t>(j)]));
      }
    }
    // stack agrees with the distance matrix shell by shell
    for (Index k = 0; k <= stack.k_max(); ++k) {
      for (Index i = 0; i < 16; ++i) {
        for (Index j = 0; j < 16; ++j) {
          CHECK(stack.mats[static_cast<std::size_t>(k)].get(i, j) == (d(i, j) == k));
        }
      }
    }
  }
}

TEST_CASE("shells beyond the diameter are zero") {
  const Graph g = generate_er(12, 0.4, 3);
  const KHopStack stack = khop_stack(g, 11);
  for (Index k = stack.diameter + 1; k <= stack.k_max(); ++k) {
    CHECK(stack.mats[static_cast<std::size_t>(k)].is_zero());
  }
}
