// Test-only oracles, kept independent of the implementation paths they check:
// Floyd-Warshall for BFS distances, repeated multiplication for Horner
// accumulation, central finite differences for analytic gradients.
#pragma once

#include <vector>

#include "ngf/distances.hpp"
#include "ngf/graph.hpp"
#include "ngf/neural.hpp"
#include "ngf/types.hpp"

namespace ngf::oracles {

inline DistanceMatrix floyd_warshall(const Graph& g) {
  const Index n = g.num_nodes();
  constexpr std::int32_t inf = std::numeric_limits<std::int32_t>::max() / 4;
  DistanceMatrix d = DistanceMatrix::Constant(n, n, inf);
  for (Index i = 0; i < n; ++i) d(i, i) = 0;
  for (const Edge& e : g.edges()) {
    d(e.u, e.v) = 1;
    d(e.v, e.u) = 1;
  }
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (d(i, j) >= inf) d(i, j) = kUnreachable;
    }
  }
  return d;
}

/// S^k by k explicit multiplications.
inline Matrix matrix_power(const Matrix& s, Index k) {
  Matrix acc = Matrix::Identity(s.rows(), s.cols());
  for (Index i = 0; i < k; ++i) acc = acc * s;
  return acc;
}

/// Central finite differences of the loss over every theta entry and every
/// learnable coefficient, evaluated through forward passes only.
inline Gradients fd_gradients(const NetworkSpec& spec, const std::vector<LayerOperator>& ops,
                              const NetworkState& state, const Matrix& z, const Target& target,
                              double eps = 1e-5) {
  auto loss_at = [&](const NetworkState& params) {
    NetworkState probe;
    probe.theta = params.theta;
    probe.coeffs = params.coeffs;
    const Matrix& out = forward(spec, ops, probe, z);
    return loss_value(out, target);
  };

  Gradients grads;
  grads.theta.resize(state.theta.size());
  grads.coeffs.resize(state.coeffs.size());
  NetworkState probe;
  probe.theta = state.theta;
  probe.coeffs = state.coeffs;

  for (std::size_t l = 0; l < state.theta.size(); ++l) {
    const Matrix& theta = state.theta[l];
    Matrix grad(theta.rows(), theta.cols());
    for (Index i = 0; i < theta.rows(); ++i) {
      for (Index j = 0; j < theta.cols(); ++j) {
        const double saved = probe.theta[l](i, j);
        probe.theta[l](i, j) = saved + eps;
        const double up = loss_at(probe);
        probe.theta[l](i, j) = saved - eps;
        const double down = loss_at(probe);
        probe.theta[l](i, j) = saved;
        grad(i, j) = (up - down) / (2.0 * eps);
      }
    }
    grads.theta[l] = std::move(grad);
  }

  for (std::size_t l = 0; l < state.coeffs.size(); ++l) {
    if (state.coeffs[l].size() == 0) continue;
    if (spec.layers[l].coeff_mode != CoeffMode::learnable) continue;
    Vector grad(state.coeffs[l].size());
    for (Index k = 0; k < grad.size(); ++k) {
      const double saved = probe.coeffs[l](k);
      probe.coeffs[l](k) = saved + eps;
      const double up = loss_at(probe);
      probe.coeffs[l](k) = saved - eps;
      const double down = loss_at(probe);
      probe.coeffs[l](k) = saved;
      grad(k) = (up - down) / (2.0 * eps);
    }
    grads.coeffs[l] = std::move(grad);
  }
  return grads;
}

}  // namespace ngf::oracles
