#pragma once

#include <cmath>
#include <string>

#include "ngf/graph.hpp"
#include "ngf/types.hpp"

namespace ngf {

enum class GsoKind { adjacency, laplacian };

/// Graph shift operator choice. With normalize set, the matrix is divided by
/// its largest-magnitude eigenvalue so repeated applications cannot blow up.
struct GsoChoice {
  GsoKind kind = GsoKind::adjacency;
  bool normalize = false;
};

inline std::string to_string(GsoKind k) {
  return k == GsoKind::adjacency ? "adjacency" : "laplacian";
}

struct PowerIterationResult {
  double value = 0.0;      // spectral radius estimate
  Index iterations = 0;
  double residual = 0.0;   // ||S^2 x - rq x|| / ||x|| at exit
  bool converged = false;
};

/// Largest-magnitude eigenvalue of a symmetric matrix by power iteration on
/// the squared operator. Iterating S directly stalls when +r and -r are both
/// eigenvalues (bipartite adjacencies); S^2 makes the dominant eigenvalue
/// r^2 regardless, and its Perron vector keeps the all-ones start usable.
/// Tolerance applies to the change of the Rayleigh quotient of S^2.
inline PowerIterationResult power_iteration(const Eigen::Ref<const Matrix>& s,
                                            double tol = 1e-9,
                                            Index max_iterations = 10000) {
  const Index n = s.rows();
  if (n == 0 || s.cols() != n) throw ConfigError("power_iteration: need a square matrix");

  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = 1.0 + 1e-8 * static_cast<double>(i + 1) / static_cast<double>(n);
  }
  x /= x.norm();

  PowerIterationResult out;
  double rq_prev = 0.0;
  for (Index it = 1; it <= max_iterations; ++it) {
    Vector y = s * x;
    Vector z = s * y;
    const double rq = x.dot(z);  // ||y||^2 when x is unit: Rayleigh quotient of S^2
    out.iterations = it;
    out.residual = (z - rq * x).norm();
    out.value = std::sqrt(std::max(rq, 0.0));
    if (!std::isfinite(rq)) {
      throw NumericalError("power_iteration: iterate became non-finite at iteration " +
                           std::to_string(it));
    }
    if (it > 1 && std::abs(rq - rq_prev) <= tol * std::max(1.0, std::abs(rq))) {
      out.converged = true;
      return out;
    }
    rq_prev = rq;
    const double zn = z.norm();
    if (zn == 0.0) {  // x in the kernel of S^2; spectral radius along it is 0
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    x = z / zn;
  }
  throw NumericalError("power_iteration: no convergence after " +
                       std::to_string(max_iterations) + " iterations, last residual " +
                       std::to_string(out.residual));
}

inline double spectral_radius(const Eigen::Ref<const Matrix>& s) {
  return power_iteration(s).value;
}

/// Dense GSO realization: adjacency A or Laplacian diag(A 1) - A, optionally
/// scaled by 1/lambda_max.
inline Matrix gso(const Graph& g, const GsoChoice& choice) {
  Matrix s = g.adjacency_matrix();
  if (choice.kind == GsoKind::laplacian) {
    const Vector deg = s.rowwise().sum();
    s = -s;
    s.diagonal() += deg;
  }
  if (choice.normalize) {
    if (g.num_edges() == 0) {
      throw ConfigError("gso: cannot normalize the GSO of an edgeless graph");
    }
    const double lambda = power_iteration(s).value;
    if (lambda <= 0.0) {
      throw NumericalError("gso: non-positive spectral radius estimate " +
                           std::to_string(lambda));
    }
    s /= lambda;
  }
  return s;
}

}  // namespace ngf
