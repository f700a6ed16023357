#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ngf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad user input: malformed flags, unknown config keys, infeasible parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed data file (edge list, content/cites, coefficient CSV).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure: overflow to non-finite values, non-convergence, divergence.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ngf
