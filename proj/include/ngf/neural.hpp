#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ngf/filters.hpp"
#include "ngf/gso.hpp"
#include "ngf/khop.hpp"
#include "ngf/rng.hpp"
#include "ngf/types.hpp"

namespace ngf {

enum class OperatorKind { adjacency, classical, neighborhood };
enum class CoeffMode { fixed, learnable };
enum class Activation { relu, tanh, identity };
enum class OutputHead { identity, softmax };
enum class LossKind { mse, cross_entropy };

/// How a neighborhood layer operator is scaled. per_hop divides each hop
/// matrix by its own spectral radius (every basis element has unit norm);
/// shared divides all hops by the spectral radius of the flat-tap filter,
/// keeping the hops' natural relative scales while bounding the whole
/// operator at 1.
enum class HopNorm { none, per_hop, shared };

inline std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::adjacency: return "adjacency";
    case OperatorKind::classical: return "classical";
    default: return "neighborhood";
  }
}
inline std::string to_string(CoeffMode m) { return m == CoeffMode::fixed ? "fixed" : "learnable"; }
inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    default: return "identity";
  }
}
inline std::string to_string(OutputHead h) { return h == OutputHead::identity ? "identity" : "softmax"; }

struct LayerSpec {
  OperatorKind op = OperatorKind::neighborhood;
  CoeffMode coeff_mode = CoeffMode::fixed;
  Index taps = 1;  // K; ignored by the plain adjacency operator
};

/// Architecture description. feature_dims has one entry more than layers;
/// the hidden activation applies to every layer but the last, which uses the
/// output head instead.
struct NetworkSpec {
  std::vector<Index> feature_dims;
  std::vector<LayerSpec> layers;
  Activation hidden = Activation::relu;
  OutputHead head = OutputHead::identity;

  Index num_layers() const { return static_cast<Index>(layers.size()); }

  void validate() const {
    if (layers.empty()) throw ConfigError("network needs at least one layer");
    if (feature_dims.size() != layers.size() + 1) {
      throw ConfigError("feature_dims must have layers+1 entries");
    }
    for (const LayerSpec& l : layers) {
      if (l.taps < 1) throw ConfigError("layer taps must be >= 1");
    }
  }
};

/// Graph-aware linear operator of one layer, held as the basis the filter is
/// assembled from: dense GSO powers for classical filters, packed hop
/// matrices for neighborhood ones, the bare adjacency for the plain GNN.
/// Copies are shallow so layers and runs can share one basis.
class LayerOperator {
 public:
  static LayerOperator adjacency(const Graph& g) {
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::adjacency;
    impl->n = g.num_nodes();
    impl->taps = 1;
    impl->dense.push_back(g.adjacency_matrix());
    return LayerOperator(std::move(impl));
  }

  /// Powers S^0..S^{taps-1}, precomputed once so learnable coefficients can
  /// rebuild the filter and take gradients without repeated multiplication.
  static LayerOperator classical(const Graph& g, const GsoChoice& choice, Index taps) {
    if (taps < 1) throw ConfigError("LayerOperator: taps must be >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::classical;
    impl->n = g.num_nodes();
    impl->taps = taps;
    impl->dense.reserve(static_cast<std::size_t>(taps));
    impl->dense.push_back(Matrix::Identity(g.num_nodes(), g.num_nodes()));
    if (taps > 1) {
      const Matrix s = gso(g, choice);
      for (Index k = 1; k < taps; ++k) {
        impl->dense.push_back(s * impl->dense.back());
        if (!impl->dense.back().allFinite()) {
          throw NumericalError("LayerOperator: GSO power " + std::to_string(k) +
                               " has non-finite entries");
        }
      }
    }
    return LayerOperator(std::move(impl));
  }

  /// Scaling only conditions the optimization (the learnable weights absorb
  /// it); the expressible function class is unchanged.
  static LayerOperator neighborhood(const KHopStack& stack, Index taps,
                                    HopNorm norm = HopNorm::none) {
    if (taps < 1) throw ConfigError("LayerOperator: taps must be >= 1");
    if (taps > static_cast<Index>(stack.mats.size())) {
      throw ConfigError("LayerOperator: stack holds " + std::to_string(stack.mats.size()) +
                        " hop matrices, need " + std::to_string(taps));
    }
    auto impl = std::make_shared<Impl>();
    impl->kind = OperatorKind::neighborhood;
    impl->n = stack.n();
    impl->taps = taps;
    impl->bits.assign(stack.mats.begin(), stack.mats.begin() + taps);
    impl->scales = Vector::Ones(taps);
    if (norm == HopNorm::per_hop) {
      for (Index k = 0; k < taps; ++k) {
        const BitMatrix& m = impl->bits[static_cast<std::size_t>(k)];
        if (m.is_zero()) continue;  // beyond the diameter; contributes nothing
        const double lambda = power_iteration(m.to_dense()).value;
        if (lambda > 0.0) impl->scales(k) = 1.0 / lambda;
      }
    } else if (norm == HopNorm::shared) {
      Matrix flat = Matrix::Zero(impl->n, impl->n);
      for (Index k = 0; k < taps; ++k) {
        impl->bits[static_cast<std::size_t>(k)].add_scaled_to(
            flat, 1.0 / static_cast<double>(taps));
      }
      const double lambda = power_iteration(flat).value;
      if (lambda > 0.0) impl->scales.setConstant(1.0 / lambda);
    }
    return LayerOperator(std::move(impl));
  }

  OperatorKind kind() const { return impl_->kind; }
  Index n() const { return impl_->n; }
  Index taps() const { return impl_->taps; }
  bool has_coeffs() const { return impl_->kind != OperatorKind::adjacency; }

  /// H = sum_k h_k B_k (or plain A for the adjacency operator).
  Matrix materialize(const Vector& h) const {
    switch (impl_->kind) {
      case OperatorKind::adjacency:
        return impl_->dense.front();
      case OperatorKind::classical: {
        check_taps(h);
        Matrix m = Matrix::Zero(impl_->n, impl_->n);
        for (Index k = 0; k < h.size(); ++k) m += h(k) * impl_->dense[static_cast<std::size_t>(k)];
        return m;
      }
      default: {
        check_taps(h);
        Matrix m = Matrix::Zero(impl_->n, impl_->n);
        for (Index k = 0; k < h.size(); ++k) {
          impl_->bits[static_cast<std::size_t>(k)].add_scaled_to(m, h(k) * impl_->scales(k));
        }
        return m;
      }
    }
  }

  /// g_k = <B_k, W>_F, the coefficient gradient against W = G_V U^T.
  Vector basis_dot(const Eigen::Ref<const Matrix>& w) const {
    Vector g = Vector::Zero(impl_->taps);
    for (Index k = 0; k < impl_->taps; ++k) {
      if (impl_->kind == OperatorKind::neighborhood) {
        g(k) = impl_->scales(k) * impl_->bits[static_cast<std::size_t>(k)].masked_sum(w);
      } else {
        g(k) = impl_->dense[static_cast<std::size_t>(k)].cwiseProduct(w).sum();
      }
    }
    return g;
  }

 private:
  struct Impl {
    OperatorKind kind = OperatorKind::adjacency;
    Index n = 0;
    Index taps = 1;
    std::vector<Matrix> dense;
    std::vector<BitMatrix> bits;
    Vector scales;  // per-hop 1/lambda_max when normalized, else ones
  };

  explicit LayerOperator(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  void check_taps(const Vector& h) const {
    if (h.size() != impl_->taps) {
      throw ConfigError("LayerOperator: expected " + std::to_string(impl_->taps) +
                        " coefficients, got " + std::to_string(h.size()));
    }
  }

  std::shared_ptr<const Impl> impl_;
};

/// Learnable parameters plus the forward cache backprop consumes.
struct NetworkState {
  std::vector<Matrix> theta;   // theta[l]: F(l) x F(l+1)
  std::vector<Vector> coeffs;  // per layer; empty for adjacency layers

  // Forward cache (x[0] = input, x[L] = output).
  std::vector<Matrix> x;
  std::vector<Matrix> pre;     // pre-activation per layer
  std::vector<Matrix> u;       // x[l-1] * theta[l-1] per layer
  std::vector<Matrix> h_mat;   // materialized filter per layer
  bool forward_cached = false;
};

/// Glorot-uniform weights, coefficients initialized flat at 1/K.
inline NetworkState init_state(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index layers = spec.num_layers();
  NetworkState st;
  st.theta.resize(static_cast<std::size_t>(layers));
  st.coeffs.resize(static_cast<std::size_t>(layers));
  st.h_mat.resize(static_cast<std::size_t>(layers));
  for (Index l = 0; l < layers; ++l) {
    const Index fin = spec.feature_dims[static_cast<std::size_t>(l)];
    const Index fout = spec.feature_dims[static_cast<std::size_t>(l) + 1];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
    const double a = std::sqrt(6.0 / static_cast<double>(fin + fout));
    Matrix w(fin, fout);
    for (Index i = 0; i < fin; ++i) {
      for (Index j = 0; j < fout; ++j) w(i, j) = rng.uniform(-a, a);
    }
    st.theta[static_cast<std::size_t>(l)] = std::move(w);
    const LayerSpec& ls = spec.layers[static_cast<std::size_t>(l)];
    if (ls.op != OperatorKind::adjacency) {
      st.coeffs[static_cast<std::size_t>(l)] =
          Vector::Constant(ls.taps, 1.0 / static_cast<double>(ls.taps));
    }
  }
  return st;
}

namespace detail {

inline Matrix apply_hidden(Activation a, const Matrix& v) {
  switch (a) {
    case Activation::relu: return v.cwiseMax(0.0);
    case Activation::tanh: return v.array().tanh().matrix();
    default: return v;
  }
}

/// Activation derivative in terms of the cached post-activation value:
/// relu' = [x > 0] (subgradient 0 at 0), tanh' = 1 - x^2.
inline Matrix hidden_grad(Activation a, const Matrix& x_out, const Matrix& gx) {
  switch (a) {
    case Activation::relu:
      return (x_out.array() > 0.0).cast<double>().matrix().cwiseProduct(gx);
    case Activation::tanh:
      return (1.0 - x_out.array().square()).matrix().cwiseProduct(gx);
    default:
      return gx;
  }
}

}  // namespace detail

/// Row-wise softmax, max-shifted for stability.
inline Matrix softmax_rows(const Eigen::Ref<const Matrix>& v) {
  Matrix p(v.rows(), v.cols());
  for (Index i = 0; i < v.rows(); ++i) {
    const double m = v.row(i).maxCoeff();
    p.row(i) = (v.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

/// Squared Euclidean distance ||y - y_hat||_2^2.
inline double loss_mse(const Eigen::Ref<const Matrix>& y_hat,
                       const Eigen::Ref<const Matrix>& y) {
  if (y_hat.rows() != y.rows() || y_hat.cols() != y.cols()) {
    throw ConfigError("loss_mse: shape mismatch");
  }
  return (y - y_hat).squaredNorm();
}

/// Mean over masked nodes of -log p[label], with a 1e-12 probability floor.
inline double loss_cross_entropy(const Eigen::Ref<const Matrix>& probs,
                                 const std::vector<int>& labels,
                                 const std::vector<Index>& mask) {
  if (mask.empty()) throw ConfigError("loss_cross_entropy: empty mask");
  if (static_cast<Index>(labels.size()) != probs.rows()) {
    throw ConfigError("loss_cross_entropy: labels/probs size mismatch");
  }
  constexpr double kFloor = 1e-12;
  double total = 0.0;
  for (Index i : mask) {
    if (i < 0 || i >= probs.rows()) throw ConfigError("loss_cross_entropy: mask index out of range");
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= probs.cols()) {
      throw ConfigError("loss_cross_entropy: label out of range");
    }
    total += -std::log(std::max(probs(i, label), kFloor));
  }
  return total / static_cast<double>(mask.size());
}

/// Training target: MSE against `values`, or masked cross entropy against
/// `labels`. Softmax heads pair with cross entropy, identity heads with MSE.
struct Target {
  LossKind kind = LossKind::mse;
  Matrix values;
  std::vector<int> labels;
  std::vector<Index> mask;

  static Target mse(Matrix values) {
    Target t;
    t.kind = LossKind::mse;
    t.values = std::move(values);
    return t;
  }
  static Target cross_entropy(std::vector<int> labels, std::vector<Index> mask) {
    Target t;
    t.kind = LossKind::cross_entropy;
    t.labels = std::move(labels);
    t.mask = std::move(mask);
    return t;
  }
};

inline void check_loss_head(const NetworkSpec& spec, const Target& target) {
  if (target.kind == LossKind::cross_entropy && spec.head != OutputHead::softmax) {
    throw ConfigError("cross-entropy loss requires the softmax head");
  }
  if (target.kind == LossKind::mse && spec.head != OutputHead::identity) {
    throw ConfigError("mse loss requires the identity head");
  }
}

/// Layer recursion x(l) = act(H(l) x(l-1) theta(l)), with the output head on
/// the last layer. The graph product is computed as H (x theta) so wide
/// inputs never meet the n x n operator directly. Caches everything backward
/// needs. Throws NumericalError naming the layer if an activation goes
/// non-finite.
inline const Matrix& forward(const NetworkSpec& spec, const std::vector<LayerOperator>& ops,
                             NetworkState& state, const Matrix& z) {
  spec.validate();
  const Index layers = spec.num_layers();
  if (static_cast<Index>(ops.size()) != layers) {
    throw ConfigError("forward: need one operator per layer");
  }
  if (z.cols() != spec.feature_dims.front()) {
    throw ConfigError("forward: input has " + std::to_string(z.cols()) +
                      " features, spec expects " + std::to_string(spec.feature_dims.front()));
  }
  if (z.rows() != ops.front().n()) {
    throw ConfigError("forward: input rows do not match graph size");
  }

  state.x.assign(static_cast<std::size_t>(layers) + 1, Matrix());
  state.pre.assign(static_cast<std::size_t>(layers), Matrix());
  state.u.assign(static_cast<std::size_t>(layers), Matrix());
  if (state.h_mat.size() != static_cast<std::size_t>(layers)) {
    state.h_mat.assign(static_cast<std::size_t>(layers), Matrix());
  }
  state.x[0] = z;

  for (Index l = 0; l < layers; ++l) {
    const LayerSpec& ls = spec.layers[static_cast<std::size_t>(l)];
    const LayerOperator& op = ops[static_cast<std::size_t>(l)];
    Matrix& h = state.h_mat[static_cast<std::size_t>(l)];
    // Fixed filters are materialized once; learnable ones follow the coeffs.
    if (h.size() == 0 || (op.has_coeffs() && ls.coeff_mode == CoeffMode::learnable)) {
      h = op.materialize(state.coeffs[static_cast<std::size_t>(l)]);
    }
    const Matrix& xin = state.x[static_cast<std::size_t>(l)];
    const Matrix& theta = state.theta[static_cast<std::size_t>(l)];
    if (xin.cols() != theta.rows()) {
      throw ConfigError("forward: feature width mismatch at layer " + std::to_string(l + 1));
    }
    Matrix u = xin * theta;
    Matrix v = h * u;
    if (!v.allFinite()) {
      throw NumericalError("forward diverged at layer " + std::to_string(l + 1));
    }
    state.u[static_cast<std::size_t>(l)] = std::move(u);
    if (l + 1 < layers) {
      state.x[static_cast<std::size_t>(l) + 1] = detail::apply_hidden(spec.hidden, v);
    } else {
      state.x[static_cast<std::size_t>(l) + 1] =
          spec.head == OutputHead::softmax ? softmax_rows(v) : v;
    }
    state.pre[static_cast<std::size_t>(l)] = std::move(v);
  }
  state.forward_cached = true;
  return state.x.back();
}

struct Gradients {
  std::vector<Matrix> theta;
  std::vector<Vector> coeffs;  // empty where the layer has no coefficients
};

inline double loss_value(const Matrix& output, const Target& target) {
  if (target.kind == LossKind::mse) return loss_mse(output, target.values);
  return loss_cross_entropy(output, target.labels, target.mask);
}

/// Reverse-mode gradients of the configured loss for every theta and every
/// learnable coefficient vector. Requires a cached forward pass.
inline Gradients backward(const NetworkSpec& spec, const std::vector<LayerOperator>& ops,
                          const NetworkState& state, const Target& target) {
  if (!state.forward_cached) throw std::logic_error("backward: no cached forward pass");
  check_loss_head(spec, target);
  const Index layers = spec.num_layers();
  const Matrix& output = state.x.back();

  // Gradient at the pre-activation of the last layer. For softmax +
  // cross-entropy this collapses to (P - onehot) / |mask| on masked rows.
  Matrix g_pre;
  if (target.kind == LossKind::mse) {
    if (output.rows() != target.values.rows() || output.cols() != target.values.cols()) {
      throw ConfigError("backward: target shape mismatch");
    }
    g_pre = 2.0 * (output - target.values);
  } else {
    g_pre = Matrix::Zero(output.rows(), output.cols());
    const double scale = 1.0 / static_cast<double>(target.mask.size());
    for (Index i : target.mask) {
      g_pre.row(i) = output.row(i) * scale;
      g_pre(i, target.labels[static_cast<std::size_t>(i)]) -= scale;
    }
  }

  Gradients grads;
  grads.theta.resize(static_cast<std::size_t>(layers));
  grads.coeffs.resize(static_cast<std::size_t>(layers));

  for (Index l = layers - 1; l >= 0; --l) {
    const LayerSpec& ls = spec.layers[static_cast<std::size_t>(l)];
    const LayerOperator& op = ops[static_cast<std::size_t>(l)];
    const Matrix& h = state.h_mat[static_cast<std::size_t>(l)];
    const Matrix& u = state.u[static_cast<std::size_t>(l)];
    const Matrix& xin = state.x[static_cast<std::size_t>(l)];

    if (l < layers - 1) {
      // g_pre currently holds dL/dx(l+1); pull it through the activation.
      g_pre = detail::hidden_grad(spec.hidden, state.x[static_cast<std::size_t>(l) + 1], g_pre);
    }

    if (op.has_coeffs() && ls.coeff_mode == CoeffMode::learnable) {
      grads.coeffs[static_cast<std::size_t>(l)] = op.basis_dot(g_pre * u.transpose());
    }
    const Matrix g_u = h.transpose() * g_pre;
    grads.theta[static_cast<std::size_t>(l)] = xin.transpose() * g_u;
    if (l > 0) g_pre = g_u * state.theta[static_cast<std::size_t>(l)].transpose();
  }
  return grads;
}

struct TrainOptions {
  Index epochs = 1;
  double step_size = 0.01;
  /// Constant multiplier on step_size for the filter-tap updates. A tap
  /// scales an entire n x n operator, so its curvature is far above a
  /// single weight's; a static factor keeps one shared step usable.
  double coeff_step_scale = 1.0;
  std::uint64_t seed = 0;
  /// Start with a zero output layer so the first epochs cannot overshoot:
  /// the initial output is 0, the initial loss is ||target||^2, and the net
  /// grows into the signal. Keeps fixed-step descent stable at steps that
  /// otherwise diverge on about half the random inits.
  bool zero_last_layer = false;
  /// Called after each forward pass with the epoch's output and loss; return
  /// false to stop early, skipping that epoch's update.
  std::function<bool(Index epoch, const Matrix& output, double loss, const NetworkState& state)>
      on_epoch;
};

struct TrainResult {
  NetworkState state;
  std::vector<double> losses;
  bool diverged = false;
  Index last_finite_epoch = -1;  // last epoch with a finite loss
};

/// Full-batch fixed-step gradient descent from a seeded Glorot init.
/// Divergence (non-finite loss or forward blow-up) stops the run and is
/// reported in the result rather than thrown, so sweeps can record it.
inline TrainResult train(const NetworkSpec& spec, const std::vector<LayerOperator>& ops,
                         const Matrix& z, const Target& target, const TrainOptions& options) {
  if (options.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(options.step_size > 0.0)) throw ConfigError("train: step_size must be > 0");
  check_loss_head(spec, target);

  TrainResult result;
  result.state = init_state(spec, options.seed);
  if (options.zero_last_layer) result.state.theta.back().setZero();
  result.losses.reserve(static_cast<std::size_t>(options.epochs));

  for (Index epoch = 0; epoch < options.epochs; ++epoch) {
    double loss = 0.0;
    try {
      const Matrix& output = forward(spec, ops, result.state, z);
      loss = loss_value(output, target);
      if (!std::isfinite(loss)) {
        result.diverged = true;
        return result;
      }
      result.losses.push_back(loss);
      result.last_finite_epoch = epoch;
      if (options.on_epoch && !options.on_epoch(epoch, output, loss, result.state)) {
        // early stop requested; no update for this epoch
        return result;
      }
    } catch (const NumericalError&) {
      result.diverged = true;
      return result;
    }

    const Gradients grads = backward(spec, ops, result.state, target);
    for (Index l = 0; l < spec.num_layers(); ++l) {
      result.state.theta[static_cast<std::size_t>(l)] -=
          options.step_size * grads.theta[static_cast<std::size_t>(l)];
      const LayerSpec& ls = spec.layers[static_cast<std::size_t>(l)];
      if (ls.op != OperatorKind::adjacency && ls.coeff_mode == CoeffMode::learnable) {
        result.state.coeffs[static_cast<std::size_t>(l)] -=
            options.step_size * options.coeff_step_scale *
            grads.coeffs[static_cast<std::size_t>(l)];
      }
    }
  }
  return result;
}

}  // namespace ngf
