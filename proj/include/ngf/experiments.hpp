#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ngf/config.hpp"
#include "ngf/datasets.hpp"
#include "ngf/filters.hpp"
#include "ngf/generators.hpp"
#include "ngf/neural.hpp"
#include "ngf/rng.hpp"
#include "ngf/types.hpp"

namespace ngf {

/// One output row of an experiment sweep. Diverged runs keep their row with
/// the value column marked, so record counts always match the sweep.
struct RunRecord {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string params;
  std::string metric;
  Index epoch = -1;  // -1 = not epoch-indexed
  double value = 0.0;
  bool diverged = false;
};

inline void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  out << "experiment,seed,params,metric,epoch,value\n";
  for (const RunRecord& r : records) {
    out << r.experiment << "," << r.seed << "," << r.params << "," << r.metric << ",";
    if (r.epoch >= 0) out << r.epoch;
    out << "," << (r.diverged ? "diverged" : format_double(r.value)) << "\n";
  }
}

/// Ordered "key=value;key=value" string for the params column.
class ParamString {
 public:
  ParamString& add(const std::string& key, const std::string& value) {
    if (!text_.empty()) text_ += ";";
    text_ += key + "=" + value;
    return *this;
  }
  ParamString& add(const std::string& key, Index value) {
    return add(key, std::to_string(value));
  }
  ParamString& add(const std::string& key, double value) {
    return add(key, format_double(value));
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

/// Runs fn(0..count-1) across `jobs` workers. Tasks derive their own seeds
/// and write to index-addressed slots, so the merged output is identical for
/// any job count.
inline void parallel_tasks(Index count, int jobs, const std::function<void(Index)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      try {
        while (true) {
          const Index i = next.fetch_add(1);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("mean of empty set");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

namespace detail {

// Seed stream tags; adding a stream must not renumber existing ones or every
// frozen regression fixture shifts.
enum SeedStream : std::uint64_t {
  kStreamGraph = 1,
  kStreamPerturb = 2,
  kStreamCoeffs = 3,
  kStreamSignal = 4,
  kStreamNoise = 5,
  kStreamInput = 6,
  kStreamInit = 7,
  kStreamSplit = 8,
  kStreamWhite = 9,
};

inline const Graph& graph_ref(const Graph& g) { return g; }
inline const Graph& graph_ref(const SbmGraph& g) { return g.graph; }

/// Resamples gen(seed') until the graph is connected (or unconditionally
/// returns the first draw). Works for plain graphs and labelled SBM draws.
template <typename Gen>
auto connected_graph(Gen&& gen, std::uint64_t seed, bool require_connected) {
  constexpr Index kMaxAttempts = 1000;
  for (Index attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto g = gen(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (!require_connected || is_connected(graph_ref(g))) return g;
  }
  throw ConfigError("no connected graph after " + std::to_string(kMaxAttempts) +
                    " attempts; parameters too sparse");
}

inline Graph connected_perturb(const Graph& g, double create_pct, double destroy_pct,
                               std::uint64_t seed, bool require_connected) {
  constexpr Index kMaxAttempts = 1000;
  for (Index attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Graph p = perturb(g, create_pct, destroy_pct, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (!require_connected || is_connected(p)) return p;
  }
  throw ConfigError("no connected perturbation after " + std::to_string(kMaxAttempts) +
                    " attempts");
}

inline GsoChoice gso_choice_from(const Config& cfg, const std::string& kind_key,
                                 const std::string& norm_key) {
  GsoChoice choice;
  const std::string kind = cfg.get_string(kind_key);
  if (kind == "adjacency") {
    choice.kind = GsoKind::adjacency;
  } else if (kind == "laplacian") {
    choice.kind = GsoKind::laplacian;
  } else {
    throw ConfigError("config key " + kind_key + ": expected adjacency or laplacian");
  }
  choice.normalize = cfg.get_bool(norm_key);
  return choice;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Filter error vs number of taps (perturbed vs true graph)
// ---------------------------------------------------------------------------

inline Config filter_error_config() {
  Config cfg;
  cfg.define("graph", "er", "graph family: er | small-world");
  cfg.define("n", "64", "number of nodes");
  cfg.define("er_p", "0.15", "edge probability for the er family");
  cfg.define("sw_k", "4", "ring degree for the small-world family (even)");
  cfg.define("sw_beta", "0.15", "rewiring probability for the small-world family");
  cfg.define("k_values", "2,4,6,8", "filter tap counts to sweep");
  cfg.define("perturb_create", "0.1", "created edges as a fraction of |E|");
  cfg.define("perturb_destroy", "0.1", "destroyed edges as a fraction of |E|");
  cfg.define("require_connected", "true", "resample graph and perturbation until connected");
  // With positive normalized taps, powers of the adjacency collapse onto the
  // Perron pair and the discrepancy saturates instead of growing; the
  // Laplacian keeps the per-power differences alive, so it is the default
  // here.
  cfg.define("gso", "laplacian", "GSO for the classical filter: adjacency | laplacian");
  cfg.define("gso_normalize", "false", "divide the GSO by its spectral radius");
  cfg.define("realizations", "100", "number of (graph, perturbation) realizations");
  cfg.define("seed", "1", "master seed");
  return cfg;
}

/// Normalized filter discrepancy between a graph and its perturbation, for
/// classical and neighborhood filters sharing the same random taps. Emits
/// per-realization errors plus median and mean per tap count.
inline std::vector<RunRecord> exp_filter_error(const Config& cfg, int jobs = 1) {
  const std::string family = cfg.get_string("graph");
  if (family != "er" && family != "small-world") {
    throw ConfigError("config key graph: expected er or small-world");
  }
  const Index n = cfg.get_int("n");
  const double er_p = cfg.get_double("er_p");
  const Index sw_k = cfg.get_int("sw_k");
  const double sw_beta = cfg.get_double("sw_beta");
  const auto k_values = cfg.get_int_list("k_values");
  const double create_pct = cfg.get_double("perturb_create");
  const double destroy_pct = cfg.get_double("perturb_destroy");
  const bool require_connected = cfg.get_bool("require_connected");
  const GsoChoice gso_choice = detail::gso_choice_from(cfg, "gso", "gso_normalize");
  const Index realizations = cfg.get_int("realizations");
  const std::uint64_t master = static_cast<std::uint64_t>(cfg.get_int("seed"));
  if (realizations < 1) throw ConfigError("realizations must be >= 1");

  Index max_taps = 1;
  for (long long k : k_values) {
    if (k < 1) throw ConfigError("k_values entries must be >= 1");
    max_taps = std::max<Index>(max_taps, k);
  }

  struct TaskOut {
    std::vector<RunRecord> records;
    std::vector<std::optional<double>> err_gf;   // per k index; nullopt = diverged
    std::vector<double> err_ngf;
  };
  std::vector<TaskOut> results(static_cast<std::size_t>(realizations));

  parallel_tasks(realizations, jobs, [&](Index r) {
    const std::uint64_t task_seed = derive_seed(master, static_cast<std::uint64_t>(r));
    auto generate = [&](std::uint64_t s) {
      return family == "er" ? generate_er(n, er_p, s)
                            : generate_small_world(n, sw_k, sw_beta, s);
    };
    const Graph g = detail::connected_graph(generate, derive_seed(task_seed, detail::kStreamGraph),
                                            require_connected);
    const Graph gp = detail::connected_perturb(g, create_pct, destroy_pct,
                                               derive_seed(task_seed, detail::kStreamPerturb),
                                               require_connected);
    const KHopStack stack = khop_stack(g, max_taps - 1);
    const KHopStack stack_p = khop_stack(gp, max_taps - 1);

    TaskOut& out = results[static_cast<std::size_t>(r)];
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
      const Index taps = static_cast<Index>(k_values[ki]);
      const Vector h = random_coeffs(
          taps, derive_seed(derive_seed(task_seed, detail::kStreamCoeffs), ki));

      ParamString params;
      params.add("family", family).add("k", taps).add("r", r);

      RunRecord rec_gf{"filter-error", task_seed, params.str(), "err_gf", -1, 0.0, false};
      try {
        FilterSpec spec{FilterKind::classical, h, gso_choice};
        const FilterMatrix f_true = build_classical(g, spec);
        const FilterMatrix f_pert = build_classical(gp, spec);
        rec_gf.value = normalized_error(f_true, f_pert);
        out.err_gf.push_back(rec_gf.value);
      } catch (const NumericalError&) {
        rec_gf.diverged = true;
        out.err_gf.push_back(std::nullopt);
      }
      out.records.push_back(rec_gf);

      const FilterMatrix ngf_true = build_ngf(stack, h);
      const FilterMatrix ngf_pert = build_ngf(stack_p, h);
      const double err_ngf = normalized_error(ngf_true, ngf_pert);
      out.err_ngf.push_back(err_ngf);
      out.records.push_back(
          RunRecord{"filter-error", task_seed, params.str(), "err_ngf", -1, err_ngf, false});
    }
  });

  std::vector<RunRecord> records;
  for (const TaskOut& t : results) {
    records.insert(records.end(), t.records.begin(), t.records.end());
  }
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    ParamString params;
    params.add("family", family).add("k", static_cast<Index>(k_values[ki]));
    std::vector<double> gf, ngf;
    Index diverged = 0;
    for (const TaskOut& t : results) {
      if (t.err_gf[ki].has_value()) {
        gf.push_back(*t.err_gf[ki]);
      } else {
        ++diverged;
      }
      ngf.push_back(t.err_ngf[ki]);
    }
    auto aggregate = [&](const std::string& name, const std::vector<double>& v, bool use_median) {
      RunRecord rec{"filter-error", master, params.str(), name, -1, 0.0, v.empty()};
      if (!v.empty()) rec.value = use_median ? median(v) : mean(v);
      records.push_back(rec);
    };
    aggregate("median_err_gf", gf, true);
    aggregate("mean_err_gf", gf, false);
    aggregate("median_err_ngf", ngf, true);
    aggregate("mean_err_ngf", ngf, false);
    records.push_back(RunRecord{"filter-error", master, params.str(), "diverged_count", -1,
                                static_cast<double>(diverged), false});
  }
  return records;
}

// ---------------------------------------------------------------------------
// Signal denoising by early-stopped overfitting
// ---------------------------------------------------------------------------

inline Config denoise_config() {
  Config cfg;
  cfg.define("n", "256", "number of nodes");
  cfg.define("communities", "8", "equally-sized SBM communities");
  cfg.define("p_in", "0.3", "intra-community edge probability");
  cfg.define("p_out", "0.0075", "inter-community edge probability");
  cfg.define("require_connected", "true", "resample the SBM graph until connected");
  cfg.define("signals", "gf,ngf", "signal generators to test: gf | ngf");
  cfg.define("gen_taps", "4", "taps of the generating filter");
  cfg.define("gso", "adjacency", "GSO for classical filters: adjacency | laplacian");
  // The generator keeps its raw spectrum (sharp, near-bandlimited signals);
  // only the trainable operators are normalized for stable descent.
  cfg.define("gen_gso_normalize", "false", "normalize the signal generator's GSO");
  cfg.define("gso_normalize", "true", "normalize the architectures' operators");
  cfg.define("ngf_norm", "shared",
             "neighborhood-basis scaling when normalized: per-hop | shared");
  cfg.define("noise_powers", "0.1", "noise power list, relative to the unit-norm signal");
  cfg.define("archs", "adjacency,gf,ngf", "architectures: adjacency | gf | ngf");
  cfg.define("arch_taps", "4", "taps per network layer");
  cfg.define("input_dim", "64", "width of the random input matrix");
  cfg.define("hidden_dims", "24", "hidden feature widths (output width is 1)");
  cfg.define("coeff_mode", "learnable", "filter taps: fixed | learnable");
  cfg.define("epochs", "5000", "training epochs per realization");
  cfg.define("step", "0.02", "gradient descent step size");
  cfg.define("coeff_step_scale", "1.0", "constant step multiplier for filter taps");
  cfg.define("zero_last_init", "true", "start from a zero output layer (stable descent)");
  cfg.define("realizations", "50", "signal realizations per generator");
  cfg.define("record_curve", "true", "emit the median per-epoch error curve");
  cfg.define("seed", "1", "master seed");
  return cfg;
}

namespace detail {

inline NetworkSpec denoise_spec(Index input_dim, const std::vector<long long>& hidden,
                                OperatorKind op, CoeffMode mode, Index taps) {
  NetworkSpec spec;
  spec.feature_dims.push_back(input_dim);
  for (long long hdim : hidden) spec.feature_dims.push_back(static_cast<Index>(hdim));
  spec.feature_dims.push_back(1);
  for (std::size_t l = 0; l + 1 < spec.feature_dims.size(); ++l) {
    spec.layers.push_back(LayerSpec{op, mode, op == OperatorKind::adjacency ? 1 : taps});
  }
  spec.hidden = Activation::tanh;
  spec.head = OutputHead::identity;
  return spec;
}

inline OperatorKind parse_arch(const std::string& s) {
  if (s == "adjacency") return OperatorKind::adjacency;
  if (s == "gf") return OperatorKind::classical;
  if (s == "ngf") return OperatorKind::neighborhood;
  throw ConfigError("unknown architecture '" + s + "': expected adjacency, gf or ngf");
}

inline CoeffMode parse_coeff_mode_cfg(const std::string& s) {
  if (s == "fixed") return CoeffMode::fixed;
  if (s == "learnable") return CoeffMode::learnable;
  throw ConfigError("unknown coeff_mode '" + s + "': expected fixed or learnable");
}

inline HopNorm parse_hop_norm(const std::string& s, bool normalize) {
  if (!normalize) return HopNorm::none;
  if (s == "per-hop") return HopNorm::per_hop;
  if (s == "shared") return HopNorm::shared;
  throw ConfigError("unknown ngf_norm '" + s + "': expected per-hop or shared");
}

}  // namespace detail

/// Denoising study: diffuse a white signal through a random filter, add
/// white noise of the configured power, then fit each architecture to the
/// noisy observation from a random input. Records the per-realization
/// minimum error over epochs and (optionally) the median error curve.
inline std::vector<RunRecord> exp_denoise(const Config& cfg, int jobs = 1) {
  const Index n = cfg.get_int("n");
  const Index communities = cfg.get_int("communities");
  const double p_in = cfg.get_double("p_in");
  const double p_out = cfg.get_double("p_out");
  const bool require_connected = cfg.get_bool("require_connected");
  const auto signals = cfg.get_string_list("signals");
  const Index gen_taps = cfg.get_int("gen_taps");
  const GsoChoice gso_choice = detail::gso_choice_from(cfg, "gso", "gso_normalize");
  const bool gen_gso_normalize = cfg.get_bool("gen_gso_normalize");
  const auto noise_powers = cfg.get_double_list("noise_powers");
  const auto archs = cfg.get_string_list("archs");
  const Index arch_taps = cfg.get_int("arch_taps");
  const Index input_dim = cfg.get_int("input_dim");
  const auto hidden_dims = cfg.get_int_list("hidden_dims");
  const CoeffMode coeff_mode = detail::parse_coeff_mode_cfg(cfg.get_string("coeff_mode"));
  const Index epochs = cfg.get_int("epochs");
  const double step = cfg.get_double("step");
  const double coeff_step_scale = cfg.get_double("coeff_step_scale");
  const bool zero_last_init = cfg.get_bool("zero_last_init");
  const Index realizations = cfg.get_int("realizations");
  const bool record_curve = cfg.get_bool("record_curve");
  const std::uint64_t master = static_cast<std::uint64_t>(cfg.get_int("seed"));
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  for (const std::string& s : signals) {
    if (s != "gf" && s != "ngf") throw ConfigError("signals entries must be gf or ngf");
  }
  for (double p : noise_powers) {
    if (p < 0.0) throw ConfigError("noise_powers entries must be >= 0");
  }

  // One graph per run; realizations vary the signal, noise, input and init.
  const Graph g = detail::connected_graph(
      [&](std::uint64_t s) { return generate_sbm(n, communities, p_in, p_out, s).graph; },
      derive_seed(master, detail::kStreamGraph), require_connected);
  const KHopStack stack = khop_stack(g, std::max(gen_taps, arch_taps) - 1);

  std::vector<std::pair<std::string, LayerOperator>> arch_ops;
  for (const std::string& name : archs) {
    const OperatorKind kind = detail::parse_arch(name);
    switch (kind) {
      case OperatorKind::adjacency:
        arch_ops.emplace_back(name, LayerOperator::adjacency(g));
        break;
      case OperatorKind::classical:
        arch_ops.emplace_back(name, LayerOperator::classical(g, gso_choice, arch_taps));
        break;
      default:
        arch_ops.emplace_back(
            name, LayerOperator::neighborhood(
                      stack, arch_taps,
                      detail::parse_hop_norm(cfg.get_string("ngf_norm"), gso_choice.normalize)));
        break;
    }
  }

  struct CellOut {  // one (signal, power, arch, realization)
    std::optional<double> min_err;      // min over the (possibly partial) trace
    Index min_epoch = -1;
    bool diverged = false;              // training blew up after min_epoch
    std::vector<double> curve;          // err per epoch (empty if curves off)
  };
  const std::size_t cells_per_task = signals.size() * noise_powers.size() * arch_ops.size();
  std::vector<std::vector<CellOut>> results(
      static_cast<std::size_t>(realizations),
      std::vector<CellOut>(cells_per_task));

  parallel_tasks(realizations, jobs, [&](Index r) {
    const std::uint64_t task_seed = derive_seed(master, static_cast<std::uint64_t>(r));
    std::size_t cell = 0;
    for (std::size_t si = 0; si < signals.size(); ++si) {
      const std::uint64_t sig_seed = derive_seed(derive_seed(task_seed, detail::kStreamSignal), si);
      // Generating filter with fresh random taps for this realization.
      const Vector h_gen = random_coeffs(gen_taps, derive_seed(sig_seed, detail::kStreamCoeffs));
      Matrix h_mat;
      if (signals[si] == "gf") {
        GsoChoice gen_choice = gso_choice;
        gen_choice.normalize = gen_gso_normalize;
        h_mat = build_classical(g, FilterSpec{FilterKind::classical, h_gen, gen_choice}).m;
      } else {
        h_mat = build_ngf(stack, h_gen).m;
      }
      Rng sig_rng(derive_seed(sig_seed, detail::kStreamWhite));
      Vector x;
      do {
        Vector b(n);
        for (Index i = 0; i < n; ++i) b(i) = sig_rng.normal();
        x = h_mat * b;
      } while (x.norm() == 0.0);
      x /= x.norm();
      const double x_norm2 = 1.0;

      for (std::size_t pi = 0; pi < noise_powers.size(); ++pi) {
        const double power = noise_powers[pi];
        Rng noise_rng(derive_seed(derive_seed(sig_seed, detail::kStreamNoise), pi));
        Vector w = Vector::Zero(n);
        if (power > 0.0) {
          for (Index i = 0; i < n; ++i) w(i) = noise_rng.normal();
          w *= std::sqrt(power) / w.norm();  // exact noise power per realization
        }
        const Vector y = x + w;

        Rng input_rng(derive_seed(derive_seed(sig_seed, detail::kStreamInput), pi));
        Matrix z(n, input_dim);
        for (Index i = 0; i < n; ++i) {
          for (Index j = 0; j < input_dim; ++j) z(i, j) = input_rng.normal();
        }

        for (std::size_t ai = 0; ai < arch_ops.size(); ++ai, ++cell) {
          const OperatorKind kind = detail::parse_arch(arch_ops[ai].first);
          const NetworkSpec spec =
              detail::denoise_spec(input_dim, hidden_dims, kind, coeff_mode, arch_taps);
          const std::vector<LayerOperator> ops(spec.layers.size(), arch_ops[ai].second);

          CellOut& out = results[static_cast<std::size_t>(r)][cell];
          out.curve.reserve(static_cast<std::size_t>(epochs));
          TrainOptions opt;
          opt.epochs = epochs;
          opt.step_size = step;
          opt.coeff_step_scale = coeff_step_scale;
          opt.zero_last_layer = zero_last_init;
          opt.seed = derive_seed(derive_seed(sig_seed, detail::kStreamInit), (pi << 8) + ai);
          double best = std::numeric_limits<double>::infinity();
          Index best_epoch = -1;
          opt.on_epoch = [&](Index epoch, const Matrix& output, double, const NetworkState&) {
            const double err = (x - output.col(0)).squaredNorm() / x_norm2;
            out.curve.push_back(err);
            if (err < best) {
              best = err;
              best_epoch = epoch;
            }
            return true;
          };
          const TrainResult res = train(spec, ops, z, Target::mse(y), opt);
          out.diverged = res.diverged;
          if (best_epoch >= 0) {
            // A run that diverges after its best epoch still has an honest
            // minimum; the partial-trace min can only be pessimistic.
            out.min_err = best;
            out.min_epoch = best_epoch;
          }
        }
      }
    }
  });

  std::vector<RunRecord> records;
  // Per-realization rows first, then aggregates per (signal, power, arch).
  for (Index r = 0; r < realizations; ++r) {
    const std::uint64_t task_seed = derive_seed(master, static_cast<std::uint64_t>(r));
    std::size_t cell = 0;
    for (std::size_t si = 0; si < signals.size(); ++si) {
      for (std::size_t pi = 0; pi < noise_powers.size(); ++pi) {
        for (std::size_t ai = 0; ai < arch_ops.size(); ++ai, ++cell) {
          const CellOut& out = results[static_cast<std::size_t>(r)][cell];
          ParamString params;
          params.add("signal", signals[si])
              .add("noise", noise_powers[pi])
              .add("arch", arch_ops[ai].first)
              .add("r", r);
          RunRecord rec{"denoise", task_seed, params.str(), "min_err", -1, 0.0, !out.min_err};
          if (out.min_err) rec.value = *out.min_err;
          records.push_back(rec);
          records.push_back(RunRecord{"denoise", task_seed, params.str(), "min_err_epoch",
                                      -1, static_cast<double>(out.min_epoch), !out.min_err});
          records.push_back(RunRecord{"denoise", task_seed, params.str(), "train_diverged",
                                      -1, out.diverged ? 1.0 : 0.0, false});
        }
      }
    }
  }

  std::size_t cell = 0;
  for (std::size_t si = 0; si < signals.size(); ++si) {
    for (std::size_t pi = 0; pi < noise_powers.size(); ++pi) {
      for (std::size_t ai = 0; ai < arch_ops.size(); ++ai, ++cell) {
        ParamString params;
        params.add("signal", signals[si])
            .add("noise", noise_powers[pi])
            .add("arch", arch_ops[ai].first);
        std::vector<double> mins;
        Index diverged = 0;
        for (Index r = 0; r < realizations; ++r) {
          const CellOut& out = results[static_cast<std::size_t>(r)][cell];
          if (out.min_err) mins.push_back(*out.min_err);
          if (out.diverged) ++diverged;
        }
        RunRecord agg{"denoise", master, params.str(), "median_min_err", -1, 0.0, mins.empty()};
        if (!mins.empty()) agg.value = median(mins);
        records.push_back(agg);
        records.push_back(RunRecord{"denoise", master, params.str(), "diverged_count", -1,
                                    static_cast<double>(diverged), false});
        if (record_curve) {
          for (Index e = 0; e < epochs; ++e) {
            std::vector<double> at_epoch;
            for (Index r = 0; r < realizations; ++r) {
              const CellOut& out = results[static_cast<std::size_t>(r)][cell];
              if (e < static_cast<Index>(out.curve.size())) {
                at_epoch.push_back(out.curve[static_cast<std::size_t>(e)]);
              }
            }
            RunRecord rec{"denoise", master, params.str(), "median_err", e, 0.0,
                          at_epoch.empty()};
            if (!at_epoch.empty()) rec.value = median(at_epoch);
            records.push_back(rec);
          }
        }
      }
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Node classification (with optional topology perturbation sweep)
// ---------------------------------------------------------------------------

inline void define_classify_keys(Config& cfg) {
  cfg.define("dataset", "synthetic",
             "synthetic | cora | citeseer | pubmed | custom (content/cites paths)");
  cfg.define("content_path", "", "content file for dataset=custom");
  cfg.define("cites_path", "", "cites file for dataset=custom");
  cfg.define("data_dir", "", "directory holding <name>.content/<name>.cites; "
             "falls back to $NGF_DATA_DIR, then ./data");
  cfg.define("largest_cc_only", "true", "restrict citation datasets to the largest component");
  cfg.define("max_nodes", "0", "cap citation graphs at a connected BFS prefix (0 = off)");
  cfg.define("binarize_features", "true", "threshold real-valued features at > 0");
  cfg.define("n", "256", "synthetic: number of nodes");
  cfg.define("communities", "4", "synthetic: number of communities (= classes)");
  cfg.define("p_in", "0.3", "synthetic: intra-community edge probability");
  cfg.define("p_out", "0.0075", "synthetic: inter-community edge probability");
  cfg.define("require_connected", "true", "synthetic: resample the graph until connected");
  cfg.define("feature_mode", "onehot", "synthetic node features: onehot | normal");
  cfg.define("normal_dim", "32", "synthetic: feature width for feature_mode=normal");
  cfg.define("train_per_class", "20", "training nodes per class");
  cfg.define("val_count", "50", "validation nodes");
  cfg.define("test_count", "100", "test nodes");
  cfg.define("k_values", "2,4,6", "filter tap counts to sweep");
  cfg.define("kinds", "gf,ngf", "architectures: gf | ngf | adjacency");
  cfg.define("gso", "adjacency", "GSO for classical filters: adjacency | laplacian");
  cfg.define("gso_normalize", "true", "divide the GSO by its spectral radius");
  cfg.define("ngf_norm", "per-hop",
             "neighborhood-basis scaling when normalized: per-hop | shared");
  cfg.define("record_k2_variants", "true",
             "at K=2 also run the opposite gso_normalize setting");
  cfg.define("hidden_dims", "16", "hidden feature widths");
  cfg.define("coeff_mode", "learnable", "filter taps: fixed | learnable");
  cfg.define("epochs", "600", "maximum training epochs");
  cfg.define("step", "0.5", "gradient descent step size");
  cfg.define("patience", "50", "early-stopping patience on validation loss");
  cfg.define("realizations", "5", "independent seeds (graph for synthetic, split always)");
  cfg.define("seed", "1", "master seed");
}

inline Config classify_config() {
  Config cfg;
  define_classify_keys(cfg);
  return cfg;
}

inline Config perturb_classify_config() {
  Config cfg;
  define_classify_keys(cfg);
  cfg.define("perturb_pcts", "0,0.1,0.2,0.3",
             "edge fractions to remove and add (equal rates)");
  return cfg;
}

namespace detail {

struct ClassifyData {
  Graph graph;
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;
};

inline std::string dataset_file(const Config& cfg, const std::string& stem,
                                const std::string& ext) {
  std::string dir = cfg.get_string("data_dir");
  if (dir.empty()) {
    const char* env = std::getenv("NGF_DATA_DIR");
    dir = env != nullptr ? env : "data";
  }
  return dir + "/" + stem + "." + ext;
}

/// Citation data is shared by every task; synthetic graphs are drawn per
/// seed inside the tasks.
inline std::optional<ClassifyData> load_classify_dataset(const Config& cfg) {
  const std::string name = cfg.get_string("dataset");
  if (name == "synthetic") return std::nullopt;
  std::string content, cites;
  if (name == "custom") {
    content = cfg.get_string("content_path");
    cites = cfg.get_string("cites_path");
    if (content.empty() || cites.empty()) {
      throw ConfigError("dataset=custom requires content_path and cites_path");
    }
  } else if (name == "cora" || name == "citeseer" || name == "pubmed") {
    content = dataset_file(cfg, name, "content");
    cites = dataset_file(cfg, name, "cites");
  } else {
    throw ConfigError("unknown dataset '" + name + "'");
  }
  LoadOptions options;
  options.binarize = cfg.get_bool("binarize_features");
  options.largest_cc_only = cfg.get_bool("largest_cc_only");
  options.max_nodes = cfg.get_int("max_nodes");
  CitationDataset ds = load_citation(content, cites, options);
  ClassifyData data;
  data.graph = std::move(ds.graph);
  data.features = std::move(ds.features);
  data.labels = std::move(ds.labels);
  data.num_classes = static_cast<int>(ds.class_names.size());
  return data;
}

struct ClassifyCell {
  std::optional<double> accuracy;  // nullopt = diverged
  double best_val_loss = 0.0;
  Index best_epoch = -1;
};

/// Shared implementation of the classification experiments; exp_classify is
/// the perturbation sweep pinned at 0%, which keeps the two record-for-record
/// comparable at identical seeds.
inline std::vector<RunRecord> run_classification(const Config& cfg,
                                                 const std::vector<double>& perturb_pcts,
                                                 const std::string& experiment, int jobs) {
  const auto k_values = cfg.get_int_list("k_values");
  const auto kinds = cfg.get_string_list("kinds");
  const GsoChoice base_choice = detail::gso_choice_from(cfg, "gso", "gso_normalize");
  const bool record_k2_variants = cfg.get_bool("record_k2_variants");
  const auto hidden_dims = cfg.get_int_list("hidden_dims");
  const CoeffMode coeff_mode = parse_coeff_mode_cfg(cfg.get_string("coeff_mode"));
  const Index epochs = cfg.get_int("epochs");
  const double step = cfg.get_double("step");
  const Index patience = cfg.get_int("patience");
  const Index train_per_class = cfg.get_int("train_per_class");
  const Index val_count = cfg.get_int("val_count");
  const Index test_count = cfg.get_int("test_count");
  const Index realizations = cfg.get_int("realizations");
  const std::uint64_t master = static_cast<std::uint64_t>(cfg.get_int("seed"));
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  for (const std::string& kind : kinds) parse_arch(kind);

  Index max_taps = 1;
  for (long long k : k_values) {
    if (k < 2) throw ConfigError("k_values entries must be >= 2 for classification");
    max_taps = std::max<Index>(max_taps, k);
  }

  const std::optional<ClassifyData> shared = load_classify_dataset(cfg);

  // A run is (kind, K, gso-normalize variant); K=2 optionally runs both
  // normalize settings so the operator-identity comparison is on record.
  struct RunKey {
    std::string kind;
    Index taps;
    bool normalize;
  };
  std::vector<RunKey> run_keys;
  for (const std::string& kind : kinds) {
    for (long long k : k_values) {
      run_keys.push_back(RunKey{kind, static_cast<Index>(k), base_choice.normalize});
      if (record_k2_variants && k == 2) {
        run_keys.push_back(RunKey{kind, static_cast<Index>(k), !base_choice.normalize});
      }
    }
  }

  const std::size_t cells_per_task = perturb_pcts.size() * run_keys.size();
  std::vector<std::vector<ClassifyCell>> results(
      static_cast<std::size_t>(realizations),
      std::vector<ClassifyCell>(cells_per_task));

  parallel_tasks(realizations, jobs, [&](Index r) {
    const std::uint64_t task_seed = derive_seed(master, static_cast<std::uint64_t>(r));

    ClassifyData local;
    if (!shared) {
      const Index n = cfg.get_int("n");
      const Index communities = cfg.get_int("communities");
      SbmGraph sbm = connected_graph(
          [&](std::uint64_t s) {
            return generate_sbm(n, communities, cfg.get_double("p_in"),
                                cfg.get_double("p_out"), s);
          },
          derive_seed(task_seed, kStreamGraph), cfg.get_bool("require_connected"));
      local.graph = std::move(sbm.graph);
      local.labels = std::move(sbm.labels);
      local.num_classes = static_cast<int>(communities);
      const std::string feature_mode = cfg.get_string("feature_mode");
      if (feature_mode == "onehot") {
        local.features = Matrix::Identity(n, n);
      } else if (feature_mode == "normal") {
        const Index dim = cfg.get_int("normal_dim");
        Rng rng(derive_seed(task_seed, kStreamInput));
        local.features.resize(n, dim);
        for (Index i = 0; i < n; ++i) {
          for (Index j = 0; j < dim; ++j) local.features(i, j) = rng.normal();
        }
      } else {
        throw ConfigError("unknown feature_mode '" + feature_mode + "'");
      }
    }
    const ClassifyData& data = shared ? *shared : local;

    const SplitMasks masks =
        make_split(data.graph.num_nodes(), train_per_class, val_count, test_count, data.labels,
                   derive_seed(task_seed, kStreamSplit));
    const Target train_target = Target::cross_entropy(data.labels, masks.train);

    std::size_t cell = 0;
    for (std::size_t pi = 0; pi < perturb_pcts.size(); ++pi) {
      const double pct = perturb_pcts[pi];
      const Graph g_run =
          pct > 0.0 ? perturb(data.graph, pct, pct,
                              derive_seed(derive_seed(task_seed, kStreamPerturb), pi))
                    : data.graph;
      const KHopStack stack = khop_stack(g_run, max_taps - 1);

      for (std::size_t qi = 0; qi < run_keys.size(); ++qi, ++cell) {
        const RunKey& key = run_keys[qi];
        const OperatorKind kind = parse_arch(key.kind);
        GsoChoice choice = base_choice;
        choice.normalize = key.normalize;

        LayerOperator op =
            kind == OperatorKind::adjacency
                ? LayerOperator::adjacency(g_run)
                : kind == OperatorKind::classical
                      ? LayerOperator::classical(g_run, choice, key.taps)
                      : LayerOperator::neighborhood(
                            stack, key.taps,
                            parse_hop_norm(cfg.get_string("ngf_norm"), key.normalize));

        NetworkSpec spec;
        spec.feature_dims.push_back(data.features.cols());
        for (long long hdim : hidden_dims) spec.feature_dims.push_back(static_cast<Index>(hdim));
        spec.feature_dims.push_back(data.num_classes);
        for (std::size_t l = 0; l + 1 < spec.feature_dims.size(); ++l) {
          spec.layers.push_back(
              LayerSpec{kind, coeff_mode, kind == OperatorKind::adjacency ? 1 : key.taps});
        }
        spec.hidden = Activation::relu;
        spec.head = OutputHead::softmax;
        const std::vector<LayerOperator> ops(spec.layers.size(), op);

        // Init does not depend on the normalize variant or the perturbation,
        // so variant comparisons start from identical weights.
        TrainOptions opt;
        opt.epochs = epochs;
        opt.step_size = step;
        opt.seed = derive_seed(derive_seed(task_seed, kStreamInit),
                               (static_cast<std::uint64_t>(key.taps) << 8) +
                                   static_cast<std::uint64_t>(kind));

        double best_val = std::numeric_limits<double>::infinity();
        Index best_epoch = -1;
        Index since_best = 0;
        NetworkState best_state;
        opt.on_epoch = [&](Index epoch, const Matrix& output, double, const NetworkState& st) {
          const double val_loss = loss_cross_entropy(output, data.labels, masks.val);
          if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = epoch;
            since_best = 0;
            best_state.theta = st.theta;
            best_state.coeffs = st.coeffs;
          } else {
            ++since_best;
          }
          return since_best <= patience;
        };

        ClassifyCell& out = results[static_cast<std::size_t>(r)][cell];
        const TrainResult res = train(spec, ops, data.features, train_target, opt);
        if (res.diverged || best_epoch < 0) {
          out.accuracy = std::nullopt;
          continue;
        }
        best_state.h_mat.assign(spec.layers.size(), Matrix());
        const Matrix& probs = forward(spec, ops, best_state, data.features);
        Index correct = 0;
        for (Index i : masks.test) {
          Index argmax = 0;
          probs.row(i).maxCoeff(&argmax);
          if (static_cast<int>(argmax) == data.labels[static_cast<std::size_t>(i)]) ++correct;
        }
        out.accuracy = static_cast<double>(correct) / static_cast<double>(masks.test.size());
        out.best_val_loss = best_val;
        out.best_epoch = best_epoch;
      }
    }
  });

  std::vector<RunRecord> records;
  for (Index r = 0; r < realizations; ++r) {
    const std::uint64_t task_seed = derive_seed(master, static_cast<std::uint64_t>(r));
    std::size_t cell = 0;
    for (std::size_t pi = 0; pi < perturb_pcts.size(); ++pi) {
      for (const RunKey& key : run_keys) {
        const ClassifyCell& out = results[static_cast<std::size_t>(r)][cell++];
        ParamString params;
        params.add("pert", perturb_pcts[pi])
            .add("k", key.taps)
            .add("kind", key.kind)
            .add("normalize", key.normalize ? "true" : "false")
            .add("r", r);
        RunRecord acc{experiment, task_seed, params.str(), "test_accuracy", -1, 0.0,
                      !out.accuracy};
        if (out.accuracy) acc.value = *out.accuracy;
        records.push_back(acc);
        RunRecord ep{experiment, task_seed, params.str(), "best_epoch", -1,
                     static_cast<double>(out.best_epoch), !out.accuracy};
        records.push_back(ep);
        RunRecord vl{experiment, task_seed, params.str(), "best_val_loss", -1,
                     out.best_val_loss, !out.accuracy};
        records.push_back(vl);
      }
    }
  }
  for (std::size_t pi = 0; pi < perturb_pcts.size(); ++pi) {
    std::size_t qi = 0;
    for (const RunKey& key : run_keys) {
      ParamString params;
      params.add("pert", perturb_pcts[pi])
          .add("k", key.taps)
          .add("kind", key.kind)
          .add("normalize", key.normalize ? "true" : "false");
      std::vector<double> accs;
      Index diverged = 0;
      for (Index r = 0; r < realizations; ++r) {
        const ClassifyCell& out = results[static_cast<std::size_t>(r)][pi * run_keys.size() + qi];
        if (out.accuracy) {
          accs.push_back(*out.accuracy);
        } else {
          ++diverged;
        }
      }
      RunRecord agg{experiment, master, params.str(), "median_test_accuracy", -1, 0.0,
                    accs.empty()};
      if (!accs.empty()) agg.value = median(accs);
      records.push_back(agg);
      records.push_back(RunRecord{experiment, master, params.str(), "diverged_count", -1,
                                  static_cast<double>(diverged), false});
      ++qi;
    }
  }
  return records;
}

}  // namespace detail

/// Node classification accuracy as a function of the tap count.
inline std::vector<RunRecord> exp_classify(const Config& cfg, int jobs = 1) {
  return detail::run_classification(cfg, {0.0}, "classify", jobs);
}

/// Classification accuracy under increasing topology perturbation; filters
/// are rebuilt on the perturbed graph.
inline std::vector<RunRecord> exp_perturb_classify(const Config& cfg, int jobs = 1) {
  std::vector<double> pcts = cfg.get_double_list("perturb_pcts");
  for (double p : pcts) {
    if (p < 0.0 || p > 1.0) throw ConfigError("perturb_pcts entries must be in [0,1]");
  }
  return detail::run_classification(cfg, pcts, "perturb-sweep", jobs);
}

}  // namespace ngf
