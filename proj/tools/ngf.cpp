// Command-line front end: graph generation, hop stacks, filter construction
// and the experiment sweeps, all emitting deterministic text artifacts.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "ngf/checkpoint.hpp"
#include "ngf/config.hpp"
#include "ngf/datasets.hpp"
#include "ngf/experiments.hpp"
#include "ngf/filters.hpp"
#include "ngf/generators.hpp"
#include "ngf/io.hpp"
#include "ngf/khop.hpp"

namespace {

using namespace ngf;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ExperimentCli {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  int jobs = 1;
};

void add_experiment_flags(CLI::App* sub, ExperimentCli& opts, const Config& schema) {
  sub->add_option("--config", opts.config_path, "config file (key = value lines)");
  sub->add_option("--out", opts.out_path, "output CSV path")->required();
  sub->add_option("--set", opts.overrides,
                  "config override key=value (repeatable, wins over the file)");
  sub->add_option("--jobs", opts.jobs, "worker threads; output is identical for any value")
      ->default_val(1);
  sub->footer("Config keys (defaults shown):\n" + schema.describe());
}

Config resolve_config(Config cfg, const ExperimentCli& opts) {
  if (!opts.config_path.empty()) cfg.load_file(opts.config_path);
  for (const std::string& o : opts.overrides) cfg.apply_override(o);
  return cfg;
}

void write_records(const std::string& path, const std::vector<RunRecord>& records) {
  atomic_write(path, [&](std::ostream& out) { write_records_csv(records, out); });
  std::cout << records.size() << " records -> " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ngf: neighborhood graph filters, polynomial graph filters and "
               "graph-filter networks"};
  app.require_subcommand(1);

  std::function<void()> action;

  // ---- gen-graph ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-graph", "generate a random graph as an edge list");
  {
    struct {
      std::string model, out, labels_out;
      Index n = 64;
      double p = 0.15, p_in = 0.3, p_out = 0.0075, beta = 0.15;
      Index communities = 4, k_ring = 4;
      std::uint64_t seed = 1;
      bool require_connected = false;
    } static o;
    gen->add_option("--model", o.model, "er | sbm | small-world")->required();
    gen->add_option("-n,--nodes", o.n, "number of nodes")->default_val(64);
    gen->add_option("--p", o.p, "er edge probability")->default_val(0.15);
    gen->add_option("--communities", o.communities, "sbm communities")->default_val(4);
    gen->add_option("--p-in", o.p_in, "sbm intra-community probability")->default_val(0.3);
    gen->add_option("--p-out", o.p_out, "sbm inter-community probability")->default_val(0.0075);
    gen->add_option("--k-ring", o.k_ring, "small-world ring degree (even)")->default_val(4);
    gen->add_option("--beta", o.beta, "small-world rewiring probability")->default_val(0.15);
    gen->add_option("--seed", o.seed, "rng seed")->default_val(1);
    gen->add_flag("--require-connected", o.require_connected,
                  "resample until the graph is connected");
    gen->add_option("--out", o.out, "edge list output path")->required();
    gen->add_option("--labels-out", o.labels_out, "sbm community labels output (one per line)");
    gen->callback([&] {
      action = [&] {
        std::vector<int> labels;
        auto make = [&](std::uint64_t s) -> Graph {
          if (o.model == "er") return generate_er(o.n, o.p, s);
          if (o.model == "small-world") return generate_small_world(o.n, o.k_ring, o.beta, s);
          if (o.model == "sbm") {
            SbmGraph sbm = generate_sbm(o.n, o.communities, o.p_in, o.p_out, s);
            labels = std::move(sbm.labels);
            return std::move(sbm.graph);
          }
          throw ConfigError("unknown model '" + o.model + "'");
        };
        Graph g = detail::connected_graph(make, o.seed, o.require_connected);
        atomic_write(o.out, [&](std::ostream& out) { write_edge_list(g, out); });
        if (!o.labels_out.empty()) {
          if (labels.empty()) throw ConfigError("--labels-out only applies to --model sbm");
          atomic_write(o.labels_out, [&](std::ostream& out) {
            for (int l : labels) out << l << "\n";
          });
        }
        std::cout << "graph with " << g.num_nodes() << " nodes, " << g.num_edges()
                  << " edges -> " << o.out << "\n";
      };
    });
  }

  // ---- khop ---------------------------------------------------------------
  auto* khop = app.add_subcommand("khop", "hop-adjacency stack of a graph");
  {
    struct {
      std::string graph, out;
      Index kmax = 0;
    } static o;
    khop->add_option("--graph", o.graph, "edge list path")->required();
    khop->add_option("--kmax", o.kmax, "largest hop to materialize")->required();
    khop->add_option("--out", o.out, "output CSV (k,i,j per set entry)")->required();
    khop->callback([&] {
      action = [&] {
        const Graph g = load_edge_list(o.graph);
        const KHopStack stack = khop_stack(g, o.kmax);
        atomic_write(o.out, [&](std::ostream& out) {
          out << "k,i,j\n";
          const Index top = std::min<Index>(o.kmax, stack.diameter);
          for (Index k = 0; k <= top; ++k) {
            const BitMatrix& m = stack.mats[static_cast<std::size_t>(k)];
            for (Index i = 0; i < m.rows(); ++i) {
              m.for_each_in_row(i, [&](Index j) { out << k << "," << i << "," << j << "\n"; });
            }
          }
        });
        std::cout << "diameter " << stack.diameter << ", "
                  << component_count(stack.components) << " component(s), wrote hops 0.."
                  << std::min<Index>(o.kmax, stack.diameter) << " -> " << o.out << "\n";
      };
    });
  }

  // ---- build-filter -------------------------------------------------------
  auto* build = app.add_subcommand("build-filter", "materialize a graph filter as dense CSV");
  {
    struct {
      std::string graph, kind = "classical", coeffs, coeffs_file, gso = "adjacency", out;
      bool normalize = false;
    } static o;
    build->add_option("--graph", o.graph, "edge list path")->required();
    build->add_option("--kind", o.kind, "classical | ngf")->default_val("classical");
    build->add_option("--coeffs", o.coeffs, "taps as comma-separated values");
    build->add_option("--coeffs-file", o.coeffs_file, "taps as a one-line CSV file");
    build->add_option("--gso", o.gso, "adjacency | laplacian (classical only)")
        ->default_val("adjacency");
    build->add_flag("--normalize", o.normalize, "divide the GSO by its spectral radius");
    build->add_option("--out", o.out, "output CSV path")->required();
    build->callback([&] {
      action = [&] {
        if (o.coeffs.empty() == o.coeffs_file.empty()) {
          throw ConfigError("give exactly one of --coeffs / --coeffs-file");
        }
        const Vector h = o.coeffs.empty() ? load_coeffs(o.coeffs_file) : parse_coeffs(o.coeffs);
        const Graph g = load_edge_list(o.graph);
        GsoChoice choice;
        if (o.gso == "adjacency") {
          choice.kind = GsoKind::adjacency;
        } else if (o.gso == "laplacian") {
          choice.kind = GsoKind::laplacian;
        } else {
          throw ConfigError("--gso must be adjacency or laplacian");
        }
        choice.normalize = o.normalize;
        Matrix m;
        if (o.kind == "classical") {
          m = build_classical(g, FilterSpec{FilterKind::classical, h, choice}).m;
        } else if (o.kind == "ngf") {
          m = build_ngf(khop_stack(g, h.size() - 1), h, g).m;
        } else {
          throw ConfigError("--kind must be classical or ngf");
        }
        atomic_write(o.out, [&](std::ostream& out) { write_matrix_csv(m, out); });
        std::cout << "filter " << m.rows() << "x" << m.cols() << " -> " << o.out << "\n";
      };
    });
  }

  // ---- dataset-info -------------------------------------------------------
  auto* info = app.add_subcommand("dataset-info", "load a citation dataset and print metrics");
  {
    struct {
      std::string content, cites;
      bool raw_features = false;
    } static o;
    info->add_option("--content", o.content, "content file path")->required();
    info->add_option("--cites", o.cites, "cites file path")->required();
    info->add_flag("--raw-features", o.raw_features, "keep real-valued features");
    info->callback([&] {
      action = [&] {
        LoadOptions options;
        options.binarize = !o.raw_features;
        LoadReport report;
        const CitationDataset ds = load_citation(o.content, o.cites, options, &report);
        const GraphMetrics metrics = graph_metrics(ds.graph);
        std::cout << "nodes " << report.nodes << "\n"
                  << "features " << report.features << "\n"
                  << "classes " << report.classes << "\n"
                  << "edges " << report.edges << "\n"
                  << "dropped_citations " << report.dropped_citations << "\n"
                  << "self_citations " << report.self_citations << "\n"
                  << "duplicate_citations " << report.duplicate_citations << "\n"
                  << "components " << report.component_count << "\n"
                  << "largest_cc " << metrics.largest_cc_size << "\n"
                  << "diameter " << metrics.diameter << "\n"
                  << "radius " << metrics.radius << "\n";
      };
    });
  }

  // ---- experiment sweeps ----------------------------------------------------
  static ExperimentCli fe_cli, dn_cli, cl_cli, ps_cli;
  auto* fe = app.add_subcommand("filter-error",
                                "filter discrepancy vs taps under perturbation");
  add_experiment_flags(fe, fe_cli, filter_error_config());
  fe->callback([&] {
    action = [&] {
      write_records(fe_cli.out_path,
                    exp_filter_error(resolve_config(filter_error_config(), fe_cli), fe_cli.jobs));
    };
  });

  auto* dn = app.add_subcommand("denoise", "signal denoising by early-stopped overfitting");
  add_experiment_flags(dn, dn_cli, denoise_config());
  dn->callback([&] {
    action = [&] {
      write_records(dn_cli.out_path,
                    exp_denoise(resolve_config(denoise_config(), dn_cli), dn_cli.jobs));
    };
  });

  auto* cl = app.add_subcommand("classify", "node classification accuracy vs taps");
  add_experiment_flags(cl, cl_cli, classify_config());
  cl->callback([&] {
    action = [&] {
      write_records(cl_cli.out_path,
                    exp_classify(resolve_config(classify_config(), cl_cli), cl_cli.jobs));
    };
  });

  auto* ps = app.add_subcommand("perturb-sweep",
                                "classification accuracy vs topology perturbation");
  add_experiment_flags(ps, ps_cli, perturb_classify_config());
  ps->callback([&] {
    action = [&] {
      write_records(ps_cli.out_path, exp_perturb_classify(
                                         resolve_config(perturb_classify_config(), ps_cli),
                                         ps_cli.jobs));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
