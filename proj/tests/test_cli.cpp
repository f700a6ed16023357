// CLI smoke tests: drives the built binary through std::system and checks
// exit codes, artifacts and byte-level determinism. The binary path comes in
// as argv[1] (set by CTest).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_cli;
std::filesystem::path g_dir;

int run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " > " + (g_dir / "stdout.txt").string() +
                          " 2> " + (g_dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out_path(const std::string& name) { return (g_dir / name).string(); }

}  // namespace

TEST_CASE("gen-graph, khop and build-filter pipeline") {
  const std::string graph = out_path("g.edges");
  CHECK(run("gen-graph --model er -n 24 --p 0.2 --seed 3 --require-connected --out " + graph) == 0);
  CHECK(std::filesystem::exists(graph));

  CHECK(run("khop --graph " + graph + " --kmax 5 --out " + out_path("stack.csv")) == 0);
  const std::string stdout_text = slurp(g_dir / "stdout.txt");
  CHECK(stdout_text.find("diameter") != std::string::npos);
  CHECK(slurp(g_dir / "stack.csv").rfind("k,i,j\n", 0) == 0);

  CHECK(run("build-filter --graph " + graph + " --kind ngf --coeffs 0.5,0.3,0.2 --out " +
            out_path("f.csv")) == 0);
  CHECK(run("build-filter --graph " + graph +
            " --kind classical --gso adjacency --normalize --coeffs 0.5,0.5 --out " +
            out_path("fc.csv")) == 0);
}

TEST_CASE("sbm generation writes labels") {
  CHECK(run("gen-graph --model sbm -n 32 --communities 4 --p-in 0.5 --p-out 0.02 --seed 5 "
            "--out " + out_path("sbm.edges") + " --labels-out " + out_path("sbm.labels")) == 0);
  const std::string labels = slurp(g_dir / "sbm.labels");
  CHECK(labels.find("0\n") == 0);
  CHECK(labels.find("3") != std::string::npos);
}

TEST_CASE("exit codes: 1 for config errors, 2 for runtime failures") {
  CHECK(run("no-such-command") == 1);
  CHECK(run("gen-graph --model er -n 24 --p 0.2") == 1);  // missing --out
  CHECK(run("filter-error --out " + out_path("x.csv") + " --set bogus_key=1") == 1);
  CHECK(run("khop --graph /nonexistent.edges --kmax 2 --out " + out_path("x.csv")) == 2);
  CHECK(run("dataset-info --content /nonexistent --cites /nonexistent") == 2);
}

TEST_CASE("help lists config keys with defaults") {
  CHECK(run("filter-error --help") == 0);
  const std::string help = slurp(g_dir / "stdout.txt");
  CHECK(help.find("realizations") != std::string::npos);
  CHECK(help.find("perturb_create = 0.1") != std::string::npos);
  CHECK(run("--help") == 0);
  CHECK(run("denoise --help") == 0);
  CHECK(run("classify --help") == 0);
  CHECK(run("perturb-sweep --help") == 0);
}

TEST_CASE("filter-error runs are byte-identical across reruns and job counts") {
  const std::string base = "filter-error --set n=24 --set realizations=4 --set k_values=2,4 ";
  CHECK(run(base + "--out " + out_path("fe1.csv")) == 0);
  CHECK(run(base + "--out " + out_path("fe2.csv")) == 0);
  CHECK(run(base + "--jobs 3 --out " + out_path("fe3.csv")) == 0);
  const std::string a = slurp(g_dir / "fe1.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(g_dir / "fe2.csv"));
  CHECK(a == slurp(g_dir / "fe3.csv"));
  CHECK(a.rfind("experiment,seed,params,metric,epoch,value\n", 0) == 0);
}

TEST_CASE("config file plus override precedence") {
  const std::string cfg = out_path("fe.cfg");
  {
    std::ofstream out(cfg);
    out << "n = 24\nrealizations = 3\nk_values = 2\n";
  }
  CHECK(run("filter-error --config " + cfg + " --set realizations=2 --out " +
            out_path("fe_cfg.csv")) == 0);
  const std::string text = slurp(g_dir / "fe_cfg.csv");
  // 2 realizations x 1 K x 2 kinds + 5 aggregate rows + header
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 * 2 + 5 + 1);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-ngf-binary> [doctest args]\n");
    return 1;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "ngf_cli_test";
  std::filesystem::create_directories(g_dir);
  doctest::Context context;
  context.applyCommandLine(argc - 1, argv + 1);
  const int rc = context.run();
  std::filesystem::remove_all(g_dir);
  return rc;
}
