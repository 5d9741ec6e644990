#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "holesim/results.hpp"

namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
[scenario]
id = "cli"
seed = 5
duration_s = 200

[grid]
width = 200
height = 200
cell_side = 10
subregion_side = 100

[nodes]
count = 30
initial_energy_j = 0.2
r_l = 30
r_s = 50
)";

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("holesim_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "small.toml") << kSmall;
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

const Workdir& work() {
  static Workdir w;
  return w;
}

// Runs the CLI with stderr captured; returns the exit status.
int cli(const std::string& args, std::string* err = nullptr) {
  const std::string errfile = work().path("stderr.txt");
  const std::string cmd = std::string(HOLESIM_CLI) + " " + args + " 2> " + errfile;
  const int status = std::system(cmd.c_str());
  if (err) {
    std::ifstream in(errfile);
    std::stringstream ss;
    ss << in.rdbuf();
    *err = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

holesim::CsvTable table(const std::string& path) {
  std::ifstream in(path);
  return holesim::read_csv(in);
}

}  // namespace

TEST_CASE("run prints a versioned CSV row and repeats exactly") {
  const std::string cfg = work().path("small.toml");
  REQUIRE(cli("run " + cfg + " --seed 42 --out " + work().path("a.csv")) == 0);
  REQUIRE(cli("run " + cfg + " --seed 42 --out " + work().path("b.csv")) == 0);
  const std::string a = slurp(work().path("a.csv"));
  CHECK(a == slurp(work().path("b.csv")));
  CHECK(a.rfind("# holesim-results v1 prng=mt19937_64/splitmix64-fnv1a\n", 0) == 0);
  const auto t = table(work().path("a.csv"));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][*t.column("seed")] == "42");
  CHECK(t.columns == holesim::csv_columns());
}

TEST_CASE("run writes a JSON-lines trace with the resolved config") {
  const std::string trace = work().path("trace.jsonl");
  REQUIRE(cli("run " + work().path("small.toml") + " --protocol baseline --out " + work().path("t.csv") +
              " --trace " + trace) == 0);
  std::ifstream in(trace);
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto meta = nlohmann::json::parse(line);
  CHECK(meta["type"] == "meta");
  CHECK(meta["protocol"] == "baseline");
  CHECK(meta["config"]["meta"]["prng"] == "mt19937_64/splitmix64-fnv1a");
  CHECK(meta["config"]["nodes"]["count"] == 30);
  int events = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("t"));
    CHECK(j.contains("event"));
    ++events;
  }
  CHECK(events > 0);
}

TEST_CASE("sweep produces the Cartesian product in canonical order") {
  const std::string out = work().path("sweep.csv");
  REQUIRE(cli("sweep " + work().path("small.toml") + " --nodes 20,40 --seeds 2 --protocols proposed,baseline --out " +
              out) == 0);
  const auto t = table(out);
  REQUIRE(t.rows.size() == 8);
  const std::size_t p = *t.column("protocol"), n = *t.column("n_nodes"), s = *t.column("seed");
  const char* want[8][3] = {{"baseline", "20", "5"}, {"baseline", "20", "6"}, {"baseline", "40", "5"},
                            {"baseline", "40", "6"}, {"proposed", "20", "5"}, {"proposed", "20", "6"},
                            {"proposed", "40", "5"}, {"proposed", "40", "6"}};
  for (int i = 0; i < 8; ++i) {
    CHECK(t.rows[i][p] == want[i][0]);
    CHECK(t.rows[i][n] == want[i][1]);
    CHECK(t.rows[i][s] == want[i][2]);
  }
}

TEST_CASE("sweep output does not depend on the worker count") {
  const std::string cfg = work().path("small.toml");
  REQUIRE(cli("sweep " + cfg + " --failures 25,50 --seeds 3 --jobs 1 --out " + work().path("j1.csv")) == 0);
  REQUIRE(cli("sweep " + cfg + " --failures 25,50 --seeds 3 --jobs 8 --out " + work().path("j8.csv")) == 0);
  CHECK(slurp(work().path("j1.csv")) == slurp(work().path("j8.csv")));
  const auto t = table(work().path("j1.csv"));
  CHECK(t.rows.size() == 12);
  CHECK(t.rows[0][*t.column("failure_pct")] == "25.000000000");
}

TEST_CASE("plot is deterministic and validates its inputs") {
  const std::string csv = work().path("sweep.csv");
  REQUIRE(fs::exists(csv));
  REQUIRE(cli("plot " + csv + " --metric avg_energy_j --out " + work().path("p1.svg")) == 0);
  REQUIRE(cli("plot " + csv + " --metric avg_energy_j --out " + work().path("p2.svg")) == 0);
  const std::string svg = slurp(work().path("p1.svg"));
  CHECK(svg == slurp(work().path("p2.svg")));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polygon") != std::string::npos);

  std::string err;
  CHECK(cli("plot " + csv + " --metric nonsense --out " + work().path("p3.svg"), &err) == 1);
  CHECK(err.find("nonsense") != std::string::npos);
  CHECK(err.find("avg_energy_j") != std::string::npos);
  CHECK_FALSE(fs::exists(work().path("p3.svg")));
}

TEST_CASE("single-row plot has a point and no band") {
  REQUIRE(cli("run " + work().path("small.toml") + " --out " + work().path("one.csv")) == 0);
  REQUIRE(cli("plot " + work().path("one.csv") + " --metric load_balance --out " + work().path("one.svg")) == 0);
  const std::string svg = slurp(work().path("one.svg"));
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("<polygon") == std::string::npos);
}

TEST_CASE("exit codes") {
  std::string err;
  CHECK(cli("run /nonexistent/x.toml", &err) == 1);
  CHECK(err.find("cannot read") != std::string::npos);

  std::ofstream(work().path("bad.toml")) << "[scenario]\nseed = 1\n[nodes]\ncolour = 3\n";
  CHECK(cli("run " + work().path("bad.toml"), &err) == 1);
  CHECK(err.find("unknown key nodes.colour") != std::string::npos);
  CHECK(err.find("missing required key scenario.duration_s") != std::string::npos);

  std::ofstream(work().path("syntax.toml")) << "[scenario\n";
  CHECK(cli("run " + work().path("syntax.toml"), &err) == 1);
  CHECK(err.find("line 1") != std::string::npos);

  CHECK(cli("frobnicate") == 1);
  CHECK(cli("run " + work().path("small.toml") + " --protocol magic") == 1);
  CHECK(cli("sweep " + work().path("small.toml") + " --failures 120") == 1);
  CHECK(cli("sweep " + work().path("small.toml")) == 1);
  CHECK(cli("--help > /dev/null") == 0);
}
