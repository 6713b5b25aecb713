#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBin = SCATTERLAB_BIN;

fs::path temp_root() {
  const fs::path root = fs::temp_directory_path() / "scatterlab_cli_tests";
  fs::create_directories(root);
  return root;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& stderr_to = {}) {
  std::string cmd = kBin + " " + args;
  if (!stderr_to.empty()) cmd += " 2> " + stderr_to.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("spectrum subcommand: one root per gap for a single scatterer") {
  const fs::path dir = temp_root() / "spectrum";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "spectrum",
    "seed": 3,
    "geometry": {"kind": "torus", "dim": 2, "size": 6.283185307179586},
    "process": {"count": 1, "phase_t": 0.0},
    "first_gap": 0,
    "gap_count": 12,
    "samples": 1
  })");
  const int code = run_cli("spectrum --config " + (dir / "config.json").string() +
                           " --out-dir " + dir.string());
  REQUIRE(code == 0);
  const std::string records = read_file(dir / "records.csv");
  // comment + header + 12 rows
  int lines = 0;
  for (char c : records) lines += c == '\n';
  CHECK(lines == 14);
  CHECK(records.find("# config_hash=") == 0);
  CHECK(records.find("gap_index") != std::string::npos);
  CHECK(fs::exists(dir / "resolved_config.json"));
  CHECK(fs::exists(dir / "summary.json"));
  const std::string summary = read_file(dir / "summary.json");
  CHECK(summary.find("config_hash") != std::string::npos);
  CHECK(summary.find("wall_time_seconds") != std::string::npos);
}

TEST_CASE("reruns are byte identical and worker count does not matter") {
  const fs::path dir = temp_root() / "repro";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "spectrum",
    "seed": 11,
    "process": {"count": 3, "phase_t": 0.4},
    "first_gap": 2,
    "gap_count": 5,
    "samples": 3
  })");
  const std::string cfg = (dir / "config.json").string();
  for (const char* workers : {"1", "4", "16"}) {
    const fs::path out = dir / (std::string("w") + workers);
    fs::create_directories(out);
    REQUIRE(run_cli("spectrum --config " + cfg + " --workers " + workers +
                    " --out-dir " + out.string()) == 0);
  }
  const std::string w1 = read_file(dir / "w1" / "records.csv");
  const std::string w4 = read_file(dir / "w4" / "records.csv");
  const std::string w16 = read_file(dir / "w16" / "records.csv");
  CHECK(w1 == w4);
  CHECK(w1 == w16);

  // rerun into a fresh directory: byte identical again
  const fs::path again = dir / "again";
  fs::create_directories(again);
  REQUIRE(run_cli("spectrum --config " + cfg + " --out-dir " + again.string()) ==
          0);
  CHECK(read_file(again / "records.csv") == w1);
}

TEST_CASE("unknown config keys are rejected with a machine-readable error") {
  const fs::path dir = temp_root() / "badkey";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "spectrum",
    "seed": 1,
    "gap_cout": 5
  })");
  const fs::path err = dir / "stderr.json";
  const int code = run_cli("spectrum --config " + (dir / "config.json").string() +
                               " --out-dir " + dir.string(),
                           err);
  CHECK(code == 2);
  const std::string message = read_file(err);
  CHECK(message.find("gap_cout") != std::string::npos);
  CHECK(message.find("\"code\":2") != std::string::npos);
}

TEST_CASE("experiment kind must match the subcommand") {
  const fs::path dir = temp_root() / "mismatch";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({"experiment": "lattice"})");
  const fs::path err = dir / "stderr.json";
  const int code = run_cli("spectrum --config " + (dir / "config.json").string(),
                           err);
  CHECK(code == 2);
}

TEST_CASE("lattice sweep emits a monotone X column with exact counts") {
  const fs::path dir = temp_root() / "lattice";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "lattice",
    "mode": "circle",
    "x_min": 100.0,
    "x_max": 1000000.0,
    "points": 12
  })");
  REQUIRE(run_cli("lattice --config " + (dir / "config.json").string() +
                  " --out-dir " + dir.string()) == 0);
  std::ifstream in(dir / "records.csv");
  std::string line;
  std::getline(in, line);  // hash comment
  std::getline(in, line);  // header
  CHECK(line == "x,count,residual");
  double prev_x = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const double x = std::stod(field);
    CHECK(x > prev_x);
    prev_x = x;
    ++rows;
  }
  CHECK(rows == 12);
}

TEST_CASE("jsonl format produces one JSON object per record") {
  const fs::path dir = temp_root() / "jsonl";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "lattice",
    "mode": "annulus",
    "x_min": 100.0,
    "x_max": 1000.0,
    "points": 4,
    "delta": 0.17,
    "frequencies": [[1, 0]]
  })");
  REQUIRE(run_cli("lattice --config " + (dir / "config.json").string() +
                  " --out-dir " + dir.string() + " --format jsonl") == 0);
  std::ifstream in(dir / "records.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.front() == '{');
    CHECK(line.find("\"lambda\":") != std::string::npos);
    CHECK(line.find("\"generic\":") != std::string::npos);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("seed override changes the resolved config and the hash") {
  const fs::path dir = temp_root() / "seedover";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "lattice",
    "mode": "circle",
    "points": 2
  })");
  const std::string cfg = (dir / "config.json").string();
  const fs::path a = dir / "a";
  const fs::path b = dir / "b";
  fs::create_directories(a);
  fs::create_directories(b);
  REQUIRE(run_cli("lattice --config " + cfg + " --out-dir " + a.string()) == 0);
  REQUIRE(run_cli("lattice --config " + cfg + " --seed 99 --out-dir " +
                  b.string()) == 0);
  const std::string ra = read_file(a / "resolved_config.json");
  const std::string rb = read_file(b / "resolved_config.json");
  CHECK(ra != rb);
  CHECK(rb.find("99") != std::string::npos);
}

TEST_CASE("field dump writes grid rows with coordinates") {
  const fs::path dir = temp_root() / "field";
  fs::create_directories(dir);
  write_file(dir / "config.json", R"({
    "experiment": "field",
    "seed": 4,
    "process": {"count": 2, "phase_t": 0.0},
    "gap_index": 3,
    "root_rank": 0,
    "grid": 16
  })");
  REQUIRE(run_cli("field --config " + (dir / "config.json").string() +
                  " --out-dir " + dir.string()) == 0);
  std::ifstream in(dir / "records.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "x,y,value");
  int rows = 0;
  while (std::getline(in, line)) {
    // |psi|^2 column is nonnegative
    const auto comma = line.rfind(',');
    CHECK(std::stod(line.substr(comma + 1)) >= 0.0);
    ++rows;
  }
  CHECK(rows == 16 * 16);
}
