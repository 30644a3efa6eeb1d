#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sls/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sls_bin() {
  const char* bin = std::getenv("SLS_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "SLS_BIN must point at the sls binary");
  return bin;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sls_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int counter() {
    static int n = 0;
    return n++;
  }
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      sls_bin() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, fast run: 64-point grid, 10 us pulse.
const char* kTinyRun = R"(
[physical]
pulse_duration = 1e-5
[numerics]
grid_points = 64
n_orders = 5
)";

}  // namespace

TEST_CASE("run with zero pump exits cleanly and writes a dark trace") {
  TempDir dir;
  write_file(dir.path / "c.ini",
             std::string(kTinyRun) + "[physical]\npump_power = 0\n");
  const int rc = run_cli("run --config " + (dir.path / "c.ini").string() +
                             " --out " + dir.path.string(),
                         dir.path / "log.txt");
  CHECK(rc == 0);

  const sls::SimulationTrace tr =
      sls::read_trace_csv((dir.path / "trace.csv").string());
  for (double f : tr.flux) CHECK(f == 0.0);
  CHECK(fs::exists(dir.path / "summary.json"));
}

TEST_CASE("run then analyze reproduces the summary metrics exactly") {
  TempDir dir;
  write_file(dir.path / "c.ini", kTinyRun);
  REQUIRE(run_cli("run --config " + (dir.path / "c.ini").string() + " --out " +
                      dir.path.string(),
                  dir.path / "log.txt") == 0);

  const int rc = run_cli("analyze " + (dir.path / "trace.csv").string(),
                         dir.path / "analyze.json");
  REQUIRE(rc == 0);

  const json from_analyze = json::parse(slurp(dir.path / "analyze.json"));
  const json summary = json::parse(slurp(dir.path / "summary.json"));
  CHECK(from_analyze.at("metrics_raw") == summary.at("metrics_raw"));
  CHECK(from_analyze.at("metrics_filtered") == summary.at("metrics_filtered"));
}

TEST_CASE("rerun from summary is bit-identical") {
  TempDir dir;
  write_file(dir.path / "c.ini", kTinyRun);
  REQUIRE(run_cli("run --config " + (dir.path / "c.ini").string() + " --out " +
                      (dir.path / "a").string(),
                  dir.path / "log1.txt") == 0);
  REQUIRE(run_cli("run --from-summary " + (dir.path / "a/summary.json").string() +
                      " --out " + (dir.path / "b").string(),
                  dir.path / "log2.txt") == 0);
  CHECK(slurp(dir.path / "a/trace.csv") == slurp(dir.path / "b/trace.csv"));
}

TEST_CASE("set overrides reach the summary and snapshots are written") {
  TempDir dir;
  write_file(dir.path / "c.ini", kTinyRun);
  const int rc = run_cli(
      "run --config " + (dir.path / "c.ini").string() + " --out " +
          dir.path.string() +
          " --set physical.atom_number=2e5 --snapshots 5e-6 --no-filter",
      dir.path / "log.txt");
  REQUIRE(rc == 0);
  const json summary = json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary.at("physical").at("atom_number") == 2e5);
  CHECK(summary.at("output").at("filter") == false);
  CHECK(fs::exists(dir.path / "snapshot_matter_0.csv"));
  CHECK(fs::exists(dir.path / "snapshot_light_0.csv"));

  const sls::SimulationTrace tr =
      sls::read_trace_csv((dir.path / "trace.csv").string());
  for (size_t i = 0; i < tr.flux.size(); ++i) {
    CHECK(tr.filtered_flux[i] == tr.flux[i]);
  }
}

TEST_CASE("config errors exit with code 2") {
  TempDir dir;
  write_file(dir.path / "bad.ini", "[physical]\nbogus_key = 1\n");
  CHECK(run_cli("run --config " + (dir.path / "bad.ini").string() + " --out " +
                    dir.path.string(),
                dir.path / "log.txt") == 2);

  write_file(dir.path / "sat.ini",
             std::string(kTinyRun) + "[physical]\npump_power = 10\n");
  CHECK(run_cli("run --config " + (dir.path / "sat.ini").string() + " --out " +
                    dir.path.string(),
                dir.path / "log2.txt") == 2);

  CHECK(run_cli("run --out " + dir.path.string(), dir.path / "log3.txt") == 2);
}

TEST_CASE("truncated ladder exits with the solver code") {
  TempDir dir;
  // R = 2.15e3 1/s with only three momentum orders: the truncation guard
  // must abort the run.
  write_file(dir.path / "kd.ini", R"(
[physical]
pump_power = 7.97e-7
pulse_duration = 1e-4
[numerics]
grid_points = 128
n_orders = 3
)");
  const int rc = run_cli("run --config " + (dir.path / "kd.ini").string() +
                             " --out " + dir.path.string(),
                         dir.path / "log.txt");
  CHECK(rc == 3);
  const std::string log = slurp(dir.path / "log.txt");
  CHECK(log.find("n_orders") != std::string::npos);
}

TEST_CASE("analyze rejects malformed traces") {
  TempDir dir;
  write_file(dir.path / "c.ini", kTinyRun);
  REQUIRE(run_cli("run --config " + (dir.path / "c.ini").string() + " --out " +
                      dir.path.string(),
                  dir.path / "log.txt") == 0);

  // Truncate the last row mid-field.
  std::string csv = slurp(dir.path / "trace.csv");
  write_file(dir.path / "broken.csv", csv.substr(0, csv.size() - 17));
  CHECK(run_cli("analyze " + (dir.path / "broken.csv").string(),
                dir.path / "log2.txt") == 2);

  write_file(dir.path / "alien.csv", "a,b,c\n1,2,3\n");
  CHECK(run_cli("analyze " + (dir.path / "alien.csv").string(),
                dir.path / "log3.txt") == 2);

  // A dark trace has no pulse to fit.
  write_file(dir.path / "dark.ini",
             std::string(kTinyRun) + "[physical]\npump_power = 0\n");
  REQUIRE(run_cli("run --config " + (dir.path / "dark.ini").string() +
                      " --out " + (dir.path / "dark").string(),
                  dir.path / "log4.txt") == 0);
  CHECK(run_cli("analyze " + (dir.path / "dark/trace.csv").string(),
                dir.path / "log5.txt") == 3);
}

TEST_CASE("sweep requires values and writes combined outputs") {
  TempDir dir;
  write_file(dir.path / "empty.ini",
             std::string(kTinyRun) + "[sweep]\nparameter = pump_power\n");
  CHECK(run_cli("sweep --config " + (dir.path / "empty.ini").string() +
                    " --out " + dir.path.string(),
                dir.path / "log.txt") == 2);

  write_file(dir.path / "s.ini", std::string(kTinyRun) +
                                     "[sweep]\nparameter = pump_power\n"
                                     "values = 8e-8, 1.6e-7\nworkers = 2\n");
  const int rc = run_cli("sweep --config " + (dir.path / "s.ini").string() +
                             " --out " + dir.path.string(),
                         dir.path / "log2.txt");
  CHECK(rc == 0);
  CHECK(fs::exists(dir.path / "sweep_metrics.csv"));
  CHECK(fs::exists(dir.path / "sweep_fits.json"));
  CHECK(fs::exists(dir.path / "trace_000.csv"));
  CHECK(fs::exists(dir.path / "trace_001.csv"));
  CHECK(fs::exists(dir.path / "summary_001.json"));

  const std::string metrics = slurp(dir.path / "sweep_metrics.csv");
  CHECK(metrics.find("ok") != std::string::npos);
}
