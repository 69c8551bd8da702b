#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ancientflow_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Drives the real binary through the shell so stdout, stderr, and the exit
// code can be checked independently. env_prefix lands before the command.
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  TempDir scratch;
  fs::path out_file = scratch.path / "stdout.txt";
  fs::path err_file = scratch.path / "stderr.txt";
  std::string cmd = env_prefix + "\"" ANCIENTFLOW_BIN "\" " + args + " > \"" + out_file.string() +
                    "\" 2> \"" + err_file.string() + "\"";
  int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

// Numeric rows of a CSV file, header skipped.
std::vector<std::vector<double>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("shrinker subcommand writes the full artifact set") {
    TempDir dir;
    RunResult r =
        run_cli("shrinker --alpha 0.0625 --k 3 --n-grid 256 --out " + quoted(dir.path));
    CHECK(r.code == 0);
    CHECK(r.out.find("r_star=") != std::string::npos);
    for (const char* name :
         {"shrinker_profile.csv", "theta_table.csv", "shrinker.json", "shrinker.svg"})
      CHECK(fs::exists(dir.path / name));

    json meta = json::parse(slurp(dir.path / "shrinker.json"));
    CHECK(meta["k"].get<int>() == 3);
    CHECK(meta["n_grid"].get<int>() == 256);
    CHECK(meta["alpha"].get<double>() == doctest::Approx(0.0625));
    CHECK(meta["residual"].get<double>() < 1e-9);
    CHECK(meta["r_star"].get<double>() > 1.0);
    CHECK(meta["area"].get<double>() > 0.0);

    auto rows = csv_rows(dir.path / "shrinker_profile.csv");
    CHECK(rows.size() == 256);
    CHECK(rows[0].size() == 4);
  }

  TEST_CASE("invalid shrinker parameters exit with the domain code") {
    TempDir dir;
    // alpha outside the existence window for threefold symmetry
    RunResult r = run_cli("shrinker --alpha 0.2 --k 3 --out " + quoted(dir.path));
    CHECK(r.code == 2);
    json err = json::parse(r.err);
    CHECK(err["error"].get<std::string>() == "DomainError");

    RunResult r2 = run_cli("shrinker --alpha 0.05 --k 2 --out " + quoted(dir.path));
    CHECK(r2.code == 2);
    CHECK(json::parse(r2.err)["error"].get<std::string>() == "DomainError");
  }

  TEST_CASE("shape shrinker without a symmetry order is rejected") {
    TempDir dir;
    RunResult r =
        run_cli("entropy --alpha 0.0625 --shape shrinker --n-grid 64 --out " + quoted(dir.path));
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"].get<std::string>() == "DomainError");
  }

  TEST_CASE("circle spectrum matches the closed form eigenvalues") {
    TempDir dir;
    const double alpha = 0.0625;
    RunResult r = run_cli("spectrum --alpha 0.0625 --shape circle --modes 13 --n-grid 64 --out " +
                          quoted(dir.path));
    CHECK(r.code == 0);

    // Ascending: l = 0 once, each l >= 1 twice.
    std::vector<double> expected;
    expected.push_back(alpha * (0 - 1) - 1);
    for (int l = 1; l <= 6; ++l) {
      expected.push_back(alpha * (l * l - 1) - 1);
      expected.push_back(alpha * (l * l - 1) - 1);
    }
    auto rows = csv_rows(dir.path / "spectrum.csv");
    REQUIRE(rows.size() == 13);
    for (size_t i = 0; i < rows.size(); ++i)
      CHECK(std::abs(rows[i][1] - expected[i]) < 1e-8);

    json meta = json::parse(slurp(dir.path / "spectrum.json"));
    CHECK(meta["morse_index"].get<int>() == 9);
    CHECK(meta["kernel_dim"].get<int>() == 0);
    CHECK(meta["all_pass"].get<bool>() == true);
    CHECK(fs::exists(dir.path / "eigenfunctions.csv"));
  }

  TEST_CASE("repeated runs produce byte-identical artifacts") {
    TempDir dir1, dir2;
    std::string args = "spectrum --alpha 0.0625 --shape circle --modes 8 --n-grid 64 --out ";
    CHECK(run_cli(args + quoted(dir1.path)).code == 0);
    CHECK(run_cli(args + quoted(dir2.path)).code == 0);
    for (const char* name : {"spectrum.csv", "eigenfunctions.csv", "spectrum.json"})
      CHECK(slurp(dir1.path / name) == slurp(dir2.path / name));
  }

  TEST_CASE("entropy of a round circle is zero") {
    TempDir dir;
    RunResult r = run_cli("entropy --alpha 0.5 --radius 2 --n-grid 64 --out " + quoted(dir.path));
    CHECK(r.code == 0);
    json meta = json::parse(slurp(dir.path / "entropy.json"));
    CHECK(std::abs(meta["value"].get<double>()) < 1e-8);
    CHECK(std::abs(meta["center"][0].get<double>()) < 1e-4);
    CHECK(std::abs(meta["center"][1].get<double>()) < 1e-4);
    CHECK(meta["shape"].get<std::string>() == "circle");
  }

  TEST_CASE("evolve writes trajectory artifacts with monotone entropy") {
    TempDir dir;
    RunResult r = run_cli(
        "evolve --alpha 1 --radius 1 --t-end 0.1 --snapshot-interval 0.05 --n-grid 64 --out " +
        quoted(dir.path));
    CHECK(r.code == 0);
    for (const char* name : {"trajectory.csv", "snapshots.csv", "flow.svg", "evolve.json"})
      CHECK(fs::exists(dir.path / name));
    json meta = json::parse(slurp(dir.path / "evolve.json"));
    CHECK(meta["entropy_nonincreasing"].get<bool>() == true);
    REQUIRE(meta["times"].size() == 3);
    CHECK(meta["times"][0].get<double>() == doctest::Approx(0.0));
    CHECK(meta["times"][2].get<double>() == doctest::Approx(0.1));
    auto rows = csv_rows(dir.path / "trajectory.csv");
    REQUIRE(rows.size() == 3);
    // shrinking circle: min curvature radius decreases
    CHECK(rows[2][2] < rows[0][2]);
  }

  TEST_CASE("evolving a collapsing circle reports extinction") {
    TempDir dir;
    RunResult r = run_cli("evolve --alpha 1 --radius 0.5 --t-end 0.2 --n-grid 64 --out " +
                          quoted(dir.path));
    CHECK(r.code == 3);
    json err = json::parse(r.err);
    CHECK(err["error"].get<std::string>() == "Extinction");
  }

  TEST_CASE("ancient run with a zero seed stays on the shrinker") {
    TempDir dir;
    json cfg = {{"alpha", 0.0625},
                {"k_or_circle", "circle"},
                {"a", std::vector<double>(9, 0.0)},
                {"N", 64},
                {"T_max", 2.0}};
    fs::path cfg_path = dir.path / "run.json";
    std::ofstream(cfg_path) << cfg.dump();

    RunResult r = run_cli("ancient --config " + quoted(cfg_path) + " --out " + quoted(dir.path));
    CHECK(r.code == 0);
    for (const char* name :
         {"mode_coefficients.csv", "ancient_snapshots.csv", "ancient.svg", "ancient.json"})
      CHECK(fs::exists(dir.path / name));
    json meta = json::parse(slurp(dir.path / "ancient.json"));
    CHECK(meta["morse_index"].get<int>() == 9);
    CHECK(meta["sup_v"].get<double>() < 1e-12);
    CHECK(meta["pde_residual"].get<double>() < 1e-10);
    CHECK(meta["T_shift"].get<double>() == 0.0);
    CHECK(meta["rates"].empty());
  }

  TEST_CASE("unknown run config keys are rejected") {
    TempDir dir;
    json cfg = {{"alpha", 0.0625},
                {"k_or_circle", "circle"},
                {"a", std::vector<double>(9, 0.0)},
                {"bogus", 1}};
    fs::path cfg_path = dir.path / "run.json";
    std::ofstream(cfg_path) << cfg.dump();
    RunResult r = run_cli("ancient --config " + quoted(cfg_path) + " --out " + quoted(dir.path));
    CHECK(r.code == 2);
    json err = json::parse(r.err);
    CHECK(err["error"].get<std::string>() == "DomainError");
    CHECK(err["message"].get<std::string>().find("bogus") != std::string::npos);
  }

  TEST_CASE("verify subcommand runs a filtered check cleanly") {
    TempDir dir;
    RunResult r =
        run_cli("verify --filter error-expansion --n-grid 64 --out " + quoted(dir.path));
    CHECK(r.code == 0);
    CHECK(r.out.find("[PASS] error-expansion") != std::string::npos);
    json rep = json::parse(slurp(dir.path / "verify.json"));
    REQUIRE(rep["checks"].size() == 1);
    CHECK(rep["checks"][0]["name"].get<std::string>() == "error-expansion");
    CHECK(rep["checks"][0]["pass"].get<bool>() == true);
    CHECK(rep["all_pass"].get<bool>() == true);
    // timings stay on the console; the report carries only the verdicts
    CHECK(!rep["checks"][0].contains("seconds"));
  }

  TEST_CASE("fault injection makes exactly the targeted check fail") {
    TempDir dir;
    RunResult r = run_cli("verify --filter error-expansion --inject-fault e-sign --n-grid 64 --out " +
                          quoted(dir.path));
    CHECK(r.code == 1);
    CHECK(r.out.find("[FAIL] error-expansion") != std::string::npos);
    json rep = json::parse(slurp(dir.path / "verify.json"));
    CHECK(rep["checks"][0]["pass"].get<bool>() == false);
  }

  TEST_CASE("nonmatching verify filter is an error") {
    TempDir dir;
    RunResult r = run_cli("verify --filter no-such-check --n-grid 64 --out " + quoted(dir.path));
    CHECK(r.code == 1);
    CHECK(r.err.find("no checks matched") != std::string::npos);
  }

  TEST_CASE("environment output directory overrides the flag") {
    TempDir flag_dir, env_dir;
    RunResult r = run_cli("entropy --alpha 0.5 --radius 1 --n-grid 64 --out " + quoted(flag_dir.path),
                          "ANCIENTFLOW_OUT=" + quoted(env_dir.path) + " ");
    CHECK(r.code == 0);
    CHECK(fs::exists(env_dir.path / "entropy.json"));
    CHECK(!fs::exists(flag_dir.path / "entropy.json"));
  }
}
