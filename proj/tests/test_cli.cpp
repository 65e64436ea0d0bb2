#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdcdyn/commands.hpp"
#include "rdcdyn/log.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rdcdyn;
namespace fs = std::filesystem;
using json = nlohmann::json;

#ifndef RDCDYN_CLI_PATH
#define RDCDYN_CLI_PATH "./rdcdyn"
#endif

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("rdcdyn_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(RDCDYN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

// The benchmark arc scenario as a config file.
std::string arc_config(const fs::path& out_dir, double angle,
                       const std::string& occupancies, int states = 2,
                       double noise = 1.0) {
  std::ostringstream os;
  os << "[structure]\n"
     << "source = helix:40\n"
     << "orientation = 61 106 74.5\n\n"
     << "[domains]\n"
     << "static = 2-23\n"
     << "dynamic = 26-40\n\n"
     << "[media]\n"
     << "m1 = 3e-4 5e-4 -8e-4 0 0 0\n"
     << "m2 = -4e-4 -6e-4 1e-3 40 50 -60\n\n"
     << "[dynamics]\n"
     << "state2 = phi:25:" << angle << "\n"
     << "occupancies = " << occupancies << "\n\n"
     << "[simulation]\n"
     << "noise_hz = " << noise << "\n"
     << "seed = 42\n\n"
     << "[solver]\n"
     << "states = " << states << "\n"
     << "starts = 64\n\n"
     << "[output]\n"
     << "directory = " << out_dir.string() << "\n";
  return os.str();
}

struct QuietLogs {
  QuietLogs() { set_log_quiet(true); }
  ~QuietLogs() { set_log_quiet(false); }
};

}  // namespace

TEST_CASE("config parsing: unknown keys and sections are rejected") {
  {
    std::istringstream in("[structure]\nsauce = helix:40\n");
    CHECK_THROWS_AS(RunConfig::parse(in), config_error);
  }
  {
    std::istringstream in("[nonsense]\nx = 1\n");
    CHECK_THROWS_AS(RunConfig::parse(in), config_error);
  }
  {
    std::istringstream in("x = 1\n");
    CHECK_THROWS_AS(RunConfig::parse(in), config_error);
  }
  {
    std::istringstream in("[dynamics]\nstate2 = phi:25:60\n"
                          "occupancies = 0.7 0.2\n");
    CHECK_THROWS_AS(RunConfig::parse(in), config_error);
  }
}

TEST_CASE("config parsing: full round trip through the resolved dump") {
  TempDir tmp("roundtrip");
  std::istringstream in(arc_config(tmp.path / "out", 60, "0.5 0.5"));
  const RunConfig cfg = RunConfig::parse(in);
  CHECK(cfg.media.size() == 2);
  CHECK(cfg.states.size() == 2);
  CHECK(cfg.states[1].size() == 1);
  CHECK(cfg.states[1][0].residue == 25);
  CHECK(cfg.occupancies == std::vector<double>{0.5, 0.5});

  std::ostringstream dumped;
  cfg.write_resolved(dumped);
  std::istringstream again(dumped.str());
  const RunConfig cfg2 = RunConfig::parse(again);
  std::ostringstream dumped2;
  cfg2.write_resolved(dumped2);
  CHECK(dumped.str() == dumped2.str());
}

TEST_CASE("simulate: per-medium files, truth manifest, determinism") {
  QuietLogs quiet;
  TempDir tmp("simulate");
  std::istringstream in(arc_config(tmp.path / "out1", 60, "0.5 0.5"));
  RunConfig cfg = RunConfig::parse(in);
  run_simulate(cfg);

  CHECK(fs::exists(tmp.path / "out1/rdc_m1.csv"));
  CHECK(fs::exists(tmp.path / "out1/rdc_m2.csv"));
  CHECK(fs::exists(tmp.path / "out1/state1.pdb"));
  CHECK(fs::exists(tmp.path / "out1/state2.pdb"));
  CHECK(fs::exists(tmp.path / "out1/truth.json"));
  CHECK(fs::exists(tmp.path / "out1/resolved_config.txt"));

  const json manifest = json::parse(read_file(tmp.path / "out1/truth.json"));
  CHECK(manifest["media"].size() == 2);
  CHECK(manifest["states"].size() == 2);
  CHECK(manifest["seed"] == 42);

  // Identical config + seed give byte-identical data artifacts.
  cfg.out_dir = tmp.path / "out2";
  run_simulate(cfg);
  CHECK(read_file(tmp.path / "out1/rdc_m1.csv") ==
        read_file(tmp.path / "out2/rdc_m1.csv"));
  CHECK(read_file(tmp.path / "out1/truth.json") ==
        read_file(tmp.path / "out2/truth.json"));
}

TEST_CASE("simulate: single-state and three-state configs") {
  QuietLogs quiet;
  TempDir tmp("simulate_n");
  {
    std::istringstream in(
        "[structure]\nsource = helix:30\n\n"
        "[domains]\nstatic = 2-12\ndynamic = 16-30\n\n"
        "[media]\nm1 = 3e-4 5e-4 -8e-4 0 0 0\n\n"
        "[dynamics]\nstate1 = identity\noccupancies = 1\n\n"
        "[simulation]\nnoise_hz = 0\nseed = 1\n\n"
        "[output]\ndirectory = " +
        (tmp.path / "single").string() + "\n");
    run_simulate(RunConfig::parse(in));
    CHECK(fs::exists(tmp.path / "single/rdc_m1.csv"));
  }
  {
    std::istringstream in(
        "[structure]\nsource = helix:40\norientation = 61 106 74.5\n\n"
        "[domains]\nstatic = 2-18\ndynamic = 22-40\n\n"
        "[media]\n"
        "m1 = 3e-4 5e-4 -8e-4 0 0 0\n"
        "m2 = 2e-4 5e-4 -7e-4 -40 -50 60\n"
        "m3 = -7e-4 -1e-4 8e-4 20 -40 20\n\n"
        "[dynamics]\n"
        "state2 = phi:20:30,psi:20:30\n"
        "state3 = phi:20:60\n"
        "occupancies = 50/25/25\n\n"
        "[simulation]\nnoise_hz = 1\nseed = 5\n\n"
        "[output]\ndirectory = " +
        (tmp.path / "three").string() + "\n");
    run_simulate(RunConfig::parse(in));
    CHECK(fs::exists(tmp.path / "three/rdc_m1.csv"));
    CHECK(fs::exists(tmp.path / "three/rdc_m2.csv"));
    CHECK(fs::exists(tmp.path / "three/rdc_m3.csv"));
    CHECK(fs::exists(tmp.path / "three/state3.pdb"));
  }
}

TEST_CASE("solve: benchmark scenario end to end with validation") {
  QuietLogs quiet;
  TempDir tmp("solve");
  const fs::path data = tmp.path / "data";
  {
    std::istringstream in(arc_config(data, 60, "0.5 0.5"));
    run_simulate(RunConfig::parse(in));
  }
  std::istringstream in(arc_config(tmp.path / "out", 60, "0.5 0.5"));
  RunConfig cfg = RunConfig::parse(in);
  cfg.rdc_files = {data / "rdc_m1.csv", data / "rdc_m2.csv"};
  run_solve(cfg);

  const json solution = json::parse(read_file(tmp.path / "out/solution.json"));
  CHECK(solution["n_states"] == 2);
  CHECK(solution["hz_minimum"].get<double>() <= 1.0);
  CHECK(solution.contains("degeneracy"));
  CHECK_FALSE(solution["degeneracy"]["flagged"].get<bool>());

  CHECK(fs::exists(tmp.path / "out/ensemble.pdb"));
  const json validation =
      json::parse(read_file(tmp.path / "out/validation.json"));
  CHECK(validation["pass"].get<bool>());
  for (const auto& s : validation["states"])
    CHECK(s["translation_rmsd"].get<double>() <= 2.0);

  // Deterministic re-run.
  const std::string first = read_file(tmp.path / "out/solution.json");
  cfg.out_dir = tmp.path / "out_again";
  run_solve(cfg);
  CHECK(read_file(tmp.path / "out_again/solution.json") == first);
}

TEST_CASE("solve: parsimonious escalation is logged in the attempts") {
  QuietLogs quiet;
  TempDir tmp("pars");
  const fs::path data = tmp.path / "data";
  {
    std::istringstream in(
        "[structure]\nsource = helix:40\norientation = 61 106 74.5\n\n"
        "[domains]\nstatic = 2-18\ndynamic = 22-40\n\n"
        "[media]\n"
        "m1 = 3e-4 5e-4 -8e-4 0 0 0\n"
        "m2 = 2e-4 5e-4 -7e-4 -40 -50 60\n"
        "m3 = -7e-4 -1e-4 8e-4 20 -40 20\n\n"
        "[dynamics]\n"
        "state2 = phi:20:30,psi:20:30\n"
        "state3 = phi:20:60\n"
        "occupancies = 50/25/25\n\n"
        "[simulation]\nnoise_hz = 1\nseed = 5\n\n"
        "[output]\ndirectory = " +
        data.string() + "\n");
    run_simulate(RunConfig::parse(in));
  }
  std::istringstream in(
      "[structure]\nsource = helix:40\norientation = 61 106 74.5\n\n"
      "[domains]\nstatic = 2-18\ndynamic = 22-40\n\n"
      "[media]\n"
      "m1 = 3e-4 5e-4 -8e-4 0 0 0\n"
      "m2 = 2e-4 5e-4 -7e-4 -40 -50 60\n"
      "m3 = -7e-4 -1e-4 8e-4 20 -40 20\n\n"
      "[dynamics]\n"
      "state2 = phi:20:30,psi:20:30\n"
      "state3 = phi:20:60\n"
      "occupancies = 50/25/25\n\n"
      "[simulation]\nnoise_hz = 1\nseed = 5\n\n"
      "[profile]\nrdc_files = " +
      (data / "rdc_m1.csv").string() + "," + (data / "rdc_m2.csv").string() +
      "," + (data / "rdc_m3.csv").string() +
      "\n\n"
      "[solver]\nparsimonious = true\nmax_states = 4\nstarts = 48\n\n"
      "[output]\ndirectory = " +
      (tmp.path / "out").string() + "\n");
  run_solve(RunConfig::parse(in));
  const json solution = json::parse(read_file(tmp.path / "out/solution.json"));
  CHECK(solution["n_states"] == 3);
  CHECK(solution["diagnostics"]["satisfied"].get<bool>());
  REQUIRE(solution["diagnostics"]["attempts"].size() >= 2);
  CHECK(solution["diagnostics"]["attempts"][0]["n"] == 2);
  CHECK_FALSE(solution["diagnostics"]["attempts"][0]["satisfied"].get<bool>());
  CHECK(solution["diagnostics"]["attempts"][1]["n"] == 3);
}

TEST_CASE("cli binary: profile command and exit codes") {
  TempDir tmp("binary");
  const fs::path data = tmp.path / "data";
  write_file(tmp.path / "sim.conf", arc_config(data, 60, "0.5 0.5"));
  CHECK(run_cli("simulate --config " + (tmp.path / "sim.conf").string() +
                " --quiet") == kExitOk);

  // Profile over the simulated data, N-H only.
  std::string profile_conf = arc_config(tmp.path / "prof", 60, "0.5 0.5");
  profile_conf += "\n[profile]\nrdc_files = " +
                  (data / "rdc_m1.csv").string() + "," +
                  (data / "rdc_m2.csv").string() + "\ntypes = N-H\n";
  write_file(tmp.path / "prof.conf", profile_conf);
  CHECK(run_cli("profile --config " + (tmp.path / "prof.conf").string() +
                " --quiet") == kExitOk);
  const json verdict = json::parse(read_file(tmp.path / "prof/verdict.json"));
  CHECK(verdict["forward"]["classification"] == "Anomalous");
  const int fwd_onset = verdict["forward"]["onset_residue"].get<int>();
  CHECK(fwd_onset >= 22);
  CHECK(fwd_onset <= 28);
  CHECK(verdict["backward"]["classification"] == "Anomalous");
  CHECK(fs::exists(tmp.path / "prof/profile_forward.csv"));
  CHECK(fs::exists(tmp.path / "prof/profile_backward.csv"));

  // Config error: unknown key.
  write_file(tmp.path / "bad.conf", "[structure]\nbogus = 1\n");
  CHECK(run_cli("solve --config " + (tmp.path / "bad.conf").string()) ==
        kExitConfig);

  // Infeasible: three states from two media.
  std::string infeasible = arc_config(data, 60, "0.5 0.5", /*states=*/3);
  infeasible += "\n[profile]\nrdc_files = " + (data / "rdc_m1.csv").string() +
                "," + (data / "rdc_m2.csv").string() + "\n";
  write_file(tmp.path / "infeasible.conf", infeasible);
  CHECK(run_cli("solve --config " + (tmp.path / "infeasible.conf").string() +
                " --quiet") == kExitInfeasible);

  // IO error: missing RDC file.
  std::string missing = arc_config(data, 60, "0.5 0.5");
  missing += "\n[profile]\nrdc_files = /nonexistent/rdc.csv\n";
  write_file(tmp.path / "missing.conf", missing);
  CHECK(run_cli("profile --config " + (tmp.path / "missing.conf").string()) ==
        kExitIo);
}

TEST_CASE("cli binary: static data yields a typical verdict") {
  TempDir tmp("static");
  const fs::path data = tmp.path / "data";
  // Single state, no dynamics.
  std::string sim =
      "[structure]\nsource = helix:40\norientation = 61 106 74.5\n\n"
      "[domains]\nstatic = 2-23\ndynamic = 26-40\n\n"
      "[media]\nm1 = 3e-4 5e-4 -8e-4 0 0 0\nm2 = -4e-4 -6e-4 1e-3 40 50 -60\n\n"
      "[dynamics]\nstate1 = identity\noccupancies = 1\n\n"
      "[simulation]\nnoise_hz = 1\nseed = 9\n\n"
      "[output]\ndirectory = " +
      data.string() + "\n";
  write_file(tmp.path / "sim.conf", sim);
  REQUIRE(run_cli("simulate --config " + (tmp.path / "sim.conf").string() +
                  " --quiet") == kExitOk);

  std::string prof = sim;
  prof.replace(prof.find(data.string()), data.string().size(),
               (tmp.path / "prof").string());
  prof += "\n[profile]\nrdc_files = " + (data / "rdc_m1.csv").string() + "," +
          (data / "rdc_m2.csv").string() + "\ntypes = N-H\n";
  write_file(tmp.path / "prof.conf", prof);
  REQUIRE(run_cli("profile --config " + (tmp.path / "prof.conf").string() +
                  " --quiet") == kExitOk);
  const json verdict = json::parse(read_file(tmp.path / "prof/verdict.json"));
  CHECK(verdict["forward"]["classification"] == "Typical");
  CHECK(verdict["backward"]["classification"] == "Typical");
}

TEST_CASE("sweep: small matrix with one infeasible-free run plus empty") {
  QuietLogs quiet;
  TempDir tmp("sweep");
  {
    std::istringstream in(arc_config(tmp.path / "empty", 60, "0.5 0.5"));
    RunConfig cfg = RunConfig::parse(in);
    run_sweep(cfg);  // no matrix: header-only CSV
    const std::string csv = read_file(tmp.path / "empty/sweep.csv");
    CHECK(csv.find("angle_deg,") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  }
  {
    std::string conf = arc_config(tmp.path / "grid", 60, "0.5 0.5");
    conf += "\n[sweep]\nangles = 60 30\noccupancies = 50/50 70/30\n";
    std::istringstream in(conf);
    RunConfig cfg = RunConfig::parse(in);
    cfg.starts = 32;
    run_sweep(cfg);
    const std::string csv = read_file(tmp.path / "grid/sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 cells
    CHECK(std::count(csv.begin(), csv.end(), ',') >= 24);
    // Every cell solved.
    CHECK(csv.find("error") == std::string::npos);
    CHECK(csv.find(",ok,") != std::string::npos);
  }
}
