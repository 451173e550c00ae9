#include <doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "twf/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string command = std::string(TWF_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buffer;
  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buffer.data(), buffer.size(), pipe))
    result.output += buffer.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("twf_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json read_json(const fs::path& p) { return json::parse(twf::io::read_file(p.string())); }

}  // namespace

TEST_CASE("recover solves a noiseless desk instance end to end") {
  TempDir tmp("recover");
  CliResult r = run_cli("recover --p 200 --m 2000 --k 10 --nsr 0 --seed 7 --out " +
                        tmp.path.string() + " --trace");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("relative_error=") != std::string::npos);

  json estimate = read_json(tmp.path / "estimate.json");
  CHECK(estimate["relative_error"].get<double>() <= 1e-3);
  CHECK(estimate["version"] == twf::kToolVersion);
  CHECK(estimate["config"]["p"] == 200);
  CHECK(estimate["estimate"].size() == 200);
  CHECK(estimate.contains("sample_size_advisory"));

  const std::string trace = twf::io::read_file((tmp.path / "trace.csv").string());
  CHECK(trace.rfind("iter,risk,tau,step_norm,support_size\n", 0) == 0);
  // T + 1 = 1001 records plus the header line.
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 1002);
}

TEST_CASE("recover propagates config errors as exit 2") {
  CliResult missing = run_cli("recover --config missing.cfg");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("missing.cfg") != std::string::npos);

  CliResult bad_mu = run_cli("recover --mu -1 --p 40 --m 100 --k 4");
  CHECK(bad_mu.exit_code == 2);
  CHECK(bad_mu.output.find("mu must be positive") != std::string::npos);

  CliResult bad_flag = run_cli("recover --not-a-flag 3");
  CHECK(bad_flag.exit_code == 2);
}

TEST_CASE("config files feed values, flags override, unknown keys name the line") {
  TempDir tmp("config");
  {
    std::ofstream cfg(tmp.path / "run.cfg");
    cfg << "# quick smoke configuration\n";
    cfg << "p = 100\n";
    cfg << "m = 600\n";
    cfg << "k = 5\n";
    cfg << "nsr = 0\n";
    cfg << "iters = 200\n";
  }
  CliResult r = run_cli("recover --config " + (tmp.path / "run.cfg").string() +
                        " --seed 3 --p 80 --out " + tmp.path.string());
  REQUIRE(r.exit_code == 0);
  json estimate = read_json(tmp.path / "estimate.json");
  CHECK(estimate["config"]["p"] == 80);   // flag beats file
  CHECK(estimate["config"]["m"] == 600);  // file beats default
  CHECK(estimate["config"]["iters"] == 200);

  {
    std::ofstream cfg(tmp.path / "bad.cfg");
    cfg << "p = 100\n";
    cfg << "sparsity = 5\n";
  }
  CliResult bad = run_cli("recover --config " + (tmp.path / "bad.cfg").string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("bad.cfg:2") != std::string::npos);
  CHECK(bad.output.find("sparsity") != std::string::npos);
}

TEST_CASE("saved instances reload to the identical estimate") {
  TempDir tmp("instance");
  const std::string inst = (tmp.path / "problem.twf").string();
  CliResult first =
      run_cli("recover --p 60 --m 500 --k 5 --nsr 0.3 --seed 11 --iters 300"
              " --save-instance " + inst + " --out " + (tmp.path / "a").string());
  REQUIRE(first.exit_code == 0);
  CliResult second =
      run_cli("recover --instance " + inst + " --nsr 0.3 --iters 300 --seed 11"
              " --out " + (tmp.path / "b").string());
  REQUIRE(second.exit_code == 0);
  json a = read_json(tmp.path / "a" / "estimate.json");
  json b = read_json(tmp.path / "b" / "estimate.json");
  CHECK(a["relative_error"] == b["relative_error"]);
  CHECK(a["estimate"] == b["estimate"]);
}

TEST_CASE("figures quick beta sweep emits 13 deterministic grid points") {
  TempDir tmp("figures");
  const std::string base = "figures --which beta --preset quick --trials 1 "
                           "--iters 120 --seed 5 --out ";
  CliResult r = run_cli(base + (tmp.path / "a").string() + " --workers 2");
  REQUIRE(r.exit_code == 0);

  const std::string csv =
      twf::io::read_file((tmp.path / "a" / "figure_beta.csv").string());
  CHECK(csv.rfind("axis_value,trial,error,seed,wallclock_ms\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);  // header + 13 points

  json doc = read_json(tmp.path / "a" / "figure_beta.json");
  CHECK(doc["points"].size() == 13);
  CHECK(doc["spec"]["fixed"]["iterations"] == 120);

  const std::string svg =
      twf::io::read_file((tmp.path / "a" / "figure_beta.svg").string());
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("thresholding parameter beta") != std::string::npos);

  // Byte-identical across a rerun with a different worker count.
  CliResult rerun = run_cli(base + (tmp.path / "b").string() + " --workers 1");
  REQUIRE(rerun.exit_code == 0);
  for (const std::string name :
       {"figure_beta.json", "figure_beta.csv", "figure_beta.svg"})
    CHECK(twf::io::read_file((tmp.path / "a" / name).string()) ==
          twf::io::read_file((tmp.path / "b" / name).string()));
}

TEST_CASE("sweep command writes artifacts for an explicit grid") {
  TempDir tmp("sweep");
  CliResult r = run_cli(
      "sweep --axis nsr --grid 0,0.5 --trials 2 --p 60 --m 400 --k 5 "
      "--iters 100 --seed 9 --workers 2 --timing --out " + tmp.path.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(tmp.path / "sweep_nsr.json"));
  CHECK(fs::exists(tmp.path / "sweep_nsr.csv"));
  CHECK(fs::exists(tmp.path / "sweep_nsr_timing.csv"));
  json doc = read_json(tmp.path / "sweep_nsr.json");
  CHECK(doc["points"].size() == 2);

  CliResult missing_axis = run_cli("sweep --grid 0,1");
  CHECK(missing_axis.exit_code == 2);
}

TEST_CASE("selftest filters suites and honours the fault hook") {
  CliResult one = run_cli("selftest --suite threshold-contract --seed 5");
  CHECK(one.exit_code == 0);
  CHECK(one.output.find("PASS threshold-contract") != std::string::npos);
  CHECK(one.output.find("gradient") == std::string::npos);

  CliResult fault =
      run_cli("selftest --suite threshold-contract --inject-fault "
              "threshold-contract --seed 5");
  CHECK(fault.exit_code == 1);
  CHECK(fault.output.find("FAIL threshold-contract") != std::string::npos);
  CHECK(fault.output.find("first failure: threshold-contract") !=
        std::string::npos);

  CliResult unknown = run_cli("selftest --suite nonsense");
  CHECK(unknown.exit_code == 2);
}
