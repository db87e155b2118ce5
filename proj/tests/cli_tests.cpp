// Drives the installed command-line binary end to end: exit codes, output
// formats, determinism of written files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mdiqpq/analysis.hpp"
#include "mdiqpq/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "mdiqpq_cli_tests";

struct CommandResult {
  int exit_code = -1;
  std::string stdout_text;
};

CommandResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  fs::create_directories(kWorkDir);
  const fs::path out = kWorkDir / "stdout.txt";
  const std::string cmd = env_prefix + std::string(MDIQPQ_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + (kWorkDir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  result.stdout_text = ss.str();
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("table command prints the normalized corner cell") {
  const auto r = run_cli("table --dim 3 --gamma1 0.7854 --gamma2 0.7854 --normalized");
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find(",|0>,|1>,|2>,|0'>,|1'>,|2'>") == 0);
  CHECK(r.stdout_text.find("|0>,0.500000000000") != std::string::npos);
}

TEST_CASE("table command covers the DFT and qubit variants") {
  const auto fourier = run_cli("table --dim 3 --fourier --normalized");
  REQUIRE(fourier.exit_code == 0);
  CHECK(fourier.stdout_text.find("0.166666666667") != std::string::npos);
  CHECK(fourier.stdout_text.find("0.500000000000") != std::string::npos);

  const auto qubit = run_cli("table --dim 2 --theta 0.5236");
  REQUIRE(qubit.exit_code == 0);
  // Cell (|0>, |0'>) = sin^2(pi/6)/2.
  std::istringstream lines(qubit.stdout_text);
  std::string header, row0;
  std::getline(lines, header);
  std::getline(lines, row0);
  CHECK(header == ",|0>,|1>,|0'>,|1'>");
  CHECK(row0.find("|0>,") == 0);
  CHECK(row0.find("0.125000") != std::string::npos);

  const auto middle = run_cli("table --dim 3 --middle --gamma1 1.5707963 --gamma2 1.5707963 --normalized");
  REQUIRE(middle.exit_code == 0);
  CHECK(middle.stdout_text.find(",|0''>,|1''>,|2''>") == 0);

  const auto as_json = run_cli("table --dim 2 --theta 0.5 --format json");
  REQUIRE(as_json.exit_code == 0);
  const json j = json::parse(as_json.stdout_text);
  CHECK(j["col_labels"].size() == 4);
}

TEST_CASE("scan command emits the documented header and dominance") {
  const auto r = run_cli("scan --step 0.19634954084936207");  // pi/16
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.stdout_text);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "gamma1,gamma2,p,p_prime_g1,p_prime_g2,in_R1,in_R2,p_c_mid,p0,p1,qber_expected");
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) {
    ++rows;
    double g1, g2, p, pp1, pp2, pcm, p0, p1, qe;
    int r1, r2;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%d,%d,%lf,%lf,%lf,%lf", &g1, &g2,
                        &p, &pp1, &pp2, &r1, &r2, &pcm, &p0, &p1, &qe) == 11);
    REQUIRE(pcm > p);
    REQUIRE(p0 < p1);
  }
  CHECK(rows == 8 * 8);
}

TEST_CASE("simulate emits observed and expected values side by side") {
  const auto r = run_cli(
      "simulate --dim 3 --gamma1 1.56 --gamma2 1.56 --rounds 100000 --seed 7");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.stdout_text);
  const double expected = mdiqpq::honest_rate_qutrit(1.56, 1.56);
  CHECK(j["conclusive_rate_expected"].get<double>() ==
        doctest::Approx(expected).epsilon(1e-12));
  const double observed = j["conclusive_rate"].get<double>();
  const double retained = j["retained"].get<double>();
  CHECK(std::abs(observed - expected) < 3.0 * std::sqrt(0.25 / retained));
  CHECK(j["qber_observed"].get<double>() == 0.0);
  CHECK_FALSE(j["detected"].get<bool>());
}

TEST_CASE("attack detects the qubit probe substitution") {
  const auto r = run_cli(
      "attack --dim 2 --theta 0.7854 --rounds 100000 --seed 7 --threshold 0.25");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.stdout_text);
  CHECK(j["detected"].get<bool>());
  CHECK(j["qber_observed"].get<double>() == doctest::Approx(0.5).epsilon(0.05));
  CHECK(j["qber_expected"].get<double>() == 0.5);
  CHECK(j["mode"].get<std::string>() == "qubit-middle-state");
}

TEST_CASE("query retrieves the requested bit") {
  fs::create_directories(kWorkDir);
  const fs::path db = kWorkDir / "db.txt";
  {
    std::ofstream f(db);
    for (int i = 0; i < 64; ++i) f << (i % 3 == 0 ? '1' : '0');
  }
  const auto r = run_cli("query --dim 3 --gamma1 1.0 --gamma2 1.0 --db " + db.string() +
                         " --index 17 --seed 3");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.stdout_text);
  CHECK(j["correct"].get<bool>());
  CHECK(j["recovered_bit"].get<int>() == j["expected_bit"].get<int>());
  CHECK(j["database_size"].get<int>() == 64);
}

TEST_CASE("query aborts with the restart exit status when no bit is usable") {
  fs::create_directories(kWorkDir);
  const fs::path db = kWorkDir / "db_abort.txt";
  {
    std::ofstream f(db);
    f << "0101";
  }
  // Find a seed whose single round leaves no usable conclusive position.
  const mdiqpq::ProtocolParams params = mdiqpq::ProtocolParams::qubit(0.7854);
  std::uint64_t abort_seed = 0;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 300 && !found; ++seed) {
    mdiqpq::SiftResult res = mdiqpq::run_sift(params, 1, mdiqpq::BobStrategy::Honest, seed);
    if (res.stats.retained == 0) {
      abort_seed = seed;
      found = true;
    }
  }
  REQUIRE(found);
  const auto r = run_cli("query --dim 2 --theta 0.7854 --db " + db.string() +
                         " --index 1 --rounds 1 --seed " + std::to_string(abort_seed));
  CHECK(r.exit_code == 4);
}

TEST_CASE("exit codes distinguish usage and domain errors") {
  CHECK(run_cli("tables").exit_code == 2);             // unknown subcommand
  CHECK(run_cli("simulate --rounds 10").exit_code == 2);  // missing required seed
  CHECK(run_cli("table --dim 3 --gamma1 9.0").exit_code == 3);
  CHECK(run_cli("simulate --dim 3 --gamma1 0.0 --gamma2 1.0 --seed 1").exit_code == 3);
  CHECK(run_cli("attack --dim 3 --gamma1 1.0 --gamma2 1.0 --fourier --seed 1").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("identical invocations write identical files") {
  fs::create_directories(kWorkDir);
  const fs::path out1 = kWorkDir / "sim1.json";
  const fs::path out2 = kWorkDir / "sim2.json";
  const std::string args = "simulate --dim 2 --theta 0.9 --rounds 20000 --seed 99 --out ";
  REQUIRE(run_cli(args + out1.string()).exit_code == 0);
  REQUIRE(run_cli(args + out2.string()).exit_code == 0);
  const std::string a = slurp(out1), b = slurp(out2);
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);

  const fs::path scan1 = kWorkDir / "scan1.csv";
  const fs::path scan2 = kWorkDir / "scan2.csv";
  REQUIRE(run_cli("scan --step 0.3 --out " + scan1.string()).exit_code == 0);
  REQUIRE(run_cli("scan --step 0.3 --out " + scan2.string()).exit_code == 0);
  CHECK(slurp(scan1) == slurp(scan2));
}

TEST_CASE("relative outputs honor the output-directory variable") {
  fs::create_directories(kWorkDir / "outdir");
  const auto r = run_cli("table --dim 2 --theta 0.5 --out envtest.csv",
                         "MDIQPQ_OUT_DIR=" + (kWorkDir / "outdir").string() + " ");
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(kWorkDir / "outdir" / "envtest.csv"));
}
