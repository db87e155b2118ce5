// Command-line front end: probability tables, parameter scans, protocol
// simulations, middle-state attack experiments and the end-to-end private
// query demo, all seeded and machine readable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdiqpq/analysis.hpp"
#include "mdiqpq/protocol.hpp"
#include "mdiqpq/qstate.hpp"
#include "mdiqpq/sift.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitAborted = 4;

constexpr std::size_t kTranscriptRoundCap = 1000;

struct RunConfig {
  int dim = 3;
  double gamma1 = 0.0, gamma2 = 0.0, theta = 0.0;
  bool fourier = false;
  bool middle = false;
  bool normalized = false;
  bool raw_bytes = false;
  int target_bell = -1;  // -1: default for the dimension
  std::uint64_t rounds = 4096;
  std::uint64_t sessions = 1;
  std::uint64_t seed = 0;
  double test_fraction = 0.5;
  double threshold = 0.25;
  std::string out_path;
  std::string format = "csv";
  std::string db_path;
  std::size_t query_index = 0;
  double g1_min = -1, g1_max = -1, g2_min = -1, g2_max = -1, step = -1;
};

// --out is resolved against MDIQPQ_OUT_DIR when relative; empty means stdout.
// Files are written to a temporary sibling and renamed into place.
void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::path path(out_path);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("MDIQPQ_OUT_DIR")) {
      path = std::filesystem::path(dir) / path;
    }
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot write output file: " + path.string());
    f << content;
  }
  std::filesystem::rename(tmp, path);
}

mdiqpq::ProtocolParams params_from(const RunConfig& cfg) {
  mdiqpq::ProtocolParams params;
  if (cfg.dim == 2) {
    params = mdiqpq::ProtocolParams::qubit(cfg.theta);
  } else if (cfg.fourier) {
    params = mdiqpq::ProtocolParams::fourier_qutrit();
  } else {
    params = mdiqpq::ProtocolParams::rotated_qutrit(cfg.gamma1, cfg.gamma2);
  }
  if (cfg.target_bell >= 0) {
    params.target_bell_index = cfg.target_bell;
    params.validate();
  }
  return params;
}

ordered_json params_json(const mdiqpq::ProtocolParams& params) {
  ordered_json j;
  j["dim"] = params.dim;
  j["ensemble"] = params.ensemble == mdiqpq::EnsembleKind::Fourier ? "fourier" : "rotated";
  if (params.dim == 3 && params.ensemble == mdiqpq::EnsembleKind::Rotated) {
    j["gamma1"] = params.gamma1;
    j["gamma2"] = params.gamma2;
  }
  if (params.dim == 2) j["theta"] = params.theta;
  j["target_bell_index"] = params.target_bell_index;
  return j;
}

int cmd_table(const RunConfig& cfg) {
  if (cfg.fourier && (cfg.middle || cfg.dim != 3)) {
    throw std::domain_error("the Fourier table exists for dimension 3 without middle states");
  }
  const mdiqpq::ProtocolParams params = params_from(cfg);
  const mdiqpq::StateEnsemble alice = mdiqpq::ensemble_for(params);
  const mdiqpq::BellBasis bell = mdiqpq::bell_basis(params.dim);

  mdiqpq::ProbabilityTable table;
  if (cfg.middle) {
    const auto middles = mdiqpq::middle_states_for(params);
    const auto labels = mdiqpq::middle_labels(params.dim);
    table = mdiqpq::joint_table(alice, middles, labels, bell, params.target_bell_index);
  } else {
    table = mdiqpq::joint_table(alice, alice, bell, params.target_bell_index);
  }
  if (cfg.normalized) table = mdiqpq::normalize_columns(table);

  emit(cfg.out_path, cfg.format == "json" ? table.to_json().dump(2) + "\n" : table.to_csv());
  return kExitOk;
}

int cmd_scan(const RunConfig& cfg) {
  mdiqpq::GridScan scan;
  if (cfg.step > 0) {
    // Unset range ends default to the interior sampled at the given step.
    const double half_pi = std::numbers::pi / 2.0;
    scan = mdiqpq::grid_scan(cfg.g1_min >= 0 ? cfg.g1_min : cfg.step,
                             cfg.g1_max >= 0 ? cfg.g1_max : half_pi,
                             cfg.g2_min >= 0 ? cfg.g2_min : cfg.step,
                             cfg.g2_max >= 0 ? cfg.g2_max : half_pi, cfg.step);
  } else {
    scan = mdiqpq::default_grid_scan();
  }
  emit(cfg.out_path, scan.to_csv());
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const mdiqpq::ProtocolParams params = params_from(cfg);
  mdiqpq::SiftResult result =
      mdiqpq::run_sift(params, cfg.rounds, mdiqpq::BobStrategy::Honest, cfg.seed);
  const mdiqpq::ExpectedRates expected = mdiqpq::expected_rates(params, false);
  const std::optional<mdiqpq::QberEstimate> est =
      mdiqpq::estimate_qber(result.record, cfg.test_fraction, cfg.seed);

  ordered_json j = mdiqpq::transcript_json(result, kTranscriptRoundCap);
  j["params"] = params_json(params);
  j["retained_expected"] = expected.retained;
  j["conclusive_rate_expected"] = expected.conclusive;
  j["test_fraction"] = cfg.test_fraction;
  if (est) {
    j["qber_observed"] = est->qber;
    j["tested_bits"] = est->tested;
    j["detected"] = mdiqpq::detect_attack(est->qber, cfg.threshold);
    j["threshold"] = cfg.threshold;
  } else {
    j["qber_observed"] = nullptr;
  }
  emit(cfg.out_path, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_attack(const RunConfig& cfg) {
  const mdiqpq::ProtocolParams params = params_from(cfg);
  const mdiqpq::AttackReport report = mdiqpq::run_attack_experiment(
      params, cfg.rounds, cfg.sessions, cfg.test_fraction, cfg.threshold, cfg.seed);

  ordered_json j;
  j["mode"] = report.mode;
  j["params"] = params_json(params);
  j["seed"] = cfg.seed;
  j["sessions"] = report.sessions;
  j["rounds_per_session"] = report.rounds_per_session;
  j["conclusive_rate_observed"] = report.conclusive_rate_observed;
  j["conclusive_rate_expected"] = mdiqpq::expected_rates(params, true).conclusive;
  j["tested_bits"] = report.tested_bits;
  j["qber_observed"] = report.qber_observed;
  j["qber_expected"] = report.qber_expected;
  j["threshold"] = report.threshold;
  j["detected"] = report.detected;
  j["detection_power"] = report.detection_power;
  j["bob_guess_success"] = report.bob_guess_success;
  j["uniform_guess_success"] = report.uniform_guess_success;
  j["guess_trials"] = report.guess_trials;
  emit(cfg.out_path, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_query(const RunConfig& cfg) {
  const mdiqpq::ProtocolParams params = params_from(cfg);
  const std::vector<std::uint8_t> database = mdiqpq::load_database(cfg.db_path, cfg.raw_bytes);
  if (database.empty()) throw std::invalid_argument("database file holds no bits");
  if (cfg.query_index >= database.size()) {
    throw std::invalid_argument("query index exceeds database size");
  }

  mdiqpq::SiftResult result =
      mdiqpq::run_sift(params, cfg.rounds, mdiqpq::BobStrategy::Honest, cfg.seed);
  const std::optional<mdiqpq::QberEstimate> est =
      mdiqpq::estimate_qber(result.record, cfg.test_fraction, cfg.seed);
  const std::optional<mdiqpq::QuerySession> session =
      mdiqpq::private_query(result.record, database, cfg.query_index, cfg.seed);
  if (!session) {
    std::cerr << "no usable conclusive key bit; restart with a fresh seed or more rounds\n";
    return kExitAborted;
  }

  ordered_json j;
  j["params"] = params_json(params);
  j["seed"] = cfg.seed;
  j["rounds"] = cfg.rounds;
  j["database_size"] = database.size();
  j["key_length"] = result.record.key_length();
  j["usable_positions"] = result.record.usable_positions().size();
  j["qber_observed"] = est ? ordered_json(est->qber) : ordered_json(nullptr);
  j["query_index"] = session->query_index;
  j["alice_position"] = session->alice_position;
  j["shift"] = session->shift;
  j["recovered_bit"] = session->recovered_bit;
  j["expected_bit"] = database[cfg.query_index];
  j["correct"] = session->correct;
  emit(cfg.out_path, j.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement-device-independent quantum private query toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto add_angle_options = [&cfg](CLI::App* sub, bool with_fourier) {
    sub->add_option("--dim", cfg.dim, "Hilbert-space dimension (2 or 3)")
        ->check(CLI::IsMember({2, 3}));
    sub->add_option("--gamma1", cfg.gamma1, "first qutrit basis angle, radians");
    sub->add_option("--gamma2", cfg.gamma2, "second qutrit basis angle, radians");
    sub->add_option("--theta", cfg.theta, "qubit basis angle, radians");
    if (with_fourier) sub->add_flag("--fourier", cfg.fourier, "use the DFT basis (dim 3)");
    sub->add_option("--target-bell", cfg.target_bell, "Bell outcome to keep (default 0 / singlet)");
  };

  CLI::App* table = app.add_subcommand("table", "emit a joint Bell-outcome probability table");
  add_angle_options(table, true);
  table->add_flag("--middle", cfg.middle, "table against the half-angle probe states");
  table->add_flag("--normalized", cfg.normalized, "divide columns by the common column sum");
  table->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  table->add_option("--out", cfg.out_path, "output file (default stdout)");

  CLI::App* scan = app.add_subcommand("scan", "emit the security-quantity grid as CSV");
  scan->add_option("--g1-min", cfg.g1_min, "gamma1 range start");
  scan->add_option("--g1-max", cfg.g1_max, "gamma1 range end");
  scan->add_option("--g2-min", cfg.g2_min, "gamma2 range start");
  scan->add_option("--g2-max", cfg.g2_max, "gamma2 range end");
  scan->add_option("--step", cfg.step, "grid step (default: 65x65 interior grid)");
  scan->add_option("--out", cfg.out_path, "output file (default stdout)");

  CLI::App* simulate = app.add_subcommand("simulate", "run honest protocol rounds");
  add_angle_options(simulate, true);
  simulate->add_option("--rounds", cfg.rounds, "number of rounds");
  simulate->add_option("--seed", cfg.seed, "RNG seed")->required();
  simulate->add_option("--test-fraction", cfg.test_fraction, "fraction of conclusive bits disclosed");
  simulate->add_option("--threshold", cfg.threshold, "error threshold for the detection verdict");
  simulate->add_option("--out", cfg.out_path, "output file (default stdout)");

  CLI::App* attack = app.add_subcommand("attack", "run middle-state attack sessions");
  add_angle_options(attack, false);
  attack->add_option("--rounds", cfg.rounds, "rounds per session");
  attack->add_option("--sessions", cfg.sessions, "number of sessions");
  attack->add_option("--seed", cfg.seed, "RNG seed")->required();
  attack->add_option("--test-fraction", cfg.test_fraction, "fraction of conclusive bits disclosed");
  attack->add_option("--threshold", cfg.threshold, "error threshold for the detection verdict");
  attack->add_option("--out", cfg.out_path, "output file (default stdout)");

  CLI::App* query = app.add_subcommand("query", "retrieve one database bit end to end");
  add_angle_options(query, true);
  query->add_option("--db", cfg.db_path, "database file of ASCII 0/1 characters")->required();
  query->add_flag("--bits", cfg.raw_bytes, "treat the database file as raw bytes, MSB first");
  query->add_option("--index", cfg.query_index, "database index to retrieve")->required();
  query->add_option("--rounds", cfg.rounds, "number of rounds");
  query->add_option("--seed", cfg.seed, "RNG seed")->required();
  query->add_option("--test-fraction", cfg.test_fraction, "fraction of conclusive bits disclosed");
  query->add_option("--out", cfg.out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*table) return cmd_table(cfg);
    if (*scan) return cmd_scan(cfg);
    if (*simulate) return cmd_simulate(cfg);
    if (*attack) return cmd_attack(cfg);
    if (*query) return cmd_query(cfg);
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
