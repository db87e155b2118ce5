#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdiqpq/analysis.hpp"
#include "mdiqpq/qstate.hpp"
#include "mdiqpq/sift.hpp"

namespace mdiqpq {

enum class BobStrategy { Honest, MiddleAttack };

enum class RoundVerdict : std::uint8_t { Inconclusive, Conclusive, Degenerate };

// One kept (target-outcome) round. bob_state indexes the honest ensemble in
// honest runs and the middle-state list under attack. Verdicts are computed
// only for kept rounds, which are the only rounds stored.
struct SiftRound {
  std::uint64_t round = 0;  // position in the full round sequence
  std::uint16_t alice_state = 0;
  std::uint16_t bob_state = 0;
  std::uint16_t bsm_outcome = 0;
  std::uint16_t announced_index = 0;
  RoundVerdict verdict = RoundVerdict::Inconclusive;
  std::int8_t alice_bit = -1;  // inferred key bit, -1 unless conclusive
  std::uint8_t bob_key_bit = 0;

  friend bool operator==(const SiftRound&, const SiftRound&) = default;
};

// The oblivious key. Positions index the sifted sequence; the sender knows
// every bit, the receiver only the conclusive ones, and error estimation
// consumes whatever it discloses.
struct KeyRecord {
  std::uint64_t n_rounds = 0;
  std::vector<std::uint64_t> sifted_rounds;  // round index per key position
  std::vector<std::uint8_t> bob_key;         // bit per key position
  std::vector<std::int8_t> alice_bits;       // -1 unknown, else inferred bit
  std::vector<std::uint8_t> consumed;        // 1 = disclosed during estimation

  std::size_t key_length() const { return bob_key.size(); }
  bool alice_knows(std::size_t position) const { return alice_bits[position] >= 0; }
  std::vector<std::size_t> known_positions() const;
  std::vector<std::size_t> usable_positions() const;  // known and not consumed

  friend bool operator==(const KeyRecord&, const KeyRecord&) = default;
};

struct SiftStats {
  std::uint64_t rounds = 0;
  std::uint64_t retained = 0;
  std::uint64_t conclusive = 0;
  std::uint64_t degenerate = 0;
  double retained_fraction = 0.0;
  double conclusive_rate = 0.0;  // among retained rounds
};

struct SiftResult {
  ProtocolParams params;
  BobStrategy strategy = BobStrategy::Honest;
  std::uint64_t seed = 0;
  KeyRecord record;
  std::vector<SiftRound> rounds;  // kept rounds only
  SiftStats stats;
};

// Runs `rounds` protocol rounds: both parties draw states uniformly (the
// sender from the half-angle probes under attack), the BSM outcome is
// sampled from the exact joint distribution, and target-outcome rounds are
// kept with the announcement and the receiver's verdict attached. Dishonest
// announcements follow the fixed permutation (probe m announces m+1 mod d);
// inserted key bits are coin flips for d = 2 and the second-basis bit for
// d = 3. Zero kept rounds is a valid, empty result. Identical (params,
// rounds, strategy, seed) reproduce the result bit for bit.
SiftResult run_sift(const ProtocolParams& params, std::uint64_t rounds,
                    BobStrategy strategy, std::uint64_t seed);

struct QberEstimate {
  std::size_t tested = 0;
  std::size_t mismatches = 0;
  double qber = 0.0;
};

// Discloses ceil(test_fraction * known) of the receiver's conclusive
// positions, compares the two sides, and marks the disclosed positions
// consumed. No conclusive positions -> no estimate.
std::optional<QberEstimate> estimate_qber(KeyRecord& record, double test_fraction,
                                          std::uint64_t seed);

bool detect_attack(double qber, double threshold);

struct QuerySession {
  std::vector<std::uint8_t> database;
  std::size_t query_index = 0;     // i
  std::size_t alice_position = 0;  // j, a usable key position
  std::size_t shift = 0;           // s = (j - i) mod N
  std::vector<std::uint8_t> shifted_key;  // K0, length N
  std::vector<std::uint8_t> ciphertext;   // database XOR K0
  std::uint8_t recovered_bit = 0;
  bool correct = false;
};

// One private retrieval: the receiver picks a usable position j uniformly,
// declares s = j - i (mod N), the sender shifts his key cyclically by s and
// one-time-pads the database. The key is cyclically extended or truncated to
// the database length first. No usable position -> no session (restart).
std::optional<QuerySession> private_query(const KeyRecord& record,
                                          const std::vector<std::uint8_t>& database,
                                          std::size_t query_index, std::uint64_t seed);

// The dishonest sender's guess at the receiver's conclusive position: rounds
// are scored by the conclusive probability of the probe state he sent there
// (a column sum of the normalized probe table over conclusive receiver
// states), and he picks uniformly among the top-scoring kept rounds.
struct PositionGuess {
  std::size_t guessed_position = 0;  // key position
  double guessed_score = 0.0;
  std::vector<double> scores;  // per kept round
};
PositionGuess bob_position_guess(const SiftResult& result, std::uint64_t seed);

struct AttackReport {
  std::string mode;  // "qubit-middle-state" or "qutrit-middle-state"
  std::uint64_t sessions = 0;
  std::uint64_t rounds_per_session = 0;
  double conclusive_rate_observed = 0.0;  // pooled over sessions
  double qber_observed = 0.0;             // pooled
  double qber_expected = 0.0;
  double threshold = 0.0;
  bool detected = false;          // pooled QBER >= threshold
  double detection_power = 0.0;   // fraction of sessions detected
  double bob_guess_success = 0.0;     // informed ranking
  double uniform_guess_success = 0.0; // uniform over key positions, control
  std::uint64_t guess_trials = 0;
  std::uint64_t tested_bits = 0;
};

// Repeats attack sessions (sift, error estimation, the receiver's position
// pick) and pools the statistics; the sender's informed guess is compared
// against a uniform guess over the same key positions.
AttackReport run_attack_experiment(const ProtocolParams& params,
                                   std::uint64_t rounds, std::uint64_t sessions,
                                   double test_fraction, double threshold,
                                   std::uint64_t seed);

// Database files: ASCII '0'/'1' with whitespace ignored, or raw bytes
// unpacked most-significant bit first.
std::vector<std::uint8_t> load_database(const std::string& path, bool raw_bytes);

// Transcript with per-round detail elided above `round_cap` rounds.
nlohmann::ordered_json transcript_json(const SiftResult& result, std::size_t round_cap);

}  // namespace mdiqpq
