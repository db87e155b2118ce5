#include "mdiqpq/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mdiqpq/rng.hpp"

namespace mdiqpq {

namespace {

// Stream tags so the engine's independent consumers never share draws.
enum : std::uint64_t {
  kTagQberSelection = 0x51,
  kTagQueryPick = 0x52,
  kTagGuessTieBreak = 0x53,
  kTagSessionSeed = 0x54,
  kTagAlicePick = 0x55,
  kTagUniformGuess = 0x56,
};

struct LeanVerdict {
  RoundVerdict kind = RoundVerdict::Inconclusive;
  std::int8_t bit = -1;
};

// Everything run_sift needs per round, precomputed once: outcome CDFs per
// (sender, receiver) state pair and the verdict for every (receiver state,
// announcement) pair.
struct EngineContext {
  int dim = 0;
  int n_alice = 0;
  int n_bob = 0;
  int n_outcomes = 0;
  int target = 0;
  std::vector<double> cdf;  // [bob][alice][outcome]
  std::vector<LeanVerdict> verdicts;  // [alice][announcement]
  std::vector<int> announcement;      // per sender state
  std::vector<int> honest_key_bit;    // per sender state, honest runs only

  const double* cdf_for(int bob, int alice) const {
    return cdf.data() + (static_cast<std::size_t>(bob) * static_cast<std::size_t>(n_alice) +
                         static_cast<std::size_t>(alice)) *
                            static_cast<std::size_t>(n_outcomes);
  }
  LeanVerdict verdict_for(int alice, int announced) const {
    return verdicts[static_cast<std::size_t>(alice) * static_cast<std::size_t>(dim) +
                    static_cast<std::size_t>(announced)];
  }
};

EngineContext make_context(const ProtocolParams& params, BobStrategy strategy) {
  const StateEnsemble alice = ensemble_for(params);
  const std::vector<StateVector> bob_states = strategy == BobStrategy::Honest
                                                  ? alice.states
                                                  : middle_states_for(params);
  const BellBasis bell = bell_basis(params.dim);

  EngineContext ctx;
  ctx.dim = params.dim;
  ctx.n_alice = alice.state_count();
  ctx.n_bob = static_cast<int>(bob_states.size());
  ctx.n_outcomes = params.dim * params.dim;
  ctx.target = params.target_bell_index;

  ctx.cdf.resize(static_cast<std::size_t>(ctx.n_bob) * ctx.n_alice * ctx.n_outcomes);
  for (int b = 0; b < ctx.n_bob; ++b) {
    for (int a = 0; a < ctx.n_alice; ++a) {
      // Sender's photon in the first BSM port.
      const std::vector<double> dist =
          bsm_distribution(bob_states[static_cast<std::size_t>(b)],
                           alice.states[static_cast<std::size_t>(a)], bell);
      double acc = 0.0;
      double* out = ctx.cdf.data() +
                    (static_cast<std::size_t>(b) * ctx.n_alice + a) * ctx.n_outcomes;
      for (int o = 0; o < ctx.n_outcomes; ++o) {
        acc += dist[static_cast<std::size_t>(o)];
        out[o] = acc;
      }
      out[ctx.n_outcomes - 1] = 1.0;  // absorb rounding in the last bucket
    }
  }

  ctx.verdicts.resize(static_cast<std::size_t>(ctx.n_alice) * params.dim);
  for (int a = 0; a < ctx.n_alice; ++a) {
    for (int u = 0; u < params.dim; ++u) {
      const ConclusiveVerdict v = conclusive_verdict(a, u, params);
      LeanVerdict lean;
      if (v.conclusive) {
        lean.kind = RoundVerdict::Conclusive;
        lean.bit = static_cast<std::int8_t>(*v.inferred_key_bit);
      } else if (v.degenerate) {
        lean.kind = RoundVerdict::Degenerate;
      }
      ctx.verdicts[static_cast<std::size_t>(a) * params.dim + u] = lean;
    }
  }

  for (int b = 0; b < ctx.n_bob; ++b) {
    if (strategy == BobStrategy::Honest) {
      ctx.announcement.push_back(alice.announcement_of(b));
      ctx.honest_key_bit.push_back(alice.key_bit_of(b));
    } else {
      ctx.announcement.push_back((b + 1) % params.dim);
    }
  }
  return ctx;
}

int sample_outcome(const double* cdf, int n_outcomes, double u) {
  for (int o = 0; o < n_outcomes - 1; ++o) {
    if (u < cdf[o]) return o;
  }
  return n_outcomes - 1;
}

}  // namespace

std::vector<std::size_t> KeyRecord::known_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < alice_bits.size(); ++p) {
    if (alice_bits[p] >= 0) out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> KeyRecord::usable_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < alice_bits.size(); ++p) {
    if (alice_bits[p] >= 0 && consumed[p] == 0) out.push_back(p);
  }
  return out;
}

SiftResult run_sift(const ProtocolParams& params, std::uint64_t rounds,
                    BobStrategy strategy, std::uint64_t seed) {
  if (rounds < 1) throw std::invalid_argument("round count must be at least 1");
  params.validate_for_protocol();
  const EngineContext ctx = make_context(params, strategy);

  SiftResult result;
  result.params = params;
  result.strategy = strategy;
  result.seed = seed;
  result.record.n_rounds = rounds;
  result.stats.rounds = rounds;

  for (std::uint64_t r = 0; r < rounds; ++r) {
    SplitMix64 rng = round_stream(seed, r);
    const int alice = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(ctx.n_alice)));
    const int bob = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(ctx.n_bob)));
    const int outcome = sample_outcome(ctx.cdf_for(bob, alice), ctx.n_outcomes, rng.next_double());
    if (outcome != ctx.target) continue;

    SiftRound round;
    round.round = r;
    round.alice_state = static_cast<std::uint16_t>(alice);
    round.bob_state = static_cast<std::uint16_t>(bob);
    round.bsm_outcome = static_cast<std::uint16_t>(outcome);
    round.announced_index = static_cast<std::uint16_t>(ctx.announcement[static_cast<std::size_t>(bob)]);

    const LeanVerdict v = ctx.verdict_for(alice, round.announced_index);
    round.verdict = v.kind;
    round.alice_bit = v.bit;

    if (strategy == BobStrategy::Honest) {
      round.bob_key_bit =
          static_cast<std::uint8_t>(ctx.honest_key_bit[static_cast<std::size_t>(bob)]);
    } else if (params.dim == 2) {
      // The two conditional conclusive probabilities coincide, so the
      // dishonest sender has nothing better than a coin flip.
      round.bob_key_bit = static_cast<std::uint8_t>(rng.next_below(2));
    } else {
      // He records the second-basis bit for every declaration.
      round.bob_key_bit = 1;
    }

    result.record.sifted_rounds.push_back(r);
    result.record.bob_key.push_back(round.bob_key_bit);
    result.record.alice_bits.push_back(v.kind == RoundVerdict::Conclusive ? v.bit
                                                                          : std::int8_t{-1});
    result.record.consumed.push_back(0);
    ++result.stats.retained;
    if (v.kind == RoundVerdict::Conclusive) ++result.stats.conclusive;
    if (v.kind == RoundVerdict::Degenerate) ++result.stats.degenerate;
    result.rounds.push_back(round);
  }

  result.stats.retained_fraction =
      static_cast<double>(result.stats.retained) / static_cast<double>(rounds);
  result.stats.conclusive_rate =
      result.stats.retained == 0
          ? 0.0
          : static_cast<double>(result.stats.conclusive) /
                static_cast<double>(result.stats.retained);
  return result;
}

std::optional<QberEstimate> estimate_qber(KeyRecord& record, double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction <= 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> candidates = record.usable_positions();
  if (candidates.empty()) return std::nullopt;

  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(test_fraction * static_cast<double>(candidates.size()) - 1e-9)));
  SplitMix64 rng = derived_stream(seed, kTagQberSelection);
  // Partial Fisher-Yates: the first n_test entries become the disclosed set.
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }

  QberEstimate est;
  est.tested = n_test;
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t pos = candidates[i];
    if (record.alice_bits[pos] != static_cast<std::int8_t>(record.bob_key[pos])) {
      ++est.mismatches;
    }
    record.consumed[pos] = 1;
  }
  est.qber = static_cast<double>(est.mismatches) / static_cast<double>(est.tested);
  return est;
}

bool detect_attack(double qber, double threshold) {
  if (qber < 0.0 || qber > 1.0 || threshold < 0.0 || threshold > 1.0) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  return qber >= threshold;
}

std::optional<QuerySession> private_query(const KeyRecord& record,
                                          const std::vector<std::uint8_t>& database,
                                          std::size_t query_index, std::uint64_t seed) {
  if (database.empty()) throw std::invalid_argument("database is empty");
  if (query_index >= database.size()) throw std::invalid_argument("query index out of range");

  const std::size_t n = database.size();
  // Key positions beyond the database length are dropped by the truncation,
  // so the receiver must pick below n.
  std::vector<std::size_t> usable;
  for (std::size_t p : record.usable_positions()) {
    if (p < n) usable.push_back(p);
  }
  if (usable.empty()) return std::nullopt;

  SplitMix64 rng = derived_stream(seed, kTagQueryPick);
  const std::size_t j = usable[static_cast<std::size_t>(rng.next_below(usable.size()))];

  QuerySession session;
  session.database = database;
  session.query_index = query_index;
  session.alice_position = j;
  session.shift = (j + n - query_index % n) % n;

  const std::size_t key_len = record.key_length();
  session.shifted_key.resize(n);
  session.ciphertext.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    // Cyclic extension when the key is shorter than the database.
    session.shifted_key[t] = record.bob_key[((t + session.shift) % n) % key_len];
    session.ciphertext[t] = database[t] ^ session.shifted_key[t];
  }

  const auto alice_bit = static_cast<std::uint8_t>(record.alice_bits[j]);
  session.recovered_bit = session.ciphertext[query_index] ^ alice_bit;
  session.correct = session.recovered_bit == database[query_index];
  return session;
}

PositionGuess bob_position_guess(const SiftResult& result, std::uint64_t seed) {
  if (result.strategy != BobStrategy::MiddleAttack) {
    throw std::invalid_argument("position guessing applies to attack runs");
  }
  if (result.rounds.empty()) throw std::invalid_argument("no kept rounds to rank");

  const ProtocolParams& params = result.params;
  const StateEnsemble alice = ensemble_for(params);
  const std::vector<StateVector> middles = middle_states_for(params);
  const std::vector<std::string> labels = middle_labels(params.dim);
  const ProbabilityTable table = normalize_columns(joint_table(
      alice, middles, labels, bell_basis(params.dim), params.target_bell_index));

  // Column score: conclusive probability of a kept round given the probe
  // state sent there.
  std::vector<double> column_score(static_cast<std::size_t>(params.dim), 0.0);
  for (int m = 0; m < params.dim; ++m) {
    const int announced = (m + 1) % params.dim;
    for (int a = 0; a < alice.state_count(); ++a) {
      if (conclusive_verdict(a, announced, params).conclusive) {
        column_score[static_cast<std::size_t>(m)] +=
            table.at(static_cast<std::size_t>(a), static_cast<std::size_t>(m));
      }
    }
  }

  PositionGuess guess;
  guess.scores.reserve(result.rounds.size());
  double best = -1.0;
  std::size_t n_best = 0;
  for (const SiftRound& r : result.rounds) {
    const double s = column_score[r.bob_state];
    guess.scores.push_back(s);
    if (s > best + kTol) {
      best = s;
      n_best = 1;
    } else if (s > best - kTol) {
      ++n_best;
    }
  }

  SplitMix64 rng = derived_stream(seed, kTagGuessTieBreak);
  std::size_t pick = static_cast<std::size_t>(rng.next_below(n_best));
  for (std::size_t p = 0; p < guess.scores.size(); ++p) {
    if (guess.scores[p] > best - kTol) {
      if (pick == 0) {
        guess.guessed_position = p;
        guess.guessed_score = guess.scores[p];
        break;
      }
      --pick;
    }
  }
  return guess;
}

AttackReport run_attack_experiment(const ProtocolParams& params, std::uint64_t rounds,
                                   std::uint64_t sessions, double test_fraction,
                                   double threshold, std::uint64_t seed) {
  if (sessions < 1) throw std::invalid_argument("session count must be at least 1");

  AttackReport report;
  report.mode = params.dim == 2 ? "qubit-middle-state" : "qutrit-middle-state";
  report.sessions = sessions;
  report.rounds_per_session = rounds;
  report.threshold = threshold;
  report.qber_expected = params.dim == 2
                             ? 0.5
                             : expected_attack_qber_qutrit(params.gamma1, params.gamma2);

  std::uint64_t retained = 0, conclusive = 0, tested = 0, mismatches = 0;
  std::uint64_t detected_sessions = 0, sessions_with_estimate = 0;
  std::uint64_t informed_hits = 0, uniform_hits = 0, guess_trials = 0;

  for (std::uint64_t s = 0; s < sessions; ++s) {
    const std::uint64_t session_seed = derived_stream(seed, kTagSessionSeed + s).next();
    SiftResult result = run_sift(params, rounds, BobStrategy::MiddleAttack, session_seed);
    retained += result.stats.retained;
    conclusive += result.stats.conclusive;

    const std::optional<QberEstimate> est =
        estimate_qber(result.record, test_fraction, session_seed);
    if (est) {
      tested += est->tested;
      mismatches += est->mismatches;
      ++sessions_with_estimate;
      if (detect_attack(est->qber, threshold)) ++detected_sessions;
    }

    const std::vector<std::size_t> usable = result.record.usable_positions();
    if (!usable.empty()) {
      SplitMix64 pick_rng = derived_stream(session_seed, kTagAlicePick);
      const std::size_t j =
          usable[static_cast<std::size_t>(pick_rng.next_below(usable.size()))];
      const PositionGuess informed = bob_position_guess(result, session_seed);
      SplitMix64 uniform_rng = derived_stream(session_seed, kTagUniformGuess);
      const std::size_t uniform_guess =
          static_cast<std::size_t>(uniform_rng.next_below(result.record.key_length()));
      ++guess_trials;
      if (informed.guessed_position == j) ++informed_hits;
      if (uniform_guess == j) ++uniform_hits;
    }
  }

  report.conclusive_rate_observed =
      retained == 0 ? 0.0 : static_cast<double>(conclusive) / static_cast<double>(retained);
  report.tested_bits = tested;
  report.qber_observed =
      tested == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(tested);
  report.detected = tested > 0 && detect_attack(report.qber_observed, threshold);
  report.detection_power =
      sessions_with_estimate == 0
          ? 0.0
          : static_cast<double>(detected_sessions) / static_cast<double>(sessions_with_estimate);
  report.guess_trials = guess_trials;
  report.bob_guess_success =
      guess_trials == 0 ? 0.0
                        : static_cast<double>(informed_hits) / static_cast<double>(guess_trials);
  report.uniform_guess_success =
      guess_trials == 0 ? 0.0
                        : static_cast<double>(uniform_hits) / static_cast<double>(guess_trials);
  return report;
}

std::vector<std::uint8_t> load_database(const std::string& path, bool raw_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open database file: " + path);
  std::vector<std::uint8_t> bits;
  char ch;
  while (in.get(ch)) {
    if (raw_bytes) {
      const auto byte = static_cast<unsigned char>(ch);
      for (int b = 7; b >= 0; --b) bits.push_back((byte >> b) & 1U);
    } else if (ch == '0' || ch == '1') {
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw std::invalid_argument("database file must contain only 0, 1 and whitespace");
    }
  }
  return bits;
}

nlohmann::ordered_json transcript_json(const SiftResult& result, std::size_t round_cap) {
  nlohmann::ordered_json j;
  j["dim"] = result.params.dim;
  j["strategy"] = result.strategy == BobStrategy::Honest ? "honest" : "middle_attack";
  j["seed"] = result.seed;
  j["rounds"] = result.stats.rounds;
  j["retained"] = result.stats.retained;
  j["conclusive"] = result.stats.conclusive;
  j["degenerate"] = result.stats.degenerate;
  j["retained_fraction"] = result.stats.retained_fraction;
  j["conclusive_rate"] = result.stats.conclusive_rate;
  if (result.rounds.size() <= round_cap) {
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    for (const SiftRound& r : result.rounds) {
      rounds.push_back({{"round", r.round},
                        {"alice_state", r.alice_state},
                        {"bob_state", r.bob_state},
                        {"bsm_outcome", r.bsm_outcome},
                        {"announced", r.announced_index},
                        {"verdict", r.verdict == RoundVerdict::Conclusive    ? "conclusive"
                                    : r.verdict == RoundVerdict::Degenerate ? "degenerate"
                                                                            : "inconclusive"},
                        {"alice_bit", r.alice_bit},
                        {"bob_key_bit", r.bob_key_bit}});
    }
    j["kept_rounds"] = std::move(rounds);
  } else {
    j["rounds_elided"] = true;
  }
  return j;
}

}  // namespace mdiqpq
