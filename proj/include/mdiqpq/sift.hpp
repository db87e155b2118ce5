#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdiqpq/qstate.hpp"

namespace mdiqpq {

// Joint Bell-outcome probability table; rows are the receiver's (Alice's)
// prepared states, columns the sender's (Bob's). Labels travel with the
// numbers so serialized tables are self-describing.
struct ProbabilityTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> entries;  // [row][col]
  bool normalized = false;
  double norm_constant = 1.0;  // divisor applied by normalize_columns

  std::size_t rows() const { return entries.size(); }
  std::size_t cols() const { return col_labels.size(); }
  double at(std::size_t r, std::size_t c) const { return entries[r][c]; }
  double column_sum(std::size_t c) const;

  // Header row carries the column labels, first column the row labels,
  // entries printed with 12 decimal digits.
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

// Entry (i, j) is the probability of `outcome` when column state j enters
// the first BSM port and row state i the second. With the protocol's
// default targets the probability is exchange-symmetric, so row/column
// order is immaterial there; the port convention matters for the other
// outcomes and matches the protocol engine.
ProbabilityTable joint_table(const StateEnsemble& alice_states,
                             std::span<const StateVector> bob_states,
                             std::span<const std::string> bob_labels,
                             const BellBasis& bell, int outcome);

// Convenience overload: honest sender drawing from the same ensemble.
ProbabilityTable joint_table(const StateEnsemble& alice_states,
                             const StateEnsemble& bob_states,
                             const BellBasis& bell, int outcome);

// Divides every column by the common column sum. Protocol tables all share
// one column sum (2/3 for the three-dimensional tables, 1 for the
// two-dimensional ones); anything else signals a non-protocol ensemble and
// raises std::invalid_argument. Normalizing twice is the identity.
ProbabilityTable normalize_columns(const ProbabilityTable& table);

// What the receiver can deduce from one announced index. The two candidates
// are the computational-basis and second-basis states carrying that index;
// a candidate is excluded when the kept Bell outcome has zero probability
// against the receiver's state. Exactly one exclusion is a conclusive round,
// two exclusions a degenerate one (possible only against a dishonest sender).
struct ConclusiveVerdict {
  bool conclusive = false;
  std::optional<int> inferred_key_bit;            // present iff conclusive
  std::optional<std::string> excluded_candidate;  // present iff conclusive
  bool degenerate = false;
};

inline constexpr double kZeroProbabilityThreshold = 1e-12;

ConclusiveVerdict conclusive_verdict(int alice_state, int announcement,
                                     const ProtocolParams& params);

// For each honest sender state, the set of receiver states that identify it
// with certainty (conclusive verdict whose surviving candidate is that
// state). Keys and values are ensemble labels.
std::map<std::string, std::set<std::string>> conclusive_sets(const ProtocolParams& params);

}  // namespace mdiqpq
