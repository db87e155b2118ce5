#include "mdiqpq/sift.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mdiqpq {

double ProbabilityTable::column_sum(std::size_t c) const {
  double sum = 0.0;
  for (const auto& row : entries) sum += row[c];
  return sum;
}

std::string ProbabilityTable::to_csv() const {
  std::string out;
  for (const auto& label : col_labels) {
    out += ',';
    out += label;
  }
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r < rows(); ++r) {
    out += row_labels[r];
    for (std::size_t c = 0; c < cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.12f", entries[r][c]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json ProbabilityTable::to_json() const {
  nlohmann::ordered_json j;
  j["row_labels"] = row_labels;
  j["col_labels"] = col_labels;
  j["entries"] = entries;
  j["normalized"] = normalized;
  j["norm_constant"] = norm_constant;
  return j;
}

ProbabilityTable joint_table(const StateEnsemble& alice_states,
                             std::span<const StateVector> bob_states,
                             std::span<const std::string> bob_labels,
                             const BellBasis& bell, int outcome) {
  if (alice_states.dim != bell.dim) {
    throw std::invalid_argument("ensemble dimension does not match Bell basis");
  }
  if (bob_states.size() != bob_labels.size()) {
    throw std::invalid_argument("column states and labels differ in length");
  }
  ProbabilityTable t;
  t.row_labels = alice_states.labels;
  t.col_labels.assign(bob_labels.begin(), bob_labels.end());
  t.entries.reserve(alice_states.states.size());
  for (const StateVector& alice : alice_states.states) {
    std::vector<double> row;
    row.reserve(bob_states.size());
    for (const StateVector& bob : bob_states) {
      row.push_back(bsm_probability(bob, alice, bell, outcome));
    }
    t.entries.push_back(std::move(row));
  }
  return t;
}

ProbabilityTable joint_table(const StateEnsemble& alice_states,
                             const StateEnsemble& bob_states,
                             const BellBasis& bell, int outcome) {
  return joint_table(alice_states, bob_states.states, bob_states.labels, bell, outcome);
}

ProbabilityTable normalize_columns(const ProbabilityTable& table) {
  if (table.normalized) return table;
  if (table.cols() == 0 || table.rows() == 0) {
    throw std::invalid_argument("cannot normalize an empty table");
  }
  const double ref = table.column_sum(0);
  if (ref <= kTol) throw std::invalid_argument("zero column sum");
  for (std::size_t c = 1; c < table.cols(); ++c) {
    if (std::abs(table.column_sum(c) - ref) > kTol) {
      throw std::invalid_argument("column sums are not equal");
    }
  }
  ProbabilityTable t = table;
  for (auto& row : t.entries) {
    for (double& v : row) v /= ref;
  }
  t.normalized = true;
  t.norm_constant = ref;
  return t;
}

ConclusiveVerdict conclusive_verdict(int alice_state, int announcement,
                                     const ProtocolParams& params) {
  params.validate();
  if (announcement < 0 || announcement >= params.dim) {
    throw std::invalid_argument("announcement index out of range");
  }
  const StateEnsemble ensemble = ensemble_for(params);
  if (alice_state < 0 || alice_state >= ensemble.state_count()) {
    throw std::invalid_argument("state index out of range");
  }
  const BellBasis bell = bell_basis(params.dim);
  const StateVector& alice = ensemble.states[static_cast<std::size_t>(alice_state)];

  // Candidate with key bit b is ensemble state b*dim + announcement; the
  // candidate goes into the first BSM port, matching the engine.
  double prob[2];
  for (int bit = 0; bit < 2; ++bit) {
    const auto& candidate = ensemble.states[static_cast<std::size_t>(bit * params.dim + announcement)];
    prob[bit] = bsm_probability(candidate, alice, bell, params.target_bell_index);
  }
  const bool reachable0 = prob[0] > kZeroProbabilityThreshold;
  const bool reachable1 = prob[1] > kZeroProbabilityThreshold;

  ConclusiveVerdict v;
  if (reachable0 != reachable1) {
    v.conclusive = true;
    v.inferred_key_bit = reachable0 ? 0 : 1;
    const int excluded = reachable0 ? 1 : 0;
    v.excluded_candidate =
        ensemble.labels[static_cast<std::size_t>(excluded * params.dim + announcement)];
  } else if (!reachable0) {
    v.degenerate = true;
  }
  return v;
}

std::map<std::string, std::set<std::string>> conclusive_sets(const ProtocolParams& params) {
  const StateEnsemble ensemble = ensemble_for(params);
  std::map<std::string, std::set<std::string>> sets;
  for (int bob = 0; bob < ensemble.state_count(); ++bob) {
    std::set<std::string> alices;
    for (int alice = 0; alice < ensemble.state_count(); ++alice) {
      const ConclusiveVerdict v =
          conclusive_verdict(alice, ensemble.announcement_of(bob), params);
      if (v.conclusive && *v.inferred_key_bit == ensemble.key_bit_of(bob)) {
        alices.insert(ensemble.labels[static_cast<std::size_t>(alice)]);
      }
    }
    sets[ensemble.labels[static_cast<std::size_t>(bob)]] = std::move(alices);
  }
  return sets;
}

}  // namespace mdiqpq
