#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "mdiqpq/rng.hpp"
#include "mdiqpq/sift.hpp"
#include "table_oracles.hpp"

using namespace mdiqpq;

namespace {

constexpr double kPi = std::numbers::pi;

double random_angle(SplitMix64& rng) { return 0.1 + rng.next_double() * (kPi / 2.0 - 0.2); }

void check_table(const ProbabilityTable& table, const oracles::Mat& expected) {
  REQUIRE(table.rows() == expected.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    REQUIRE(table.cols() == expected[r].size());
    for (std::size_t c = 0; c < table.cols(); ++c) {
      REQUIRE(std::abs(table.at(r, c) - expected[r][c]) < kTol);
    }
  }
}

ProbabilityTable qutrit_table(double g1, double g2) {
  const StateEnsemble e = rotated_qutrit_basis(g1, g2);
  return joint_table(e, e, bell_basis(3), 0);
}

ProbabilityTable qutrit_middle_table(double g1, double g2) {
  const StateEnsemble e = rotated_qutrit_basis(g1, g2);
  const auto middles = middle_states_for(ProtocolParams::rotated_qutrit(g1, g2));
  return joint_table(e, middles, middle_labels(3), bell_basis(3), 0);
}

ProbabilityTable qubit_table(double theta) {
  const StateEnsemble e = qubit_bases(theta).honest;
  return joint_table(e, e, bell_basis(2), 3);
}

}  // namespace

TEST_CASE("joint table pins the stated cells") {
  const double g1 = 0.9, g2 = 0.35;
  const ProbabilityTable t3 = qutrit_table(g1, g2);
  CHECK(t3.at(4, 0) == doctest::Approx(std::pow(std::sin(g1), 2) / 3.0).epsilon(1e-13));
  CHECK(t3.row_labels[4] == "|1'>");
  CHECK(t3.col_labels[0] == "|0>");

  const StateEnsemble f = fourier_basis();
  const ProbabilityTable t6 = joint_table(f, f, bell_basis(3), 0);
  CHECK(t6.at(3, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-13));

  const double theta = 0.6;
  const ProbabilityTable tq = qubit_table(theta);
  CHECK(tq.at(0, 3) == doctest::Approx(std::pow(std::cos(theta), 2) / 2.0).epsilon(1e-13));
}

TEST_CASE("dimension mismatch is rejected") {
  const StateEnsemble e = rotated_qutrit_basis(0.5, 0.5);
  CHECK_THROWS_AS(joint_table(e, e, bell_basis(2), 0), std::invalid_argument);
}

TEST_CASE("column normalization") {
  const double g1 = 1.0, g2 = 0.4;

  SUBCASE("honest table divides by 2/3") {
    const ProbabilityTable norm = normalize_columns(qutrit_table(g1, g2));
    CHECK(norm.normalized);
    CHECK(norm.norm_constant == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(norm.at(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
    for (std::size_t c = 0; c < norm.cols(); ++c) {
      CHECK(std::abs(norm.column_sum(c) - 1.0) < kTol);
    }
  }

  SUBCASE("DFT table moves 1/9 to 1/6 and 1/3 to 1/2") {
    const StateEnsemble f = fourier_basis();
    const ProbabilityTable norm = normalize_columns(joint_table(f, f, bell_basis(3), 0));
    CHECK(norm.at(0, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(norm.at(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  }

  SUBCASE("probe-state table has column sum 2/3 and the stated cells") {
    const ProbabilityTable raw = qutrit_middle_table(g1, g2);
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      CHECK(raw.column_sum(c) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    }
    const ProbabilityTable norm = normalize_columns(raw);
    CHECK(norm.at(0, 0) == doctest::Approx(0.5 * std::pow(std::cos(g1 / 2), 2)).epsilon(1e-13));
  }

  SUBCASE("qubit tables already have unit columns") {
    const ProbabilityTable norm = normalize_columns(qubit_table(0.8));
    CHECK(norm.norm_constant == doctest::Approx(1.0).epsilon(1e-13));
  }

  SUBCASE("normalizing twice is the identity") {
    const ProbabilityTable once = normalize_columns(qutrit_table(g1, g2));
    const ProbabilityTable twice = normalize_columns(once);
    CHECK(twice.norm_constant == once.norm_constant);
    for (std::size_t r = 0; r < once.rows(); ++r) {
      for (std::size_t c = 0; c < once.cols(); ++c) {
        CHECK(twice.at(r, c) == once.at(r, c));
      }
    }
  }

  SUBCASE("unequal or zero column sums are invariant violations") {
    ProbabilityTable bad = qutrit_table(g1, g2);
    bad.entries[0][0] += 0.1;
    CHECK_THROWS_AS(normalize_columns(bad), std::invalid_argument);

    ProbabilityTable zero;
    zero.row_labels = {"a"};
    zero.col_labels = {"b"};
    zero.entries = {{0.0}};
    CHECK_THROWS_AS(normalize_columns(zero), std::invalid_argument);
  }
}

TEST_CASE("conclusive verdicts for the pinned examples") {
  const ProtocolParams params = ProtocolParams::rotated_qutrit(0.85, 0.55);

  // Receiver prepared |1'>, announcement 0: the second-basis candidate is
  // excluded, key bit 0.
  const ConclusiveVerdict a = conclusive_verdict(4, 0, params);
  CHECK(a.conclusive);
  CHECK(*a.inferred_key_bit == 0);
  CHECK(*a.excluded_candidate == "|0'>");

  // Receiver prepared |1>, announcement 0: computational candidate excluded,
  // key bit 1.
  const ConclusiveVerdict b = conclusive_verdict(1, 0, params);
  CHECK(b.conclusive);
  CHECK(*b.inferred_key_bit == 1);
  CHECK(*b.excluded_candidate == "|0>");

  // Receiver prepared |0>, announcement 0: both candidates reachable.
  const ConclusiveVerdict c = conclusive_verdict(0, 0, params);
  CHECK_FALSE(c.conclusive);
  CHECK_FALSE(c.degenerate);
  CHECK_FALSE(c.inferred_key_bit.has_value());

  // Receiver prepared |2'>, announcement 0: both candidates excluded.
  const ConclusiveVerdict d = conclusive_verdict(5, 0, params);
  CHECK_FALSE(d.conclusive);
  CHECK(d.degenerate);

  // Two-dimensional case: receiver |0'>, announcement 0 concludes key 0.
  const ConclusiveVerdict q = conclusive_verdict(2, 0, ProtocolParams::qubit(0.8));
  CHECK(q.conclusive);
  CHECK(*q.inferred_key_bit == 0);

  CHECK_THROWS_AS(conclusive_verdict(0, 3, params), std::invalid_argument);
  CHECK_THROWS_AS(conclusive_verdict(6, 0, params), std::invalid_argument);
}

TEST_CASE("conclusive sets reproduce the enumerated rules") {
  SplitMix64 rng(4242);
  const auto expected3 = oracles::qutrit_conclusive_sets();
  const auto expected2 = oracles::qubit_conclusive_sets();
  for (int trial = 0; trial < 20; ++trial) {
    const ProtocolParams p3 =
        ProtocolParams::rotated_qutrit(random_angle(rng), random_angle(rng));
    CHECK(conclusive_sets(p3) == expected3);
    const ProtocolParams p2 = ProtocolParams::qubit(random_angle(rng));
    CHECK(conclusive_sets(p2) == expected2);
  }
}

TEST_CASE("DFT-basis conclusive structure") {
  const ProtocolParams params = ProtocolParams::fourier_qutrit();
  const auto sets = conclusive_sets(params);
  CHECK(sets.at("|0>") == std::set<std::string>{"|1'>", "|2'>"});

  // Six conclusive (receiver, sender) pairs per key bit.
  int per_bit[2] = {0, 0};
  const StateEnsemble f = fourier_basis();
  for (int b = 0; b < 6; ++b) {
    per_bit[f.key_bit_of(b)] +=
        static_cast<int>(sets.at(f.labels[static_cast<std::size_t>(b)]).size());
  }
  CHECK(per_bit[0] == 6);
  CHECK(per_bit[1] == 6);
}

TEST_CASE("conclusive cells are sound against the joint table") {
  SplitMix64 rng(515151);
  for (int trial = 0; trial < 10; ++trial) {
    const double g1 = random_angle(rng), g2 = random_angle(rng);
    const ProtocolParams params = ProtocolParams::rotated_qutrit(g1, g2);
    const StateEnsemble e = rotated_qutrit_basis(g1, g2);
    const ProbabilityTable t = qutrit_table(g1, g2);
    for (int alice = 0; alice < 6; ++alice) {
      for (int ann = 0; ann < 3; ++ann) {
        const ConclusiveVerdict v = conclusive_verdict(alice, ann, params);
        const double p_comp = t.at(static_cast<std::size_t>(alice), static_cast<std::size_t>(ann));
        const double p_rot =
            t.at(static_cast<std::size_t>(alice), static_cast<std::size_t>(3 + ann));
        if (v.conclusive) {
          const double surviving = *v.inferred_key_bit == 0 ? p_comp : p_rot;
          const double excluded = *v.inferred_key_bit == 0 ? p_rot : p_comp;
          REQUIRE(surviving > kZeroProbabilityThreshold);
          REQUIRE(excluded <= kZeroProbabilityThreshold);
          REQUIRE(*v.excluded_candidate ==
                  e.labels[static_cast<std::size_t>((1 - *v.inferred_key_bit) * 3 + ann)]);
        } else if (v.degenerate) {
          REQUIRE(p_comp <= kZeroProbabilityThreshold);
          REQUIRE(p_rot <= kZeroProbabilityThreshold);
        } else {
          REQUIRE(p_comp > kZeroProbabilityThreshold);
          REQUIRE(p_rot > kZeroProbabilityThreshold);
        }
      }
    }
  }
}

TEST_CASE("tables reproduce every closed-form entry") {
  SplitMix64 rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const double g1 = random_angle(rng), g2 = random_angle(rng);
    check_table(qutrit_table(g1, g2), oracles::table_qutrit_raw(g1, g2));
    check_table(normalize_columns(qutrit_table(g1, g2)),
                oracles::table_qutrit_normalized(g1, g2));
    check_table(normalize_columns(qutrit_middle_table(g1, g2)),
                oracles::table_qutrit_middle_normalized(g1, g2));

    const double theta = random_angle(rng);
    check_table(qubit_table(theta), oracles::table_qubit(theta));
    const StateEnsemble e2 = qubit_bases(theta).honest;
    const auto middles2 = middle_states_for(ProtocolParams::qubit(theta));
    check_table(joint_table(e2, middles2, middle_labels(2), bell_basis(2), 3),
                oracles::table_qubit_middle(theta));
  }

  const StateEnsemble f = fourier_basis();
  check_table(joint_table(f, f, bell_basis(3), 0), oracles::table_fourier_raw());
  check_table(normalize_columns(joint_table(f, f, bell_basis(3), 0)),
              oracles::table_fourier_normalized());
}

TEST_CASE("CSV serialization carries labels and 12-digit entries") {
  const ProbabilityTable norm =
      normalize_columns(qutrit_table(kPi / 4.0, kPi / 4.0));
  const std::string csv = norm.to_csv();
  CHECK(csv.substr(0, 30) == ",|0>,|1>,|2>,|0'>,|1'>,|2'>\n|0");
  CHECK(csv.find("0.500000000000") != std::string::npos);
  CHECK(csv.find("|2'>,") != std::string::npos);

  const auto j = norm.to_json();
  CHECK(j["normalized"].get<bool>());
  CHECK(j["norm_constant"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(j["entries"][0][0].get<double>() == doctest::Approx(0.5));
  CHECK(j["row_labels"][4].get<std::string>() == "|1'>");
}
