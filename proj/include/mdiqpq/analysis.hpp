#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdiqpq/qstate.hpp"
#include "mdiqpq/sift.hpp"

namespace mdiqpq {

// Closed-form security quantities. Angles accept the closed interval
// [0, pi/2] so limits stay testable; protocol use keeps to the open square.

// Receiver's conclusive-key rate for the honest three-dimensional protocol:
// (1/6)(2 sin^2 g1 + 2 sin^2 g2 - sin^2 g1 sin^2 g2).
double honest_rate_qutrit(double gamma1, double gamma2);

// Two-dimensional reference rate sin^2(theta) / 2.
double honest_rate_qubit(double theta);

// Parameter regions where the three-dimensional protocol leaks less than the
// two-dimensional one run at theta = gamma1 (first flag) or theta = gamma2
// (second flag). Sign predicates are algebraically equivalent to the direct
// rate comparisons; both are evaluated and cross-checked.
std::pair<bool, bool> region_membership(double gamma1, double gamma2);

// Receiver's conclusive rate when a dishonest sender substitutes the
// half-angle probe states (three-dimensional case).
double attack_rate_qutrit(double gamma1, double gamma2);

// Same for the two-dimensional case: cos^2(theta/2).
double attack_rate_qubit(double theta);

// Probabilities that the receiver concludes bit 0 / bit 1 in the probe-state
// round where the sender declares index 1. p0 < p1 on the open square, with
// equality exactly at gamma2 = 0.
std::pair<double, double> attack_bit_probabilities(double gamma1, double gamma2);

// Mismatch fraction the sender's insertion produces among the declared
// instance's conclusive rounds: p0 / (p0 + p1).
double expected_attack_qber_qutrit(double gamma1, double gamma2);

// Per-bit conclusive probabilities under the two-dimensional probe attack
// coincide, (1/2) cos^2(theta/2) each, which is what forces random insertion.
std::pair<double, double> attack_bit_probabilities_qubit(double theta);

// Conclusive rate of the DFT-basis variant, evaluated from the normalized
// joint table rather than hardcoded. Equals 1/3.
double fourier_rate();

// Two-dimensional DFT-basis reference rate.
inline constexpr double kQubitFourierRate = 0.25;

// Analytic per-round rates for cross-checking Monte Carlo estimates:
// probability of the kept Bell outcome and the conclusive fraction among
// kept rounds, both computed from the joint table and generic verdicts.
struct ExpectedRates {
  double retained;
  double conclusive;
};
ExpectedRates expected_rates(const ProtocolParams& params, bool middle_attack);

struct SecuritySummary {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double p = 0.0;            // honest conclusive rate
  double p_prime_g1 = 0.0;   // qubit reference at theta = gamma1
  double p_prime_g2 = 0.0;   // qubit reference at theta = gamma2
  bool in_R1 = false;
  bool in_R2 = false;
  double p_c_mid = 0.0;      // probe-attack conclusive rate
  double p0 = 0.0;
  double p1 = 0.0;
  double qber_expected = 0.0;  // p0 / (p0 + p1)
};
SecuritySummary security_summary(double gamma1, double gamma2);

struct GridScan {
  std::vector<double> gamma1_axis;
  std::vector<double> gamma2_axis;
  std::vector<SecuritySummary> cells;  // gamma1-major, gamma2 fastest

  std::string to_csv() const;
};

// Uniform grid over [g1_min, g1_max] x [g2_min, g2_max] with the given step;
// ranges must lie within [0, pi/2] and produce at least one cell.
GridScan grid_scan(double g1_min, double g1_max, double g2_min, double g2_max, double step);

// 65 x 65 interior points of the open square, step (pi/2)/66.
GridScan default_grid_scan();

}  // namespace mdiqpq
