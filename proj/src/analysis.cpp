#include "mdiqpq/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace mdiqpq {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_closed_range(double angle, const char* name) {
  if (!(angle >= 0.0 && angle <= kHalfPi)) {
    throw std::domain_error(std::string(name) + " outside [0, pi/2]");
  }
}

double sin2(double x) {
  const double s = std::sin(x);
  return s * s;
}

double cos2(double x) {
  const double c = std::cos(x);
  return c * c;
}

}  // namespace

double honest_rate_qutrit(double gamma1, double gamma2) {
  require_closed_range(gamma1, "gamma1");
  require_closed_range(gamma2, "gamma2");
  const double s1 = sin2(gamma1), s2 = sin2(gamma2);
  return (2.0 * s1 + 2.0 * s2 - s1 * s2) / 6.0;
}

double honest_rate_qubit(double theta) {
  require_closed_range(theta, "theta");
  return sin2(theta) / 2.0;
}

std::pair<bool, bool> region_membership(double gamma1, double gamma2) {
  require_closed_range(gamma1, "gamma1");
  require_closed_range(gamma2, "gamma2");
  const double s1 = sin2(gamma1), s2 = sin2(gamma2);
  const bool in_r1 = -s1 + 2.0 * s2 - s1 * s2 < 0.0;
  const bool in_r2 = 2.0 * s1 - s2 - s1 * s2 < 0.0;

  // The predicates are the rate comparisons times 3; a disagreement can only
  // come from rounding at the region boundary, where membership is moot.
  const double p = honest_rate_qutrit(gamma1, gamma2);
  if (in_r1 != (p < honest_rate_qubit(gamma1)) &&
      std::abs(-s1 + 2.0 * s2 - s1 * s2) > kTol) {
    throw std::logic_error("region predicate disagrees with rate comparison");
  }
  if (in_r2 != (p < honest_rate_qubit(gamma2)) &&
      std::abs(2.0 * s1 - s2 - s1 * s2) > kTol) {
    throw std::logic_error("region predicate disagrees with rate comparison");
  }
  return {in_r1, in_r2};
}

double attack_rate_qutrit(double gamma1, double gamma2) {
  require_closed_range(gamma1, "gamma1");
  require_closed_range(gamma2, "gamma2");
  const double h1 = gamma1 / 2.0, h2 = gamma2 / 2.0;
  const double cross = std::cos(gamma1) * std::cos(h1) +
                       std::sin(gamma1) * std::sin(h1) * std::cos(h2);
  return (2.0 + 2.0 * sin2(h1) * sin2(h2) + 2.0 * cos2(h1) * cos2(h2) +
          cos2(gamma1) * sin2(h2) + cross * cross) /
         6.0;
}

double attack_rate_qubit(double theta) {
  require_closed_range(theta, "theta");
  return cos2(theta / 2.0);
}

std::pair<double, double> attack_bit_probabilities(double gamma1, double gamma2) {
  require_closed_range(gamma1, "gamma1");
  require_closed_range(gamma2, "gamma2");
  const double h1 = gamma1 / 2.0, h2 = gamma2 / 2.0;
  const double cross = std::cos(gamma1) * std::cos(h1) +
                       std::sin(gamma1) * std::sin(h1) * std::cos(h2);
  const double p0 = 0.5 * (cross * cross + sin2(h1) * sin2(h2));
  const double p1 = 0.5 * (cos2(h1) + sin2(h1) * sin2(h2));
  return {p0, p1};
}

double expected_attack_qber_qutrit(double gamma1, double gamma2) {
  const auto [p0, p1] = attack_bit_probabilities(gamma1, gamma2);
  return p0 / (p0 + p1);
}

std::pair<double, double> attack_bit_probabilities_qubit(double theta) {
  const double half = 0.5 * cos2(theta / 2.0);
  return {half, half};
}

double fourier_rate() {
  const ProtocolParams params = ProtocolParams::fourier_qutrit();
  const StateEnsemble ensemble = fourier_basis();
  const BellBasis bell = bell_basis(3);
  const ProbabilityTable table =
      normalize_columns(joint_table(ensemble, ensemble, bell, params.target_bell_index));

  // Pr(receiver concludes bit k | sender encoded bit k) is 1/3 of the
  // conclusive-cell sum over the sender's three bit-k columns.
  double pr_same[2] = {0.0, 0.0};
  for (int bob = 0; bob < ensemble.state_count(); ++bob) {
    const int key = ensemble.key_bit_of(bob);
    for (int alice = 0; alice < ensemble.state_count(); ++alice) {
      const ConclusiveVerdict v =
          conclusive_verdict(alice, ensemble.announcement_of(bob), params);
      if (v.conclusive && *v.inferred_key_bit == key) {
        pr_same[key] += table.at(static_cast<std::size_t>(alice),
                                 static_cast<std::size_t>(bob));
      }
    }
  }
  return 0.5 * (pr_same[0] / 3.0 + pr_same[1] / 3.0);
}

ExpectedRates expected_rates(const ProtocolParams& params, bool middle_attack) {
  const StateEnsemble alice = ensemble_for(params);
  const BellBasis bell = bell_basis(params.dim);

  ProbabilityTable table;
  std::vector<int> announcements;
  if (middle_attack) {
    const std::vector<StateVector> middles = middle_states_for(params);
    const std::vector<std::string> labels = middle_labels(params.dim);
    table = joint_table(alice, middles, labels, bell, params.target_bell_index);
    for (int m = 0; m < params.dim; ++m) announcements.push_back((m + 1) % params.dim);
  } else {
    table = joint_table(alice, alice, bell, params.target_bell_index);
    for (int b = 0; b < alice.state_count(); ++b) {
      announcements.push_back(alice.announcement_of(b));
    }
  }

  double total = 0.0, conclusive = 0.0;
  for (std::size_t a = 0; a < table.rows(); ++a) {
    for (std::size_t b = 0; b < table.cols(); ++b) {
      total += table.at(a, b);
      const ConclusiveVerdict v =
          conclusive_verdict(static_cast<int>(a), announcements[b], params);
      if (v.conclusive) conclusive += table.at(a, b);
    }
  }
  const double pair_count = static_cast<double>(table.rows() * table.cols());
  return {.retained = total / pair_count, .conclusive = conclusive / total};
}

SecuritySummary security_summary(double gamma1, double gamma2) {
  SecuritySummary s;
  s.gamma1 = gamma1;
  s.gamma2 = gamma2;
  s.p = honest_rate_qutrit(gamma1, gamma2);
  s.p_prime_g1 = honest_rate_qubit(gamma1);
  s.p_prime_g2 = honest_rate_qubit(gamma2);
  std::tie(s.in_R1, s.in_R2) = region_membership(gamma1, gamma2);
  s.p_c_mid = attack_rate_qutrit(gamma1, gamma2);
  std::tie(s.p0, s.p1) = attack_bit_probabilities(gamma1, gamma2);
  s.qber_expected = s.p0 / (s.p0 + s.p1);
  return s;
}

std::string GridScan::to_csv() const {
  std::string out =
      "gamma1,gamma2,p,p_prime_g1,p_prime_g2,in_R1,in_R2,p_c_mid,p0,p1,qber_expected\n";
  char buf[256];
  for (const SecuritySummary& c : cells) {
    std::snprintf(buf, sizeof buf,
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d,%.12g,%.12g,%.12g,%.12g\n",
                  c.gamma1, c.gamma2, c.p, c.p_prime_g1, c.p_prime_g2,
                  c.in_R1 ? 1 : 0, c.in_R2 ? 1 : 0, c.p_c_mid, c.p0, c.p1,
                  c.qber_expected);
    out += buf;
  }
  return out;
}

GridScan grid_scan(double g1_min, double g1_max, double g2_min, double g2_max,
                   double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  require_closed_range(g1_min, "gamma1 range");
  require_closed_range(g1_max, "gamma1 range");
  require_closed_range(g2_min, "gamma2 range");
  require_closed_range(g2_max, "gamma2 range");
  if (g1_max < g1_min || g2_max < g2_min) {
    throw std::invalid_argument("empty grid range");
  }

  auto axis = [step](double lo, double hi) {
    std::vector<double> points;
    // Half-step slack so hi itself survives rounding.
    for (double v = lo; v <= hi + step * 0.5; v += step) {
      points.push_back(std::min(v, hi));
    }
    return points;
  };

  GridScan scan;
  scan.gamma1_axis = axis(g1_min, g1_max);
  scan.gamma2_axis = axis(g2_min, g2_max);
  scan.cells.reserve(scan.gamma1_axis.size() * scan.gamma2_axis.size());
  for (double g1 : scan.gamma1_axis) {
    for (double g2 : scan.gamma2_axis) {
      scan.cells.push_back(security_summary(g1, g2));
    }
  }
  return scan;
}

GridScan default_grid_scan() {
  const double h = kHalfPi / 66.0;
  return grid_scan(h, 65.0 * h, h, 65.0 * h, h);
}

}  // namespace mdiqpq
