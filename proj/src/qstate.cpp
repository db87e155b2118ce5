#include "mdiqpq/qstate.hpp"

#include <algorithm>
#include <cmath>
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

void require_open_range(double angle, const char* name) {
  if (!(angle > 0.0 && angle < kHalfPi)) {
    throw std::domain_error(std::string(name) + " outside open interval (0, pi/2)");
  }
}

std::vector<std::string> ensemble_labels(int dim) {
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i) labels.push_back("|" + std::to_string(i) + ">");
  for (int i = 0; i < dim; ++i) labels.push_back("|" + std::to_string(i) + "'>");
  return labels;
}

}  // namespace

StateVector::StateVector(std::vector<cplx> amplitudes) : amp_(std::move(amplitudes)) {
  if (amp_.empty()) throw std::invalid_argument("state vector has no amplitudes");
  double norm2 = 0.0;
  for (const cplx& a : amp_) norm2 += std::norm(a);
  if (std::abs(norm2 - 1.0) > kTol) {
    throw std::invalid_argument("state vector is not unit norm");
  }
}

StateVector StateVector::basis(int dim, int index) {
  if (dim < 1 || index < 0 || index >= dim) {
    throw std::invalid_argument("basis index out of range");
  }
  std::vector<cplx> amp(static_cast<std::size_t>(dim), cplx{0.0, 0.0});
  amp[static_cast<std::size_t>(index)] = cplx{1.0, 0.0};
  return StateVector(std::move(amp));
}

cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in inner product");
  cplx acc{0.0, 0.0};
  for (int i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

StateVector tensor_product(const StateVector& left, const StateVector& right) {
  std::vector<cplx> amp;
  amp.reserve(static_cast<std::size_t>(left.dim()) * static_cast<std::size_t>(right.dim()));
  for (int r = 0; r < left.dim(); ++r) {
    for (int c = 0; c < right.dim(); ++c) amp.push_back(left[r] * right[c]);
  }
  return StateVector(std::move(amp));
}

ProtocolParams ProtocolParams::rotated_qutrit(double gamma1, double gamma2) {
  ProtocolParams p;
  p.dim = 3;
  p.ensemble = EnsembleKind::Rotated;
  p.gamma1 = gamma1;
  p.gamma2 = gamma2;
  p.target_bell_index = 0;
  p.validate();
  return p;
}

ProtocolParams ProtocolParams::fourier_qutrit() {
  ProtocolParams p;
  p.dim = 3;
  p.ensemble = EnsembleKind::Fourier;
  p.target_bell_index = 0;
  p.validate();
  return p;
}

ProtocolParams ProtocolParams::qubit(double theta) {
  ProtocolParams p;
  p.dim = 2;
  p.ensemble = EnsembleKind::Rotated;
  p.theta = theta;
  p.target_bell_index = 3;  // singlet projector (k=1, l=1)
  p.validate();
  return p;
}

void ProtocolParams::validate() const {
  if (dim != 2 && dim != 3) throw std::domain_error("dimension must be 2 or 3");
  if (ensemble == EnsembleKind::Fourier && dim != 3) {
    throw std::domain_error("Fourier ensemble requires dimension 3");
  }
  if (target_bell_index < 0 || target_bell_index >= dim * dim) {
    throw std::domain_error("target Bell index out of range");
  }
  if (dim == 3 && ensemble == EnsembleKind::Rotated) {
    require_closed_range(gamma1, "gamma1");
    require_closed_range(gamma2, "gamma2");
  }
  if (dim == 2) require_closed_range(theta, "theta");
}

void ProtocolParams::validate_for_protocol() const {
  validate();
  if (dim == 3 && ensemble == EnsembleKind::Rotated) {
    require_open_range(gamma1, "gamma1");
    require_open_range(gamma2, "gamma2");
  }
  if (dim == 2) require_open_range(theta, "theta");
}

StateEnsemble rotated_qutrit_basis(double gamma1, double gamma2) {
  require_closed_range(gamma1, "gamma1");
  require_closed_range(gamma2, "gamma2");
  const double c1 = std::cos(gamma1), s1 = std::sin(gamma1);
  const double c2 = std::cos(gamma2), s2 = std::sin(gamma2);

  StateEnsemble e;
  e.dim = 3;
  for (int i = 0; i < 3; ++i) e.states.push_back(StateVector::basis(3, i));
  e.states.push_back(StateVector({c1, s1 * c2, s1 * s2}));
  e.states.push_back(StateVector({-s1, c1 * c2, c1 * s2}));
  e.states.push_back(StateVector({0.0, -s2, c2}));
  e.labels = ensemble_labels(3);
  return e;
}

std::array<StateVector, 3> middle_qutrit_basis(double gamma1, double gamma2) {
  require_closed_range(gamma1, "gamma1");
  require_closed_range(gamma2, "gamma2");
  const double c1 = std::cos(gamma1 / 2.0), s1 = std::sin(gamma1 / 2.0);
  const double c2 = std::cos(gamma2 / 2.0), s2 = std::sin(gamma2 / 2.0);
  return {StateVector({c1, s1 * c2, s1 * s2}),
          StateVector({-s1, c1 * c2, c1 * s2}),
          StateVector({0.0, -s2, c2})};
}

StateEnsemble fourier_basis() {
  StateEnsemble e;
  e.dim = 3;
  for (int i = 0; i < 3; ++i) e.states.push_back(StateVector::basis(3, i));
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  for (int j = 0; j < 3; ++j) {
    std::vector<cplx> amp(3);
    for (int m = 0; m < 3; ++m) {
      amp[static_cast<std::size_t>(m)] =
          std::polar(inv_sqrt3, -2.0 * std::numbers::pi * j * m / 3.0);
    }
    e.states.push_back(StateVector(std::move(amp)));
  }
  e.labels = ensemble_labels(3);
  return e;
}

QubitBases qubit_bases(double theta) {
  require_closed_range(theta, "theta");
  const double c = std::cos(theta), s = std::sin(theta);
  const double ch = std::cos(theta / 2.0), sh = std::sin(theta / 2.0);

  QubitBases b{
      .honest = {},
      .middle = {StateVector({ch, sh}), StateVector({sh, -ch})},
  };
  b.honest.dim = 2;
  b.honest.states.push_back(StateVector::basis(2, 0));
  b.honest.states.push_back(StateVector::basis(2, 1));
  b.honest.states.push_back(StateVector({c, s}));
  b.honest.states.push_back(StateVector({s, -c}));
  b.honest.labels = ensemble_labels(2);
  return b;
}

BellBasis bell_basis(int dim) {
  if (dim != 2 && dim != 3) throw std::domain_error("Bell basis supports dimensions 2 and 3");
  BellBasis bell;
  bell.dim = dim;
  bell.omega = std::polar(1.0, 2.0 * std::numbers::pi / dim);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int k = 0; k < dim; ++k) {
    for (int l = 0; l < dim; ++l) {
      std::vector<cplx> amp(static_cast<std::size_t>(dim * dim), cplx{0.0, 0.0});
      for (int m = 0; m < dim; ++m) {
        const int row = (m + k) % dim;
        amp[static_cast<std::size_t>(row * dim + m)] =
            std::polar(inv_sqrt_d, 2.0 * std::numbers::pi * m * l / dim);
      }
      bell.states.push_back(StateVector(std::move(amp)));
    }
  }
  return bell;
}

double bsm_probability(const StateVector& a, const StateVector& b,
                       const BellBasis& bell, int outcome) {
  const int d = bell.dim;
  if (a.dim() != d || b.dim() != d) {
    throw std::invalid_argument("state dimension does not match Bell basis");
  }
  if (outcome < 0 || outcome >= d * d) throw std::invalid_argument("Bell outcome out of range");
  const StateVector& proj = bell.states[static_cast<std::size_t>(outcome)];
  cplx overlap{0.0, 0.0};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      overlap += std::conj(proj[r * d + c]) * a[r] * b[c];
    }
  }
  return std::clamp(std::norm(overlap), 0.0, 1.0);
}

std::vector<double> bsm_distribution(const StateVector& a, const StateVector& b,
                                     const BellBasis& bell) {
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(bell.dim * bell.dim));
  for (int i = 0; i < bell.dim * bell.dim; ++i) dist.push_back(bsm_probability(a, b, bell, i));
  return dist;
}

StateEnsemble ensemble_for(const ProtocolParams& params) {
  params.validate();
  if (params.dim == 2) return qubit_bases(params.theta).honest;
  if (params.ensemble == EnsembleKind::Fourier) return fourier_basis();
  return rotated_qutrit_basis(params.gamma1, params.gamma2);
}

std::vector<StateVector> middle_states_for(const ProtocolParams& params) {
  params.validate();
  if (params.ensemble == EnsembleKind::Fourier) {
    throw std::domain_error("the Fourier ensemble has no middle-state model");
  }
  if (params.dim == 2) {
    auto m = qubit_bases(params.theta).middle;
    return {m.begin(), m.end()};
  }
  auto m = middle_qutrit_basis(params.gamma1, params.gamma2);
  return {m.begin(), m.end()};
}

std::vector<std::string> middle_labels(int dim) {
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i) labels.push_back("|" + std::to_string(i) + "''>");
  return labels;
}

}  // namespace mdiqpq
