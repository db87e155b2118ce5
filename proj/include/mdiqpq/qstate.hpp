#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace mdiqpq {

using cplx = std::complex<double>;

// Tolerance for exactness assertions (unit norms, orthonormality,
// probability sums). Dimensions never exceed 9, so double-precision
// rounding stays orders of magnitude below this.
inline constexpr double kTol = 1e-12;

// Unit-norm complex amplitude vector. Dimension 2 or 3 for prepared photon
// states; d*d for the bipartite vectors a Bell basis is made of.
class StateVector {
 public:
  explicit StateVector(std::vector<cplx> amplitudes);
  static StateVector basis(int dim, int index);

  int dim() const { return static_cast<int>(amp_.size()); }
  const cplx& operator[](int i) const { return amp_[static_cast<std::size_t>(i)]; }
  const std::vector<cplx>& amplitudes() const { return amp_; }

 private:
  std::vector<cplx> amp_;
};

// <a|b>, conjugating the left argument.
cplx inner_product(const StateVector& a, const StateVector& b);

// Bipartite product state; component (r, c) of the product sits at r*dim + c.
StateVector tensor_product(const StateVector& left, const StateVector& right);

// The 2*dim signal states a party draws from: the computational basis first
// (key bit 0), then the second orthonormal basis (key bit 1). State i carries
// announcement index i % dim and key bit i / dim.
struct StateEnsemble {
  int dim = 0;
  std::vector<StateVector> states;
  std::vector<std::string> labels;

  int state_count() const { return 2 * dim; }
  int key_bit_of(int state) const { return state / dim; }
  int announcement_of(int state) const { return state % dim; }
};

// Complete orthonormal family of d*d maximally entangled bipartite states.
// Member d*k+l has amplitude omega^(m*l)/sqrt(d) on |(m+k) mod d, m>, with
// omega the primitive d-th root of unity. For d = 2 member (k=1, l=1) is the
// singlet projector up to a global sign.
struct BellBasis {
  int dim = 0;
  std::vector<StateVector> states;  // index d*k + l
  cplx omega;
};

enum class EnsembleKind { Rotated, Fourier };

// Run parameters: dimension, basis angles, ensemble choice and the Bell
// outcome the parties keep. Closed-interval angles are permitted at
// construction so boundary cases stay testable; protocol runs additionally
// require the open interval (validate_for_protocol).
struct ProtocolParams {
  int dim = 3;
  EnsembleKind ensemble = EnsembleKind::Rotated;
  double gamma1 = 0.0;  // qutrit basis angles, radians
  double gamma2 = 0.0;
  double theta = 0.0;   // qubit basis angle, radians
  int target_bell_index = 0;

  static ProtocolParams rotated_qutrit(double gamma1, double gamma2);
  static ProtocolParams fourier_qutrit();
  static ProtocolParams qubit(double theta);

  void validate() const;
  void validate_for_protocol() const;
};

// Computational basis plus the rotated basis
//   |0'> = (cos g1, sin g1 cos g2, sin g1 sin g2)
//   |1'> = (-sin g1, cos g1 cos g2, cos g1 sin g2)
//   |2'> = (0, -sin g2, cos g2)
StateEnsemble rotated_qutrit_basis(double gamma1, double gamma2);

// Half-angle probe states a dishonest sender uses in place of the honest
// ensemble; identical construction to the rotated basis at (g1/2, g2/2).
std::array<StateVector, 3> middle_qutrit_basis(double gamma1, double gamma2);

// Computational basis plus the DFT basis |j'> = sum_m omega^(-j*m)|m>/sqrt(3).
StateEnsemble fourier_basis();

struct QubitBases {
  StateEnsemble honest;                 // {|0>, |1>, |0'>, |1'>}
  std::array<StateVector, 2> middle;    // half-angle probe states
};
QubitBases qubit_bases(double theta);

BellBasis bell_basis(int dim);

// Probability of projecting a (x) b (a in the first slot) onto Bell member
// `outcome`. The Bell amplitudes are conjugated; a and b enter as kets.
double bsm_probability(const StateVector& a, const StateVector& b,
                       const BellBasis& bell, int outcome);

// All d*d outcome probabilities; entries are nonnegative and sum to 1.
std::vector<double> bsm_distribution(const StateVector& a, const StateVector& b,
                                     const BellBasis& bell);

// Ensemble/middle-state selection for a parameter set. Middle states exist
// for the rotated qutrit and qubit protocols only.
StateEnsemble ensemble_for(const ProtocolParams& params);
std::vector<StateVector> middle_states_for(const ProtocolParams& params);
std::vector<std::string> middle_labels(int dim);

}  // namespace mdiqpq
