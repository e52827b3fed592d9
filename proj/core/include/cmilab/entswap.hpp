#pragma once

#include <vector>

#include "cmilab/distributions.hpp"
#include "cmilab/state.hpp"

namespace cmilab {

/// sum_k a_k |k, k> with a_k >= 0 and sum a_k^2 = 1.
class SchmidtPair {
 public:
  explicit SchmidtPair(std::vector<double> coeffs);

  static SchmidtPair qubit(double a0_squared);
  static SchmidtPair epr(int d);
  /// Coefficients from a uniformly random point of the probability simplex.
  static SchmidtPair random(int d, Rng& rng);

  int d0() const { return static_cast<int>(coeffs_.size()); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }

  CVector state() const;
  /// diag(a_k^2), the reduced state of either half.
  CMatrix reduced() const;

 private:
  std::vector<double> coeffs_;
};

/// Phi_{a,b} = d^{-1/2} sum_x w^{a x} |x, x+b>, stored at index a*d + b.
std::vector<CVector> bell_basis(int d);
/// Columns are the Bell vectors.
Unitary bell_unitary(int d);

struct BellDecomposition {
  double residual = 0;  // || sum_ij Phi_ij^BC (x) chi_ij^AD - |a>|b> ||
  /// overlaps(m, l) = <Phi_m^AD (x) Phi_l^BC | a (x) b>
  CMatrix overlaps;
};

BellDecomposition bell_decompose(const SchmidtPair& a, const SchmidtPair& b);

/// Register order A, B, C, D for |a>_AB |b>_CD.
PureState swap_input_state(const SchmidtPair& a, const SchmidtPair& b);

struct SwapOutcome {
  int index = 0;
  double probability = 0;
  CMatrix psi_ad;  // unnormalized d0 x d0 amplitudes psi_i(x_A, x_D)
  DensityMatrix rho_a;
};

struct SwapResult {
  std::vector<SwapOutcome> outcomes;  // zero-probability outcomes omitted
  Unitary basis;

  double total_probability() const;
  double avg_entropy(LogBase base = LogBase::Two) const;
};

/// Measures BC of |a>_AB |b>_CD in the basis given by the columns of U.
SwapResult swap_once(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U);

struct EntropyBound {
  double lhs = 0;  // sum_i p_i S(rho_i), bits
  double rhs = 0;  // p0 S(rho^0) + p1 S(rho^1), bits
  double p0 = 0, p1 = 0;
};

EntropyBound entropy_bound_check(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U);

/// H(X | odd(X), I = i) in bits for each outcome i with p_i > 0, where X is the
/// AD computational-basis outcome. Same ordering as swap_once().outcomes.
std::vector<double> parity_conditional_entropy(const SchmidtPair& a, const SchmidtPair& b,
                                               const Unitary& U);

struct ConcurrenceReport {
  std::vector<double> closed_form;  // C(rho~_i) from the 2x2-minor sum
  std::vector<double> direct;       // C(rho~_i) from the explicit unnormalized reduced state
  double avg_concurrence = 0;       // sum_i p_i C(rho_i) = sum_i C(rho~_i)
  double avg_entropy = 0;           // bits
  double bound = 0;                 // 4 |a0 a1| |b0 b1| (qubits only)
};

ConcurrenceReport post_measurement_concurrence(const SchmidtPair& a, const SchmidtPair& b,
                                               const Unitary& U);

/// log2(d) sqrt(d / (2(d-1))).
double concurrence_entropy_constant(int d);

enum class ChainMode { Enumerate, Sample };

struct ChainSwapResult {
  double avg_entropy = 0;      // E S(rho_1), bits
  double avg_concurrence = 0;  // E C(rho_1)
  double std_error = 0;        // sampling only
  double bound = 0;            // |2 a0 a1|^n for qubits, NaN otherwise
  std::size_t paths = 0;
  bool sampled = false;
};

/// Upper limit on enumerated outcome sequences.
inline constexpr std::size_t kChainEnumerationBudget = std::size_t{1} << 20;

/// n copies of |a>_{L_k R_k}; (R_j, L_{j+1}) measured in bases[j-1] for j = 1..n-1.
/// Enumerate throws BudgetError past kChainEnumerationBudget paths.
ChainSwapResult chain_swap(int n, const SchmidtPair& a, const std::vector<Unitary>& bases,
                           ChainMode mode = ChainMode::Enumerate, Rng* rng = nullptr,
                           std::size_t samples = 0);

/// EPR pairs on (2i, 2i+1), then CNOT(2i+1 -> 2i+2) and H(2i+1) for the inner
/// links, then exp(i (theta/2) Y) on every qubit.
PureState rotated_cluster_state(int n, double theta);

struct RotatedClusterResult {
  int n = 0;
  double theta = 0;
  CmiReport cmi;       // bits, A = first qubit, C = last, B = the rest
  double bound = 0;    // cos(theta)^(n-2)
  double avg_entropy = 0;
};

RotatedClusterResult rotated_cluster_experiment(int n, double theta);

struct FValue {
  int i = 0, k = 0, kp = 0;
  double f = 0;          // q_ik q_ik' |<phi_ik|phi_ik'>|^2 from explicit phi
  double f_trace = 0;    // |tr[U^dag (|i><i| x 1) U (|k><k'| x sigma_C)]|^2
  double q_k = 0, q_kp = 0;
  double overlap = 0;    // |<phi_ik|phi_ik'>|^2 of normalized states (0 if undefined)
};

struct ImperfectnessReport {
  int d0 = 0;
  double epsilon = 0;  // min over i and k != k' with q > 0 of the normalized overlap
  std::vector<FValue> f_values;
  DensityMatrix sigma_c;
  double max_formula_gap = 0;

  double f(int i, int k, int kp) const;
};

/// U acts on BC with dim d0^2 (B most significant).
ImperfectnessReport imperfectness_f(const Unitary& U, const DensityMatrix& sigma_c);

/// Only f(U, i, k, k', sigma) via the trace formula; cheap enough for Monte Carlo.
double imperfectness_f_value(const CMatrix& U, const CMatrix& sigma_c, int i, int k, int kp);

struct TopSchmidtReport {
  double rho_top = 0;            // || rho_A ||_inf before measuring
  double expected_top = 0;       // E_i || rho_A^i ||_inf, B measured
  double expected_top_full = 0;  // E_ij || rho_A^ij ||_inf, B and C measured
  double epsilon = 0;
  double lower_bound = 0;        // (1 - eps) rho_top + eps
};

TopSchmidtReport top_schmidt_growth(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U);

/// (1/N) sum over N Haar V on BC (each of dimension d) of
/// (V x V)^dag (SWAP_BB' x 1_CC') (V x V), register order B C B' C'.
/// Sample s uses substream s of `seed`.
CMatrix haar_partial_swap_twirl(int d, std::size_t samples, std::uint64_t seed);
/// SWAP_BB' x 1_CC' and SWAP_BB' x SWAP_CC' in the same register order.
CMatrix partial_swap_operator(int d);
CMatrix full_swap_operator(int d);

/// Triangular (forward lightcone) circuit of D levels on 2(D-1) qudits with
/// i.i.d. Haar two-qudit gates; level t has t gates. D = 1 gives the identity
/// on zero qudits and is rejected.
Unitary random_triangular_unitary(int d, int D, Rng& rng);

}  // namespace cmilab
