#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "cmilab/rng.hpp"

namespace cmilab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Dense registers larger than this (2^24 amplitudes) are rejected.
inline constexpr std::size_t kMaxDenseDim = std::size_t{1} << 24;

enum class LogBase { Two, E };

const char* to_string(LogBase base);
/// log in the requested base; callers guarantee x > 0.
double log_in(double x, LogBase base);
/// Multiply a quantity measured in nats by this to convert it.
double nats_to(LogBase base);

/// Mixed-radix digit helpers. Site 0 is the most significant digit.
std::size_t total_dim(const std::vector<int>& dims);
std::vector<std::size_t> strides_of(const std::vector<int>& dims);
std::vector<int> digits_of(std::size_t index, const std::vector<int>& dims);
std::size_t index_of(const std::vector<int>& digits, const std::vector<int>& dims);
/// For every basis index of `dims`, the mixed-radix index of the digits at
/// `positions` (listed order, first most significant).
std::vector<std::uint32_t> subset_index_map(const std::vector<int>& dims,
                                            const std::vector<int>& positions);

class PureState {
 public:
  PureState() = default;
  /// Throws unless amplitudes have length prod(dims) and unit norm (1e-10).
  /// Pass normalize = true to rescale instead of checking.
  PureState(std::vector<int> dims, CVector amplitudes, bool normalize = false);

  static PureState basis(std::vector<int> dims, const std::vector<int>& digits);
  static PureState qubits_zero(int n);

  int n_sites() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& local_dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

  /// Mutable access for in-place kernels; caller keeps the norm.
  CVector& mutable_amplitudes() { return amps_; }

 private:
  std::vector<int> dims_;
  CVector amps_;
};

class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// Validates Hermiticity, trace and PSD at the documented tolerances.
  explicit DensityMatrix(CMatrix m);

  static DensityMatrix from_pure(const CVector& v);
  static DensityMatrix maximally_mixed(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues() const;

 private:
  CMatrix m_;
};

class Unitary {
 public:
  Unitary() = default;
  /// Throws unless U^dagger U = I within 1e-10 (Frobenius).
  explicit Unitary(CMatrix m);

  static Unitary identity(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Unitary adjoint() const;

 private:
  CMatrix m_;
};

/// Three disjoint site sets. `distance` is dist(A, C) in whatever metric the
/// producer used (chain distance, Manhattan distance on a grid, ...).
struct SitePartition {
  std::vector<int> A, B, C;
  double distance = 0.0;

  void validate(int n_sites) const;
  /// 1D chain: A = [a0, a0+la), B = the gap, C = [c0, c0+lc). distance = c0 - (a0+la) + 1.
  static SitePartition chain(int a0, int la, int c0, int lc);
};

namespace gates {
CMatrix X();
CMatrix Y();
CMatrix Z();
CMatrix H();
CMatrix CNOT();
CMatrix SWAP();
/// exp(i (theta/2) Y) = [[cos, sin], [-sin, cos]] of the half angle.
CMatrix Ry(double theta);
}  // namespace gates

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Applies `gate` to the listed sites; the gate's row index is the mixed-radix
/// number formed by those sites in the listed order.
PureState apply_gate(const PureState& state, const Unitary& gate, const std::vector<int>& sites);
void apply_gate_inplace(PureState& state, const CMatrix& gate, const std::vector<int>& sites);

/// Reduced state on `keep` (in the listed order). Empty keep yields the 1x1 matrix [1].
DensityMatrix partial_trace(const PureState& state, const std::vector<int>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims,
                            const std::vector<int>& keep);

double von_neumann_entropy(const DensityMatrix& rho, LogBase base = LogBase::Two);
/// Entropy of a probability vector with the same cutoff conventions.
double shannon_entropy(const std::vector<double>& p, LogBase base = LogBase::Two);
double binary_entropy(double p);

/// 2|ad - bc| for a two-qubit pure state.
double concurrence(const PureState& two_qubits);
/// Wootters formula for a two-qubit density matrix.
double concurrence(const DensityMatrix& rho);
/// sqrt(2((tr rho)^2 - tr rho^2)); the pure-state concurrence seen from one side.
double reduced_concurrence(const CMatrix& rho);
double entropy_from_concurrence(double c);

Unitary haar_unitary(std::size_t dim, Rng& rng);
CVector haar_state(std::size_t dim, Rng& rng);

struct MeasurementOutcome {
  std::vector<int> digits;  // one per measured site, in the listed order
  double probability = 0.0;
  PureState post;  // full register, collapsed and renormalized
};

/// Samples one outcome.
MeasurementOutcome measure_subset(const PureState& state, const std::vector<int>& sites, Rng& rng);
/// Every outcome with probability above `floor`, in mixed-radix order.
std::vector<MeasurementOutcome> measure_subset_all(const PureState& state,
                                                   const std::vector<int>& sites,
                                                   double floor = 0.0);

}  // namespace cmilab
