#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cmilab/distributions.hpp"
#include "cmilab/state.hpp"

namespace cmilab {

/// coeff * prod_k P_k with P in {X, Y, Z}. An empty operator list is the identity.
struct PauliTerm {
  double coeff = 0;
  std::vector<std::pair<int, char>> ops;  // sorted by site, one entry per site

  /// Bits are 1 << (n - 1 - site). z_mask includes Y sites.
  std::uint64_t x_mask(int n) const;
  std::uint64_t z_mask(int n) const;
  int y_count() const;
};

/// P|x> = phase * |x ^ x_mask>.
cplx pauli_phase(std::uint64_t z_mask, int y_count, std::uint64_t x);

struct HamiltonianSpec {
  int n = 0;
  std::string model;     // tfim, ladder, rydberg, rotated-cluster, custom
  std::string geometry;  // chain, ladder, grid RxC
  std::string params;    // human-readable parameter echo
  std::vector<PauliTerm> terms;
  /// Natural 1D ordering of site groups used by CMI scans (sites, rungs, columns).
  std::vector<std::vector<int>> groups;

  void validate() const;
  /// y = H x on the full 2^n register.
  void apply(const CVector& x, CVector& y) const;
  CMatrix dense() const;
};

inline constexpr int kMaxHamiltonianSites = 14;

/// J sum X_i X_{i+1} + h sum Z_i, open chain.
struct Tfim {
  int n = 8;
  double J = 1.0;
  double h = 1.0;
};
/// Two-leg ladder with spin operators S = Pauli / 2. Site of (rung i, leg j) is 2 i + j.
struct Ladder {
  int rungs = 4;
  double J_par = 1.0;
  double J_perp = 1.0;
  double J_cross = 0.1;
};
/// Unit-spacing grid, sites numbered row-major; C = Omega * R_b^6.
struct Rydberg {
  int rows = 2;
  int cols = 2;
  double omega = 1.0;
  double delta = 1.0;
  double r_b = 1.2;
};
/// R H_ES R^dagger with R = Ry(theta) on every qubit; its ground state is
/// rotated_cluster_state(n, theta).
struct RotatedCluster {
  int n = 8;
  double theta = 0.0;
};

using ModelSpec = std::variant<Tfim, Ladder, Rydberg, RotatedCluster>;

HamiltonianSpec build(const Tfim& m);
HamiltonianSpec build(const Ladder& m);
HamiltonianSpec build(const Rydberg& m);
HamiltonianSpec build(const RotatedCluster& m);
HamiltonianSpec build(const ModelSpec& m);

/// The unrotated cluster Hamiltonian H_ES.
HamiltonianSpec cluster_es_hamiltonian(int n);

struct GroundStateResult {
  double energy = 0;
  double gap = 0;       // E_1 - E_0
  double residual = 0;  // ||H psi - E_0 psi||
  bool degenerate = false;
  bool dense_solver = true;
  PureState state;      // global phase fixed so the largest amplitude is real positive
};

inline constexpr double kDegeneracyGap = 1e-8;
inline constexpr int kDenseSolverMaxSites = 8;
inline constexpr int kLanczosMaxSites = 20;

/// Dense eigensolve up to 2^8, Lanczos with full reorthogonalization beyond.
/// Throws std::runtime_error if the residual does not reach 1e-9.
GroundStateResult ground_state(const HamiltonianSpec& spec);

/// Lowest `count` eigenvalues, ascending. Dense only.
std::vector<double> lowest_eigenvalues(const HamiltonianSpec& spec, int count);

/// A = groups [0, a_groups), C = the c_groups groups starting dist - 1 groups
/// after A, B the groups in between; groups right of C are traced out.
struct CmiSchedule {
  int a_groups = 1;
  int c_groups = 1;
  std::vector<int> distances{1, 2, 3, 4, 5, 6};
  SitePartition partition(const HamiltonianSpec& spec, int dist) const;
};

struct DecayScanRow {
  std::string model;
  std::string params;
  double gap = 0;
  std::vector<int> distances;
  std::vector<double> cmi_bits;
  DecayFit fit;
};

/// One row per spec. Throws std::domain_error on a degenerate ground state.
std::vector<DecayScanRow> cmi_decay_scan(const std::vector<HamiltonianSpec>& specs, const CmiSchedule& schedule);

}  // namespace cmilab
