#include <gtest/gtest.h>

#include <cmath>

#include "cmilab/errors.hpp"
#include "cmilab/entswap.hpp"
#include "cmilab/hamiltonians.hpp"

using namespace cmilab;

namespace {

// Open-chain TFIM through the Jordan-Wigner mapping: single-particle energies
// are the singular values of the bidiagonal matrix with h on the diagonal and
// J above it. E0 = -sum(lambda), first gap = 2 min(lambda).
Eigen::VectorXd tfim_modes(int n, double J, double h) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = h;
    if (i + 1 < n) M(i, i + 1) = J;
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
}

}  // namespace

TEST(Pauli, PhaseConvention) {
  // Y|0> = i|1>, Y|1> = -i|0>
  PauliTerm y{1.0, {{0, 'Y'}}};
  EXPECT_EQ(y.x_mask(1), 1u);
  EXPECT_EQ(y.z_mask(1), 1u);
  EXPECT_EQ(pauli_phase(y.z_mask(1), y.y_count(), 0), cplx(0, 1));
  EXPECT_EQ(pauli_phase(y.z_mask(1), y.y_count(), 1), cplx(0, -1));
  PauliTerm z{1.0, {{0, 'Z'}, {2, 'Z'}}};
  EXPECT_EQ(z.z_mask(3), 0b101u);
}

TEST(Hamiltonian, ApplyMatchesDenseAndIsHermitian) {
  Rng rng(1);
  const std::vector<ModelSpec> models{Tfim{5, 1.0, 0.7}, Ladder{3, 1.0, 0.5, 0.1}, Rydberg{2, 3, 1.0, 1.3, 1.2},
                                      RotatedCluster{6, 0.4}};
  for (const auto& m : models) {
    const HamiltonianSpec H = build(m);
    const CMatrix D = H.dense();
    EXPECT_LT((D - D.adjoint()).norm(), 1e-12) << H.model;
    const CVector x = haar_state(static_cast<std::size_t>(D.rows()), rng);
    CVector y;
    H.apply(x, y);
    EXPECT_LT((y - D * x).norm(), 1e-12) << H.model;
  }
}

TEST(Hamiltonian, ValidationAndBudget) {
  HamiltonianSpec bad;
  bad.n = 3;
  bad.terms = {{1.0, {{2, 'X'}, {1, 'Z'}}}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.terms = {{1.0, {{1, 'Q'}}}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(build(Tfim{15, 1, 1}), BudgetError);
  EXPECT_THROW(build(Rydberg{4, 4, 1, 1, 1.2}), BudgetError);
}

TEST(Tfim, FreeFermionGroundEnergyAndGap) {
  for (double h : {0.5, 1.2, 2.0, 3.0}) {
    for (int n : {6, 10, 12}) {
      const Eigen::VectorXd lam = tfim_modes(n, 1.0, h);
      const GroundStateResult gs = ground_state(build(Tfim{n, 1.0, h}));
      EXPECT_NEAR(gs.energy, -lam.sum(), 1e-9) << "n=" << n << " h=" << h;
      EXPECT_NEAR(gs.gap, 2 * lam.minCoeff(), 1e-7) << "n=" << n << " h=" << h;
      EXPECT_EQ(gs.dense_solver, n <= kDenseSolverMaxSites);
      EXPECT_LT(gs.residual, 1e-9);
    }
  }
}

TEST(Tfim, ReferenceEnergies) {
  EXPECT_NEAR(-tfim_modes(12, 1.0, 2.0).sum(), -25.393496754736, 1e-10);
  EXPECT_NEAR(ground_state(build(Tfim{12, -1.0, 2.0})).energy, -25.393496754736, 1e-9);
}

TEST(Tfim, DegeneracyFlagged) {
  // Splitting of the two ferromagnetic states is O(h^n).
  const HamiltonianSpec H = build(Tfim{6, 1.0, 1e-3});
  const GroundStateResult gs = ground_state(H);
  EXPECT_TRUE(gs.degenerate);
  CmiSchedule s;
  s.distances = {1, 2, 3};
  EXPECT_THROW(cmi_decay_scan({H}, s), std::domain_error);
}

TEST(Eigensolver, LanczosAgreesWithDenseSpectrum) {
  for (const ModelSpec& m : std::vector<ModelSpec>{Ladder{5, 1.0, 0.7, 0.1}, Rydberg{3, 3, 1.0, 1.5, 1.2}}) {
    const HamiltonianSpec H = build(m);
    const auto ev = lowest_eigenvalues(H, 2);
    const GroundStateResult gs = ground_state(H);
    EXPECT_FALSE(gs.dense_solver);
    EXPECT_NEAR(gs.energy, ev[0], 1e-9) << H.model;
    EXPECT_NEAR(gs.gap, ev[1] - ev[0], 1e-7) << H.model;
  }
}

TEST(Eigensolver, GlobalPhaseFixed) {
  const GroundStateResult gs = ground_state(build(Ladder{3, 1.0, 1.0, 0.1}));
  Eigen::Index k;
  gs.state.amplitudes().cwiseAbs().maxCoeff(&k);
  EXPECT_GT(gs.state.amplitudes()[k].real(), 0);
  EXPECT_NEAR(gs.state.amplitudes()[k].imag(), 0, 1e-14);
}

TEST(RotatedCluster, GroundStateIsTheRotatedClusterState) {
  for (int n : {6, 8, 10}) {
    for (double th : {0.0, 0.3, M_PI / 2}) {
      const GroundStateResult gs = ground_state(build(RotatedCluster{n, th}));
      EXPECT_NEAR(gs.energy, -n, 1e-9);
      EXPECT_NEAR(gs.gap, 2.0, 1e-7);
      const PureState ref = rotated_cluster_state(n, th);
      EXPECT_NEAR(std::abs(ref.amplitudes().dot(gs.state.amplitudes())), 1.0, 1e-9);
    }
  }
}

TEST(ClusterEs, StabilizesThetaZeroState) {
  const HamiltonianSpec H = cluster_es_hamiltonian(8);
  const PureState psi = rotated_cluster_state(8, 0.0);
  CVector y;
  H.apply(psi.amplitudes(), y);
  EXPECT_LT((y + 8.0 * psi.amplitudes()).norm(), 1e-12);
}

TEST(Ladder, GroupsAreRungs) {
  const HamiltonianSpec H = build(Ladder{4, 1, 1, 0.1});
  ASSERT_EQ(H.groups.size(), 4u);
  EXPECT_EQ(H.groups[2], (std::vector<int>{4, 5}));
  // Heisenberg rung alone: singlet energy -3/4 J_perp.
  const GroundStateResult gs = ground_state(build(Ladder{2, 1e-12, 1.0, 1e-12}));
  EXPECT_NEAR(gs.energy, -1.5, 1e-9);
}

TEST(Rydberg, LargeDetuningPolarizes) {
  // Negligible drive: the ground state is a single basis state.
  const GroundStateResult gs = ground_state(build(Rydberg{1, 2, 1e-6, 5.0, 0.5}));
  EXPECT_GT(gs.state.amplitudes().cwiseAbs().maxCoeff(), 1 - 1e-6);
  EXPECT_EQ(build(Rydberg{2, 3, 1, 1, 1.2}).groups[1], (std::vector<int>{1, 4}));
}

TEST(CmiSchedule, PartitionFromGroups) {
  const HamiltonianSpec H = build(Tfim{8, 1, 1});
  CmiSchedule s;
  s.a_groups = 2;
  s.c_groups = 2;
  const SitePartition p = s.partition(H, 3);
  EXPECT_EQ(p.A, (std::vector<int>{0, 1}));
  EXPECT_EQ(p.B, (std::vector<int>{2, 3}));
  EXPECT_EQ(p.C, (std::vector<int>{4, 5}));
  EXPECT_THROW(s.partition(H, 6), std::invalid_argument);
}

TEST(CmiDecayScan, GappedTfimDecays) {
  CmiSchedule s;
  s.distances = {1, 2, 3, 4, 5};
  const auto rows = cmi_decay_scan({build(Tfim{10, 1.0, 3.0})}, s);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].cmi_bits.front(), rows[0].cmi_bits.back());
  EXPECT_FALSE(rows[0].fit.diverged);
  EXPECT_GT(rows[0].gap, 1.0);
}
