#include <gtest/gtest.h>

#include <set>

#include "cmilab/errors.hpp"
#include "cmilab/circuits.hpp"
#include "cmilab/parallel.hpp"

using namespace cmilab;

TEST(Brickwork, SlotLayout) {
  const auto slots = brickwork_slots(6, 3);
  std::vector<std::pair<int, int>> expect{{1, 0}, {1, 2}, {1, 4}, {2, 1}, {2, 3}, {3, 0}, {3, 2}, {3, 4}};
  EXPECT_EQ(slots, expect);
}

TEST(Brickwork, GatesAreUnitaryAndSeeded) {
  const BrickworkCircuit a = random_brickwork(8, 3, 2, 99), b = random_brickwork(8, 3, 2, 99);
  ASSERT_EQ(a.gates.size(), b.gates.size());
  for (std::size_t i = 0; i < a.gates.size(); ++i) {
    EXPECT_EQ((a.gates[i].gate - b.gates[i].gate).norm(), 0.0);
    EXPECT_LT((a.gates[i].gate.adjoint() * a.gates[i].gate - CMatrix::Identity(4, 4)).norm(), 1e-12);
  }
  EXPECT_NE((random_brickwork(8, 3, 2, 100).gates[0].gate - a.gates[0].gate).norm(), 0.0);
}

TEST(Brickwork, BudgetEnforced) { EXPECT_THROW(random_brickwork(26, 2, 2, 1), BudgetError); }

TEST(RunCircuit, MatchesGateByGate) {
  const BrickworkCircuit c = random_brickwork(6, 3, 2, 5);
  PureState ref = PureState::qubits_zero(6);
  for (const auto& g : c.gates) ref = apply_gate(ref, Unitary(g.gate), {g.site, g.site + 1});
  EXPECT_LT((run_circuit(c).amplitudes() - ref.amplitudes()).norm(), 1e-13);
}

TEST(Lightcone, RecomposeReproducesCircuit) {
  for (int D : {1, 2, 3, 4}) {
    const int w = std::max(1, D - 1);
    const int n = D == 1 ? 8 : 4 * w;
    const BrickworkCircuit c = random_brickwork(n, D, 2, 17 + D);
    const LightconeDecomposition dec = lightcone_decompose(c);
    std::set<std::size_t> seen;
    for (const auto* group : {&dec.backward, &dec.forward, &dec.edge})
      for (const auto& blk : *group)
        for (auto id : blk.gate_ids) EXPECT_TRUE(seen.insert(id).second) << "gate in two blocks";
    EXPECT_EQ(seen.size(), c.gates.size());
    EXPECT_LT((recompose(c, dec).amplitudes() - run_circuit(c).amplitudes()).norm(), 1e-12) << "D=" << D;
  }
}

TEST(Lightcone, BlocksStayInsideTheirSites) {
  const BrickworkCircuit c = random_brickwork(12, 4, 2, 3);
  const LightconeDecomposition dec = lightcone_decompose(c);
  EXPECT_EQ(dec.width, 3);
  EXPECT_EQ(dec.n_prime, 2);
  for (const auto* group : {&dec.backward, &dec.forward, &dec.edge})
    for (const auto& blk : *group) {
      const std::set<int> s(blk.sites.begin(), blk.sites.end());
      for (auto id : blk.gate_ids) {
        EXPECT_TRUE(s.count(c.gates[id].site));
        EXPECT_TRUE(s.count(c.gates[id].site + 1));
      }
    }
  EXPECT_THROW(lightcone_decompose(random_brickwork(10, 4, 2, 3)), std::invalid_argument);
}

TEST(Lightcone, BackwardStatesAreNormalized) {
  const BrickworkCircuit c = random_brickwork(8, 3, 2, 8);
  for (const auto& s : backward_pair_states(c, lightcone_decompose(c)))
    EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-12);
}

TEST(RegionScan, DepthOneHasNoConditionalCorrelations) {
  const RegionScan r = region_cmi_scan(10, 1, 2, 2, {1, 2, 3}, 5, 1);
  for (const auto& row : r.cmi_bits)
    for (double v : row) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(RegionScan, BellSwapHasOneBitEndToEnd) {
  const BrickworkCircuit c = bell_swap_brickwork(8);
  // Measuring every inner qubit swaps the entanglement onto the chain ends.
  const RegionScan r = region_cmi_scan({c}, 1, {2, 6});
  EXPECT_NEAR(r.cmi_bits[0][1], 1.0, 1e-12);
  // Cut short, C's partner is traced out and the correlation is lost.
  EXPECT_NEAR(r.cmi_bits[0][0], 0.0, 1e-12);
  EXPECT_THROW(bell_swap_brickwork(5), std::invalid_argument);
}

TEST(RegionScan, DeterministicAcrossThreadCounts) {
  set_num_threads(1);
  const RegionScan a = region_cmi_scan(10, 2, 2, 2, {1, 2, 3}, 6, 42);
  set_num_threads(3);
  const RegionScan b = region_cmi_scan(10, 2, 2, 2, {1, 2, 3}, 6, 42);
  set_num_threads(1);
  EXPECT_EQ(a.cmi_bits, b.cmi_bits);
  EXPECT_EQ(a.seeds, b.seeds);
}

TEST(Median, EvenAndOdd) {
  EXPECT_DOUBLE_EQ(median_of({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median_of({4, 1, 2, 3}), 2.5);
}
