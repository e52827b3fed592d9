#pragma once

#include <cstdint>
#include <vector>

#include "cmilab/distributions.hpp"
#include "cmilab/state.hpp"

namespace cmilab {

/// Two-qudit gate on (site, site + 1) in a 1-based layer.
struct GateSlot {
  int layer = 1;
  int site = 0;
  CMatrix gate;
};

/// Odd layers act on (2i, 2i+1), even layers on (2i+1, 2i+2), sites 0-based.
struct BrickworkCircuit {
  int n = 0;
  int d = 2;
  int D = 0;
  std::uint64_t seed = 0;
  std::vector<GateSlot> gates;  // sorted by (layer, site)
};

/// Gate (layer, site) is drawn from its own substream of `seed`.
BrickworkCircuit random_brickwork(int n, int D, int d, std::uint64_t seed);
/// Same placement with caller-supplied gates; gate_for(layer, site) -> d^2 x d^2.
template <class F>
BrickworkCircuit brickwork_from(int n, int D, int d, F&& gate_for);

std::vector<std::pair<int, int>> brickwork_slots(int n, int D);

PureState run_circuit(const BrickworkCircuit& circuit);

struct LightconeBlock {
  std::vector<int> sites;
  std::vector<std::size_t> gate_ids;  // indices into circuit.gates, time ordered
};

/// Backward cones V_i on L_i u R_i and forward cones U_i on R_i u L_{i+1},
/// with |L_i| = |R_i| = D - 1. For D >= 3 the gates that would belong to
/// forward cones hanging off the chain ends form `edge` blocks.
struct LightconeDecomposition {
  int width = 0;    // D - 1
  int n_prime = 0;  // number of (L, R) pairs
  std::vector<LightconeBlock> backward;
  std::vector<LightconeBlock> forward;
  std::vector<LightconeBlock> edge;
};

/// Requires n = 2 n' (D - 1); D = 1 takes the gate pairs as the blocks.
LightconeDecomposition lightcone_decompose(const BrickworkCircuit& circuit);
/// Applies every backward block to |0...0>, then every forward and edge block.
PureState recompose(const BrickworkCircuit& circuit, const LightconeDecomposition& dec);
/// |a_i> = V_i |0> on L_i u R_i.
std::vector<PureState> backward_pair_states(const BrickworkCircuit& circuit, const LightconeDecomposition& dec);

struct RegionScan {
  int n = 0, D = 0, d = 2, L = 0;
  std::vector<int> separations;                // |B|
  std::vector<std::uint64_t> seeds;            // per trial
  std::vector<std::vector<double>> cmi_bits;   // [trial][separation]
  std::vector<double> median, mean;
  DecayFit fit;
};

/// A = [0, L), C = [L + s, 2L + s) for each separation s, B in between; sites
/// to the right of C are traced out. Trial t uses seed substream t of `seed`.
RegionScan region_cmi_scan(int n, int D, int d, int L, const std::vector<int>& separations, int trials,
                           std::uint64_t seed);
RegionScan region_cmi_scan(const std::vector<BrickworkCircuit>& circuits, int L, const std::vector<int>& separations);

/// Layer 1 prepares EPR pairs, layer 2 rotates the inner pairs into the Bell basis.
BrickworkCircuit bell_swap_brickwork(int n);

double median_of(std::vector<double> v);

template <class F>
BrickworkCircuit brickwork_from(int n, int D, int d, F&& gate_for) {
  BrickworkCircuit c;
  c.n = n;
  c.D = D;
  c.d = d;
  for (auto [layer, site] : brickwork_slots(n, D)) c.gates.push_back({layer, site, gate_for(layer, site)});
  return c;
}

}  // namespace cmilab
