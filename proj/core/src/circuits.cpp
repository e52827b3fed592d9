#include "cmilab/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "cmilab/errors.hpp"
#include "cmilab/parallel.hpp"

namespace cmilab {

std::vector<std::pair<int, int>> brickwork_slots(int n, int D) {
  if (n < 2 || D < 0) throw std::invalid_argument("brickwork: need n >= 2 and D >= 0");
  std::vector<std::pair<int, int>> slots;
  for (int layer = 1; layer <= D; ++layer)
    for (int s = (layer % 2 == 1 ? 0 : 1); s + 1 < n; s += 2) slots.emplace_back(layer, s);
  return slots;
}

BrickworkCircuit random_brickwork(int n, int D, int d, std::uint64_t seed) {
  if (static_cast<double>(n) * std::log2(static_cast<double>(d)) > 24.0 + 1e-9)
    throw BudgetError("random_brickwork: n log2 d exceeds 24");
  const Rng root(seed);
  BrickworkCircuit c = brickwork_from(n, D, d, [&](int layer, int site) {
    Rng r = root.substream(static_cast<std::uint64_t>(layer)).substream(static_cast<std::uint64_t>(site));
    return haar_unitary(static_cast<std::size_t>(d * d), r).matrix();
  });
  c.seed = seed;
  return c;
}

PureState run_circuit(const BrickworkCircuit& c) {
  PureState s = PureState::basis(std::vector<int>(static_cast<std::size_t>(c.n), c.d),
                                 std::vector<int>(static_cast<std::size_t>(c.n), 0));
  for (const auto& g : c.gates) apply_gate_inplace(s, g.gate, {g.site, g.site + 1});
  return s;
}

LightconeDecomposition lightcone_decompose(const BrickworkCircuit& c) {
  LightconeDecomposition dec;
  const int w = c.D - 1;
  dec.width = w;
  if (c.D < 1) throw std::invalid_argument("lightcone_decompose: depth must be >= 1");
  if (w == 0) {
    if (c.n % 2) throw std::invalid_argument("lightcone_decompose: D = 1 needs even n");
    dec.n_prime = c.n / 2;
    for (int i = 0; i < dec.n_prime; ++i) dec.backward.push_back({{2 * i, 2 * i + 1}, {}});
    for (std::size_t g = 0; g < c.gates.size(); ++g) dec.backward[static_cast<std::size_t>(c.gates[g].site / 2)].gate_ids.push_back(g);
    return dec;
  }
  if (c.n % (2 * w)) throw std::invalid_argument("lightcone_decompose: n must equal 2 n' (D - 1)");
  dec.n_prime = c.n / (2 * w);
  for (int i = 0; i < dec.n_prime; ++i) {
    LightconeBlock v;
    for (int s = 2 * i * w; s < 2 * (i + 1) * w; ++s) v.sites.push_back(s);
    dec.backward.push_back(std::move(v));
    if (i + 1 < dec.n_prime) {
      LightconeBlock u;
      for (int s = (2 * i + 1) * w; s < (2 * i + 3) * w; ++s) u.sites.push_back(s);
      dec.forward.push_back(std::move(u));
    }
  }
  LightconeBlock left, right;
  for (int s = 0; s < w; ++s) left.sites.push_back(s);
  for (int s = c.n - w; s < c.n; ++s) right.sites.push_back(s);

  // Bond b sits between sites b-1 and b. Backward cones are centred on bonds
  // (2i+1)w and hold |b - centre| <= w - layer; forward cones on bonds 2iw
  // with |b - centre| <= layer - 2.
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const int layer = c.gates[g].layer;
    const int b = c.gates[g].site + 1;
    const int iv = static_cast<int>(std::floor((b - w) / (2.0 * w) + 0.5));
    const int cv = (2 * iv + 1) * w;
    if (iv >= 0 && iv < dec.n_prime && std::abs(b - cv) <= w - layer) {
      dec.backward[static_cast<std::size_t>(iv)].gate_ids.push_back(g);
      continue;
    }
    const int iu = static_cast<int>(std::floor(b / (2.0 * w) + 0.5));
    const int cu = 2 * iu * w;
    if (std::abs(b - cu) > layer - 2) throw std::logic_error("lightcone_decompose: gate outside every cone");
    if (iu == 0) left.gate_ids.push_back(g);
    else if (iu == dec.n_prime) right.gate_ids.push_back(g);
    else dec.forward[static_cast<std::size_t>(iu - 1)].gate_ids.push_back(g);
  }
  if (!left.gate_ids.empty()) dec.edge.push_back(std::move(left));
  if (!right.gate_ids.empty()) dec.edge.push_back(std::move(right));
  return dec;
}

PureState recompose(const BrickworkCircuit& c, const LightconeDecomposition& dec) {
  PureState s = PureState::basis(std::vector<int>(static_cast<std::size_t>(c.n), c.d),
                                 std::vector<int>(static_cast<std::size_t>(c.n), 0));
  auto apply_block = [&](const LightconeBlock& blk) {
    for (std::size_t g : blk.gate_ids) apply_gate_inplace(s, c.gates[g].gate, {c.gates[g].site, c.gates[g].site + 1});
  };
  for (const auto& b : dec.backward) apply_block(b);
  for (const auto& b : dec.forward) apply_block(b);
  for (const auto& b : dec.edge) apply_block(b);
  return s;
}

std::vector<PureState> backward_pair_states(const BrickworkCircuit& c, const LightconeDecomposition& dec) {
  std::vector<PureState> out;
  for (const auto& blk : dec.backward) {
    const auto m = static_cast<int>(blk.sites.size());
    PureState s = PureState::basis(std::vector<int>(static_cast<std::size_t>(m), c.d), std::vector<int>(static_cast<std::size_t>(m), 0));
    for (std::size_t g : blk.gate_ids) {
      const int local = c.gates[g].site - blk.sites.front();
      apply_gate_inplace(s, c.gates[g].gate, {local, local + 1});
    }
    out.push_back(std::move(s));
  }
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median_of: empty");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

RegionScan finish_scan(RegionScan scan) {
  const std::size_t ns = scan.separations.size();
  for (std::size_t k = 0; k < ns; ++k) {
    std::vector<double> col;
    for (const auto& row : scan.cmi_bits) col.push_back(row[k]);
    scan.median.push_back(median_of(col));
    double s = 0;
    for (double x : col) s += x;
    scan.mean.push_back(s / static_cast<double>(col.size()));
  }
  if (ns >= 3) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < ns; ++k) pts.emplace_back(scan.separations[k] + 1.0, scan.median[k]);
    scan.fit = fit_cmi_length(pts);
  }
  return scan;
}

std::vector<double> scan_one(const BrickworkCircuit& c, int L, const std::vector<int>& separations) {
  const Distribution dist = measurement_distribution(run_circuit(c));
  std::vector<double> row;
  for (int s : separations) {
    if (2 * L + s > c.n) throw std::invalid_argument("region_cmi_scan: separation does not fit");
    row.push_back(cmi(dist, SitePartition::chain(0, L, L + s, L), LogBase::Two).cmi);
  }
  return row;
}

}  // namespace

RegionScan region_cmi_scan(int n, int D, int d, int L, const std::vector<int>& separations, int trials,
                           std::uint64_t seed) {
  if (trials < 1 || L < 1) throw std::invalid_argument("region_cmi_scan: need trials >= 1 and L >= 1");
  RegionScan scan;
  scan.n = n;
  scan.D = D;
  scan.d = d;
  scan.L = L;
  scan.separations = separations;
  const Rng root(seed);
  scan.seeds.resize(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) scan.seeds[static_cast<std::size_t>(t)] = root.substream(static_cast<std::uint64_t>(t)).key();
  scan.cmi_bits.resize(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    scan.cmi_bits[t] = scan_one(random_brickwork(n, D, d, scan.seeds[t]), L, separations);
  });
  return finish_scan(std::move(scan));
}

RegionScan region_cmi_scan(const std::vector<BrickworkCircuit>& circuits, int L, const std::vector<int>& separations) {
  if (circuits.empty()) throw std::invalid_argument("region_cmi_scan: no circuits");
  RegionScan scan;
  scan.n = circuits[0].n;
  scan.D = circuits[0].D;
  scan.d = circuits[0].d;
  scan.L = L;
  scan.separations = separations;
  scan.cmi_bits.resize(circuits.size());
  for (const auto& c : circuits) scan.seeds.push_back(c.seed);
  parallel_for(circuits.size(), [&](std::size_t t) { scan.cmi_bits[t] = scan_one(circuits[t], L, separations); });
  return finish_scan(std::move(scan));
}

BrickworkCircuit bell_swap_brickwork(int n) {
  if (n < 4 || n % 2) throw std::invalid_argument("bell_swap_brickwork: need even n >= 4");
  const CMatrix prep = gates::CNOT() * kron(gates::H(), CMatrix::Identity(2, 2));
  const CMatrix rot = kron(gates::H(), CMatrix::Identity(2, 2)) * gates::CNOT();
  return brickwork_from(n, 2, 2, [&](int layer, int) { return layer == 1 ? prep : rot; });
}

}  // namespace cmilab
