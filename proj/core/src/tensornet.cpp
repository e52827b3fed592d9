#include "cmilab/tensornet.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "cmilab/circuits.hpp"
#include "cmilab/errors.hpp"
#include "cmilab/parallel.hpp"

namespace cmilab {

namespace {

RealTensor gaussian_tensor(std::vector<int> shape, double mu, Rng& rng) {
  RealTensor t;
  std::size_t size = 1;
  for (int s : shape) size *= static_cast<std::size_t>(s);
  t.shape = std::move(shape);
  t.data.resize(size);
  for (double& v : t.data) v = mu + rng.normal();
  return t;
}

void check_x(const std::vector<int>& x, int n) {
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("amplitude: bitstring length mismatch");
  for (int b : x)
    if (b != 0 && b != 1) throw std::invalid_argument("amplitude: entries must be 0 or 1");
}

// Bond extents may be 1, which the register helpers reject.
std::vector<std::size_t> bond_strides(const std::vector<int>& dims) {
  std::vector<std::size_t> st(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) st[k - 1] = st[k] * static_cast<std::size_t>(dims[k]);
  return st;
}

// PEPS bond dimensions for site (i, j): up, left, down, right.
std::array<int, 4> peps_bonds(int rows, int cols, int r, int i, int j) {
  return {i > 0 ? r : 1, j > 0 ? r : 1, i + 1 < rows ? r : 1, j + 1 < cols ? r : 1};
}

}  // namespace

void MpsState::validate() const {
  if (static_cast<int>(tensors.size()) != n || n < 1) throw std::invalid_argument("MpsState: tensor count mismatch");
  for (int k = 0; k < n; ++k) {
    const auto& t = tensors[static_cast<std::size_t>(k)];
    if (t.shape.size() != 3 || t.shape[1] != 2) throw std::invalid_argument("MpsState: tensors must be (l, 2, r)");
    if (k == 0 && t.shape[0] != 1) throw std::invalid_argument("MpsState: left boundary bond must be 1");
    if (k == n - 1 && t.shape[2] != 1) throw std::invalid_argument("MpsState: right boundary bond must be 1");
    if (k > 0 && tensors[static_cast<std::size_t>(k - 1)].shape[2] != t.shape[0])
      throw std::invalid_argument("MpsState: bond mismatch");
    if (t.data.size() != static_cast<std::size_t>(t.shape[0] * t.shape[1] * t.shape[2]))
      throw std::invalid_argument("MpsState: data size mismatch");
  }
}

void PepsState::validate() const {
  if (rows < 1 || cols < 1 || static_cast<int>(tensors.size()) != rows * cols)
    throw std::invalid_argument("PepsState: tensor count mismatch");
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const auto& t = tensors[static_cast<std::size_t>(i * cols + j)];
      if (t.shape.size() != 5 || t.shape[4] != 2) throw std::invalid_argument("PepsState: tensors must be (u, l, d, r, 2)");
      if (i == 0 && t.shape[0] != 1) throw std::invalid_argument("PepsState: open boundary violated");
      if (j == 0 && t.shape[1] != 1) throw std::invalid_argument("PepsState: open boundary violated");
      if (i == rows - 1 && t.shape[2] != 1) throw std::invalid_argument("PepsState: open boundary violated");
      if (j == cols - 1 && t.shape[3] != 1) throw std::invalid_argument("PepsState: open boundary violated");
      if (j + 1 < cols && tensors[static_cast<std::size_t>(i * cols + j + 1)].shape[1] != t.shape[3])
        throw std::invalid_argument("PepsState: horizontal bond mismatch");
      if (i + 1 < rows && tensors[static_cast<std::size_t>((i + 1) * cols + j)].shape[0] != t.shape[2])
        throw std::invalid_argument("PepsState: vertical bond mismatch");
      std::size_t size = 1;
      for (int s : t.shape) size *= static_cast<std::size_t>(s);
      if (t.data.size() != size) throw std::invalid_argument("PepsState: data size mismatch");
    }
}

MpsState random_mps(int n, int r, double mu, std::uint64_t seed) {
  if (n < 1 || r < 1) throw std::invalid_argument("random_mps: need n >= 1 and r >= 1");
  if (n > kMaxMpsSites) throw BudgetError("random_mps: n exceeds 20");
  MpsState m;
  m.n = n;
  m.r = r;
  m.mu = mu;
  m.seed = seed;
  Rng rng(seed);
  for (int k = 0; k < n; ++k)
    m.tensors.push_back(gaussian_tensor({k == 0 ? 1 : r, 2, k == n - 1 ? 1 : r}, mu, rng));
  return m;
}

PepsState random_peps(int rows, int cols, int r, double mu, std::uint64_t seed, bool high_memory) {
  if (rows < 1 || cols < 1 || r < 1) throw std::invalid_argument("random_peps: bad shape");
  if (rows * cols > (high_memory ? kMaxPepsSitesHighMemory : kMaxPepsSites))
    throw BudgetError("random_peps: grid exceeds the dense budget");
  PepsState p;
  p.rows = rows;
  p.cols = cols;
  p.r = r;
  p.mu = mu;
  p.seed = seed;
  Rng rng(seed);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const auto b = peps_bonds(rows, cols, r, i, j);
      p.tensors.push_back(gaussian_tensor({b[0], b[1], b[2], b[3], 2}, mu, rng));
    }
  return p;
}

double amplitude(const MpsState& mps, const std::vector<int>& x) {
  check_x(x, mps.n);
  std::vector<double> v{1.0};
  for (int k = 0; k < mps.n; ++k) {
    const auto& t = mps.tensors[static_cast<std::size_t>(k)];
    const int L = t.shape[0], R = t.shape[2], s = x[static_cast<std::size_t>(k)];
    std::vector<double> w(static_cast<std::size_t>(R), 0.0);
    for (int l = 0; l < L; ++l)
      for (int r = 0; r < R; ++r) w[static_cast<std::size_t>(r)] += v[static_cast<std::size_t>(l)] * t.data[static_cast<std::size_t>((l * 2 + s) * R + r)];
    v = std::move(w);
  }
  return v[0];
}

double amplitude_right_to_left(const MpsState& mps, const std::vector<int>& x) {
  check_x(x, mps.n);
  std::vector<double> v{1.0};
  for (int k = mps.n - 1; k >= 0; --k) {
    const auto& t = mps.tensors[static_cast<std::size_t>(k)];
    const int L = t.shape[0], R = t.shape[2], s = x[static_cast<std::size_t>(k)];
    std::vector<double> w(static_cast<std::size_t>(L), 0.0);
    for (int l = 0; l < L; ++l)
      for (int r = 0; r < R; ++r) w[static_cast<std::size_t>(l)] += t.data[static_cast<std::size_t>((l * 2 + s) * R + r)] * v[static_cast<std::size_t>(r)];
    v = std::move(w);
  }
  return v[0];
}

double amplitude(const PepsState& peps, const std::vector<int>& x) {
  check_x(x, peps.n_sites());
  const int cols = peps.cols;
  // Frontier over (vertical bond per column, horizontal bond); last entry is horizontal.
  std::vector<int> dims(static_cast<std::size_t>(cols + 1), 1);
  std::vector<double> f{1.0};
  for (int i = 0; i < peps.rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const auto& t = peps.tensors[static_cast<std::size_t>(i * cols + j)];
      const int U = t.shape[0], Lb = t.shape[1], Dn = t.shape[2], Rb = t.shape[3];
      const int s = x[static_cast<std::size_t>(i * cols + j)];
      const auto old_strides = bond_strides(dims);
      std::vector<int> nd = dims;
      nd[static_cast<std::size_t>(j)] = Dn;
      nd[static_cast<std::size_t>(cols)] = Rb;
      const auto new_strides = bond_strides(nd);
      const std::size_t nsize = new_strides[0] * static_cast<std::size_t>(nd[0]);
      std::vector<double> g(nsize, 0.0);
      std::vector<int> dg(nd.size());
      for (std::size_t idx = 0; idx < nsize; ++idx) {
        for (std::size_t q = 0; q < nd.size(); ++q) dg[q] = static_cast<int>(idx / new_strides[q] % static_cast<std::size_t>(nd[q]));
        const int dn = dg[static_cast<std::size_t>(j)], rt = dg[static_cast<std::size_t>(cols)];
        dg[static_cast<std::size_t>(j)] = 0;
        dg[static_cast<std::size_t>(cols)] = 0;
        std::size_t base = 0;
        for (std::size_t q = 0; q < dg.size(); ++q) base += static_cast<std::size_t>(dg[q]) * old_strides[q];
        double acc = 0;
        for (int u = 0; u < U; ++u)
          for (int l = 0; l < Lb; ++l) {
            const std::size_t oi = base + static_cast<std::size_t>(u) * old_strides[static_cast<std::size_t>(j)] +
                                   static_cast<std::size_t>(l) * old_strides[static_cast<std::size_t>(cols)];
            acc += f[oi] * t.data[static_cast<std::size_t>((((u * Lb + l) * Dn + dn) * Rb + rt) * 2 + s)];
          }
        g[idx] = acc;
      }
      f = std::move(g);
      dims = std::move(nd);
    }
  return f[0];
}

double norm_squared(const MpsState& mps) {
  mps.validate();
  // E[l, l'] accumulates sum_x A(x)_l A(x)_l'.
  std::vector<double> e{1.0};
  int L = 1;
  for (const auto& t : mps.tensors) {
    const int R = t.shape[2];
    std::vector<double> ne(static_cast<std::size_t>(R * R), 0.0);
    for (int s = 0; s < 2; ++s)
      for (int l = 0; l < L; ++l)
        for (int lp = 0; lp < L; ++lp) {
          const double el = e[static_cast<std::size_t>(l * L + lp)];
          if (el == 0) continue;
          for (int r = 0; r < R; ++r) {
            const double a = el * t.data[static_cast<std::size_t>((l * 2 + s) * R + r)];
            for (int rp = 0; rp < R; ++rp) ne[static_cast<std::size_t>(r * R + rp)] += a * t.data[static_cast<std::size_t>((lp * 2 + s) * R + rp)];
          }
        }
    e = std::move(ne);
    L = R;
  }
  return e[0];
}

PureState to_statevector(const MpsState& mps) {
  mps.validate();
  // v[(prefix, bond)]
  std::vector<double> v{1.0};
  std::size_t prefixes = 1;
  int L = 1;
  for (const auto& t : mps.tensors) {
    const int R = t.shape[2];
    std::vector<double> w(prefixes * 2 * static_cast<std::size_t>(R), 0.0);
    for (std::size_t p = 0; p < prefixes; ++p)
      for (int s = 0; s < 2; ++s)
        for (int l = 0; l < L; ++l) {
          const double a = v[p * static_cast<std::size_t>(L) + static_cast<std::size_t>(l)];
          for (int r = 0; r < R; ++r)
            w[(p * 2 + static_cast<std::size_t>(s)) * static_cast<std::size_t>(R) + static_cast<std::size_t>(r)] +=
                a * t.data[static_cast<std::size_t>((l * 2 + s) * R + r)];
        }
    v = std::move(w);
    prefixes *= 2;
    L = R;
  }
  CVector amps(static_cast<Eigen::Index>(prefixes));
  for (std::size_t i = 0; i < prefixes; ++i) amps[static_cast<Eigen::Index>(i)] = v[i];
  if (!(amps.norm() > 1e-300)) throw std::runtime_error("to_statevector: contraction vanished");
  return PureState(std::vector<int>(static_cast<std::size_t>(mps.n), 2), amps, true);
}

PureState to_statevector(const PepsState& peps, bool high_memory) {
  peps.validate();
  const int n = peps.n_sites();
  if (n > (high_memory ? kMaxPepsSitesHighMemory : kMaxPepsSites)) throw BudgetError("to_statevector: grid exceeds the dense budget");
  const std::size_t dim = std::size_t{1} << n;
  CVector amps(static_cast<Eigen::Index>(dim));
  std::vector<int> x(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = static_cast<int>((idx >> (n - 1 - k)) & 1U);
    amps[static_cast<Eigen::Index>(idx)] = amplitude(peps, x);
  }
  if (!(amps.norm() > 1e-300)) throw std::runtime_error("to_statevector: contraction vanished");
  return PureState(std::vector<int>(static_cast<std::size_t>(n), 2), amps, true);
}

double sign_report(const PureState& state) {
  const CVector& a = state.amplitudes();
  Eigen::Index top = 0;
  a.cwiseAbs().maxCoeff(&top);
  const cplx phase = a[top] / std::abs(a[top]);
  std::size_t positive = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const cplx z = a[i] / phase;
    if (z.real() > 0 && std::abs(z.imag()) <= 1e-12 * std::abs(z)) ++positive;
  }
  return static_cast<double>(positive) / static_cast<double>(a.size());
}

double sign_report(const MpsState& mps) { return sign_report(to_statevector(mps)); }
double sign_report(const PepsState& peps) { return sign_report(to_statevector(peps)); }

const char* to_string(TnFamily f) { return f == TnFamily::MPS ? "mps" : "peps"; }

SitePartition TnGeometry::partition(int dist) const {
  if (width < 1 || dist < 1 || 2 * width + dist - 1 > cols) throw std::invalid_argument("TnGeometry: regions do not fit");
  SitePartition p;
  const int c0 = width + dist - 1;
  for (int col = 0; col < c0 + width; ++col)
    for (int row = 0; row < rows; ++row) {
      const int site = row * cols + col;
      if (col < width) p.A.push_back(site);
      else if (col < c0) p.B.push_back(site);
      else p.C.push_back(site);
    }
  p.distance = dist;
  return p;
}

TnCmiResult tn_cmi_experiment(TnFamily family, int r, double mu, int samples, std::uint64_t seed,
                              const TnGeometry& geometry) {
  if (samples < 1) throw std::invalid_argument("tn_cmi_experiment: samples must be >= 1");
  if (family == TnFamily::MPS && geometry.rows != 1) throw std::invalid_argument("tn_cmi_experiment: MPS geometry has one row");
  TnCmiResult res;
  res.family = family;
  res.r = r;
  res.mu = mu;
  res.geometry = geometry;
  std::vector<SitePartition> parts;
  for (int dist : geometry.distances) parts.push_back(geometry.partition(dist));
  const Rng root(seed);
  for (int s = 0; s < samples; ++s) res.seeds.push_back(root.substream(static_cast<std::uint64_t>(s)).key());
  res.cmi_bits.resize(static_cast<std::size_t>(samples));
  res.positive_fraction.resize(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    const PureState psi = family == TnFamily::MPS
                              ? to_statevector(random_mps(geometry.cols, r, mu, res.seeds[s]))
                              : to_statevector(random_peps(geometry.rows, geometry.cols, r, mu, res.seeds[s]));
    const Distribution dist = measurement_distribution(psi);
    for (const auto& p : parts) res.cmi_bits[s].push_back(cmi(dist, p, LogBase::Two).cmi);
    res.positive_fraction[s] = sign_report(psi);
  });
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : res.cmi_bits) col.push_back(row[k]);
    res.median.push_back(median_of(col));
    pts.emplace_back(parts[k].distance, res.median.back());
  }
  if (pts.size() >= 3) res.fit = fit_cmi_length(pts);
  return res;
}

}  // namespace cmilab
