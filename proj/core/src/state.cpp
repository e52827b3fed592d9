#include "cmilab/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cmilab/errors.hpp"

namespace cmilab {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kEigCutoff = 1e-14;

void check_sites(const std::vector<int>& sites, int n, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(std::max(n, 0)), false);
  for (int s : sites) {
    if (s < 0 || s >= n) {
      throw std::out_of_range(std::string(what) + ": site " + std::to_string(s) +
                              " outside register of " + std::to_string(n));
    }
    if (seen[static_cast<std::size_t>(s)]) {
      throw std::invalid_argument(std::string(what) + ": repeated site " + std::to_string(s));
    }
    seen[static_cast<std::size_t>(s)] = true;
  }
}

// For every basis index, its index inside the `keep` factor and inside the
// complement (complement sites in ascending order).
struct SplitMaps {
  std::vector<std::uint32_t> keep;
  std::vector<std::uint32_t> rest;
  std::size_t keep_dim = 1;
  std::size_t rest_dim = 1;
};

SplitMaps split_maps(const std::vector<int>& dims, const std::vector<int>& keep) {
  const int n = static_cast<int>(dims.size());
  std::vector<std::size_t> keep_w(dims.size(), 0), rest_w(dims.size(), 0);
  SplitMaps maps;
  std::vector<bool> kept(dims.size(), false);
  for (int s : keep) kept[static_cast<std::size_t>(s)] = true;
  for (auto it = keep.rbegin(); it != keep.rend(); ++it) {
    keep_w[static_cast<std::size_t>(*it)] = maps.keep_dim;
    maps.keep_dim *= static_cast<std::size_t>(dims[static_cast<std::size_t>(*it)]);
  }
  for (int s = n - 1; s >= 0; --s) {
    if (kept[static_cast<std::size_t>(s)]) continue;
    rest_w[static_cast<std::size_t>(s)] = maps.rest_dim;
    maps.rest_dim *= static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]);
  }
  const std::size_t dim = total_dim(dims);
  maps.keep.resize(dim);
  maps.rest.resize(dim);
  std::vector<int> digit(dims.size(), 0);
  std::size_t k = 0, r = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    maps.keep[i] = static_cast<std::uint32_t>(k);
    maps.rest[i] = static_cast<std::uint32_t>(r);
    // Odometer increment from the least significant site.
    for (int s = n - 1; s >= 0; --s) {
      const auto us = static_cast<std::size_t>(s);
      const std::size_t w = kept[us] ? keep_w[us] : rest_w[us];
      std::size_t& acc = kept[us] ? k : r;
      if (++digit[us] < dims[us]) {
        acc += w;
        break;
      }
      acc -= w * static_cast<std::size_t>(dims[us] - 1);
      digit[us] = 0;
    }
  }
  return maps;
}

std::vector<double> outcome_probabilities(const PureState& state, const std::vector<int>& sites,
                                          std::vector<std::uint32_t>& outcome_of) {
  check_sites(sites, state.n_sites(), "measure_subset");
  if (sites.empty()) throw std::invalid_argument("measure_subset: no sites");
  SplitMaps maps = split_maps(state.local_dims(), sites);
  std::vector<double> p(maps.keep_dim, 0.0);
  const CVector& a = state.amplitudes();
  for (std::size_t i = 0; i < state.dim(); ++i) p[maps.keep[i]] += std::norm(a[static_cast<Eigen::Index>(i)]);
  outcome_of = std::move(maps.keep);
  return p;
}

MeasurementOutcome collapse(const PureState& state, const std::vector<int>& sites,
                            const std::vector<std::uint32_t>& outcome_of, std::size_t outcome,
                            double p) {
  CVector post = CVector::Zero(static_cast<Eigen::Index>(state.dim()));
  const double scale = 1.0 / std::sqrt(p);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (outcome_of[i] == outcome) post[static_cast<Eigen::Index>(i)] = state[i] * scale;
  }
  std::vector<int> sub_dims;
  for (int s : sites) sub_dims.push_back(state.local_dims()[static_cast<std::size_t>(s)]);
  MeasurementOutcome out;
  out.digits = digits_of(outcome, sub_dims);
  out.probability = p;
  out.post = PureState(state.local_dims(), std::move(post), true);
  return out;
}

}  // namespace

const char* to_string(LogBase base) { return base == LogBase::Two ? "bits" : "nats"; }

double log_in(double x, LogBase base) {
  return base == LogBase::Two ? std::log2(x) : std::log(x);
}

double nats_to(LogBase base) { return base == LogBase::Two ? 1.0 / std::log(2.0) : 1.0; }

std::size_t total_dim(const std::vector<int>& dims) {
  std::size_t d = 1;
  for (int k : dims) {
    if (k < 2) throw std::invalid_argument("local dimension must be >= 2");
    d *= static_cast<std::size_t>(k);
    if (d > kMaxDenseDim) throw BudgetError("register exceeds 2^24 amplitudes");
  }
  return d;
}

std::vector<std::size_t> strides_of(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * static_cast<std::size_t>(dims[k]);
  return s;
}

std::vector<int> digits_of(std::size_t index, const std::vector<int>& dims) {
  std::vector<int> d(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    d[k] = static_cast<int>(index % static_cast<std::size_t>(dims[k]));
    index /= static_cast<std::size_t>(dims[k]);
  }
  return d;
}

std::size_t index_of(const std::vector<int>& digits, const std::vector<int>& dims) {
  if (digits.size() != dims.size()) throw std::invalid_argument("index_of: length mismatch");
  std::size_t i = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (digits[k] < 0 || digits[k] >= dims[k]) throw std::out_of_range("index_of: digit out of range");
    i = i * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(digits[k]);
  }
  return i;
}

std::vector<std::uint32_t> subset_index_map(const std::vector<int>& dims,
                                            const std::vector<int>& positions) {
  check_sites(positions, static_cast<int>(dims.size()), "subset_index_map");
  return split_maps(dims, positions).keep;
}

// ---------------------------------------------------------------- PureState

PureState::PureState(std::vector<int> dims, CVector amplitudes, bool normalize)
    : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
  if (dims_.empty()) throw std::invalid_argument("PureState: no sites");
  if (total_dim(dims_) != static_cast<std::size_t>(amps_.size())) {
    throw std::invalid_argument("PureState: amplitude length does not match local dims");
  }
  const double nrm = amps_.norm();
  if (normalize) {
    if (!(nrm > 1e-300) || !std::isfinite(nrm)) throw std::invalid_argument("PureState: zero vector");
    amps_ /= nrm;
  } else if (std::abs(nrm * nrm - 1.0) > kNormTol) {
    throw std::invalid_argument("PureState: not normalized");
  }
}

PureState PureState::basis(std::vector<int> dims, const std::vector<int>& digits) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(total_dim(dims)));
  v[static_cast<Eigen::Index>(index_of(digits, dims))] = 1.0;
  return PureState(std::move(dims), std::move(v));
}

PureState PureState::qubits_zero(int n) {
  std::vector<int> dims(static_cast<std::size_t>(n), 2);
  return basis(dims, std::vector<int>(static_cast<std::size_t>(n), 0));
}

// ------------------------------------------------------------ DensityMatrix

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw std::invalid_argument("DensityMatrix: not square");
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kNormTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(m_.trace() - cplx(1.0)) > kNormTol) throw std::invalid_argument("DensityMatrix: trace != 1");
  if (eigenvalues().minCoeff() < -1e-9) throw std::invalid_argument("DensityMatrix: not PSD");
}

DensityMatrix DensityMatrix::from_pure(const CVector& v) {
  return DensityMatrix(CMatrix(v * v.adjoint() / v.squaredNorm()));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return DensityMatrix(CMatrix(CMatrix::Identity(d, d) / static_cast<double>(dim)));
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// ------------------------------------------------------------------ Unitary

Unitary::Unitary(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw std::invalid_argument("Unitary: not square");
  const auto d = m_.rows();
  if ((m_.adjoint() * m_ - CMatrix::Identity(d, d)).norm() > kNormTol) {
    throw std::invalid_argument("Unitary: U^dagger U != I");
  }
}

Unitary Unitary::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return Unitary(CMatrix::Identity(d, d));
}

Unitary Unitary::adjoint() const { return Unitary(CMatrix(m_.adjoint())); }

// ------------------------------------------------------------ SitePartition

void SitePartition::validate(int n_sites) const {
  std::vector<int> all;
  all.insert(all.end(), A.begin(), A.end());
  all.insert(all.end(), B.begin(), B.end());
  all.insert(all.end(), C.begin(), C.end());
  check_sites(all, n_sites, "SitePartition");
  if (distance < 0) throw std::invalid_argument("SitePartition: negative distance");
}

SitePartition SitePartition::chain(int a0, int la, int c0, int lc) {
  if (la < 1 || lc < 1 || c0 < a0 + la) throw std::invalid_argument("SitePartition::chain: bad layout");
  SitePartition p;
  for (int i = a0; i < a0 + la; ++i) p.A.push_back(i);
  for (int i = a0 + la; i < c0; ++i) p.B.push_back(i);
  for (int i = c0; i < c0 + lc; ++i) p.C.push_back(i);
  p.distance = c0 - (a0 + la) + 1;
  return p;
}

// -------------------------------------------------------------------- gates

namespace gates {
CMatrix X() { CMatrix m(2, 2); m << 0, 1, 1, 0; return m; }
CMatrix Y() { CMatrix m(2, 2); m << 0, cplx(0, -1), cplx(0, 1), 0; return m; }
CMatrix Z() { CMatrix m(2, 2); m << 1, 0, 0, -1; return m; }
CMatrix H() { CMatrix m(2, 2); m << 1, 1, 1, -1; return m * M_SQRT1_2; }
CMatrix CNOT() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}
CMatrix SWAP() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return m;
}
CMatrix Ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  CMatrix m(2, 2);
  m << c, s, -s, c;
  return m;
}
}  // namespace gates

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// ------------------------------------------------------------ gate kernels

void apply_gate_inplace(PureState& state, const CMatrix& gate, const std::vector<int>& sites) {
  check_sites(sites, state.n_sites(), "apply_gate");
  if (sites.empty()) throw std::invalid_argument("apply_gate: no sites");
  const auto& dims = state.local_dims();
  const auto strides = strides_of(dims);
  std::size_t g = 1;
  for (int s : sites) g *= static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]);
  if (static_cast<std::size_t>(gate.rows()) != g || gate.rows() != gate.cols()) {
    throw std::invalid_argument("apply_gate: gate dimension does not match targeted sites");
  }
  // Offsets of the g sub-block entries relative to a base index.
  std::vector<std::size_t> offset(g, 0);
  {
    std::vector<int> sub_dims;
    for (int s : sites) sub_dims.push_back(dims[static_cast<std::size_t>(s)]);
    for (std::size_t j = 0; j < g; ++j) {
      const auto dg = digits_of(j, sub_dims);
      for (std::size_t t = 0; t < sites.size(); ++t)
        offset[j] += static_cast<std::size_t>(dg[t]) * strides[static_cast<std::size_t>(sites[t])];
    }
  }
  std::vector<bool> targeted(dims.size(), false);
  for (int s : sites) targeted[static_cast<std::size_t>(s)] = true;

  CVector& a = state.mutable_amplitudes();
  std::vector<cplx> in(g), out(g);
  const std::size_t dim = state.dim();
  const int n = state.n_sites();
  std::vector<int> digit(dims.size(), 0);
  std::size_t base = 0;
  while (true) {
    for (std::size_t j = 0; j < g; ++j) in[j] = a[static_cast<Eigen::Index>(base + offset[j])];
    for (std::size_t r = 0; r < g; ++r) {
      cplx acc = 0;
      for (std::size_t c = 0; c < g; ++c) acc += gate(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      out[r] = acc;
    }
    for (std::size_t j = 0; j < g; ++j) a[static_cast<Eigen::Index>(base + offset[j])] = out[j];
    // Advance over untargeted digits only.
    int s = n - 1;
    for (; s >= 0; --s) {
      const auto us = static_cast<std::size_t>(s);
      if (targeted[us]) continue;
      if (++digit[us] < dims[us]) {
        base += strides[us];
        break;
      }
      base -= strides[us] * static_cast<std::size_t>(dims[us] - 1);
      digit[us] = 0;
    }
    if (s < 0) break;
  }
  (void)dim;
}

PureState apply_gate(const PureState& state, const Unitary& gate, const std::vector<int>& sites) {
  PureState out = state;
  apply_gate_inplace(out, gate.matrix(), sites);
  return out;
}

// --------------------------------------------------------- partial traces

DensityMatrix partial_trace(const PureState& state, const std::vector<int>& keep) {
  check_sites(keep, state.n_sites(), "partial_trace");
  if (keep.empty()) return DensityMatrix(CMatrix::Ones(1, 1));
  const SplitMaps maps = split_maps(state.local_dims(), keep);
  CMatrix psi = CMatrix::Zero(static_cast<Eigen::Index>(maps.keep_dim), static_cast<Eigen::Index>(maps.rest_dim));
  for (std::size_t i = 0; i < state.dim(); ++i) psi(maps.keep[i], maps.rest[i]) = state[i];
  CMatrix rho = psi * psi.adjoint();
  rho = 0.5 * (rho + CMatrix(rho.adjoint()));
  return DensityMatrix(std::move(rho));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims,
                            const std::vector<int>& keep) {
  if (total_dim(dims) != rho.dim()) throw std::invalid_argument("partial_trace: dims do not match matrix");
  check_sites(keep, static_cast<int>(dims.size()), "partial_trace");
  if (keep.empty()) return DensityMatrix(CMatrix::Ones(1, 1));
  const SplitMaps maps = split_maps(dims, keep);
  // full[r][k] = basis index with rest index r and keep index k.
  std::vector<std::vector<std::size_t>> full(maps.rest_dim, std::vector<std::size_t>(maps.keep_dim));
  for (std::size_t i = 0; i < rho.dim(); ++i) full[maps.rest[i]][maps.keep[i]] = i;
  const auto kd = static_cast<Eigen::Index>(maps.keep_dim);
  CMatrix out = CMatrix::Zero(kd, kd);
  const CMatrix& m = rho.matrix();
  for (const auto& row : full)
    for (Eigen::Index k = 0; k < kd; ++k)
      for (Eigen::Index l = 0; l < kd; ++l)
        out(k, l) += m(static_cast<Eigen::Index>(row[static_cast<std::size_t>(k)]),
                       static_cast<Eigen::Index>(row[static_cast<std::size_t>(l)]));
  return DensityMatrix(std::move(out));
}

// ---------------------------------------------------------------- entropy

double von_neumann_entropy(const DensityMatrix& rho, LogBase base) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  double s = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > kEigCutoff) s -= ev[i] * log_in(ev[i], base);
  return std::max(s, 0.0);
}

double shannon_entropy(const std::vector<double>& p, LogBase base) {
  double s = 0;
  for (double x : p)
    if (x > kEigCutoff) s -= x * log_in(x, base);
  return std::max(s, 0.0);
}

double binary_entropy(double p) { return shannon_entropy({p, 1.0 - p}, LogBase::Two); }

double concurrence(const PureState& s) {
  if (s.dim() != 4) throw std::invalid_argument("concurrence: need a two-qubit state");
  return 2.0 * std::abs(s[0] * s[3] - s[1] * s[2]);
}

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("concurrence: need a 4x4 density matrix");
  const CMatrix yy = kron(gates::Y(), gates::Y());
  const CMatrix tilde = yy * rho.matrix().conjugate() * yy;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix sq = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  CMatrix r = sq * tilde * sq;
  r = 0.5 * (r + CMatrix(r.adjoint()));
  Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<CMatrix>(r, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseMax(0.0)
                            .cwiseSqrt();
  std::sort(lam.data(), lam.data() + lam.size(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double reduced_concurrence(const CMatrix& rho) {
  const double tr = rho.trace().real();
  const double tr2 = (rho * rho).trace().real();
  return std::sqrt(std::max(0.0, 2.0 * (tr * tr - tr2)));
}

double entropy_from_concurrence(double c) {
  if (!(c >= -1e-12 && c <= 1.0 + 1e-12)) throw std::domain_error("entropy_from_concurrence: C outside [0,1]");
  c = std::clamp(c, 0.0, 1.0);
  return binary_entropy((1.0 + std::sqrt(1.0 - c * c)) / 2.0);
}

// -------------------------------------------------------------------- Haar

Unitary haar_unitary(std::size_t dim, Rng& rng) {
  if (dim == 0) throw std::invalid_argument("haar_unitary: dim = 0");
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix z(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    q.col(j) *= rjj / std::abs(rjj);
  }
  return Unitary(std::move(q));
}

CVector haar_state(std::size_t dim, Rng& rng) {
  CVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.complex_normal();
  return v / v.norm();
}

// ------------------------------------------------------------ measurement

MeasurementOutcome measure_subset(const PureState& state, const std::vector<int>& sites, Rng& rng) {
  std::vector<std::uint32_t> outcome_of;
  const auto p = outcome_probabilities(state, sites, outcome_of);
  double u = rng.uniform();
  std::size_t pick = p.size() - 1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (u < p[k]) {
      pick = k;
      break;
    }
    u -= p[k];
  }
  while (p[pick] <= 0.0 && pick > 0) --pick;  // guard against round-off at the tail
  return collapse(state, sites, outcome_of, pick, p[pick]);
}

std::vector<MeasurementOutcome> measure_subset_all(const PureState& state, const std::vector<int>& sites,
                                                   double floor) {
  std::vector<std::uint32_t> outcome_of;
  const auto p = outcome_probabilities(state, sites, outcome_of);
  std::vector<MeasurementOutcome> out;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > floor) out.push_back(collapse(state, sites, outcome_of, k, p[k]));
  return out;
}

}  // namespace cmilab
