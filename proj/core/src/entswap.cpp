#include "cmilab/entswap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "cmilab/errors.hpp"
#include "cmilab/parallel.hpp"

namespace cmilab {

namespace {

constexpr double kProbFloor = 1e-14;

int sqrt_dim(std::size_t dim) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
  if (static_cast<std::size_t>(d) * static_cast<std::size_t>(d) != dim)
    throw std::invalid_argument("basis dimension is not a square");
  return d;
}

double top_eigenvalue(const CMatrix& rho) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(rho, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

DensityMatrix normalized_reduced(const CMatrix& psi) {
  CMatrix rho = psi * psi.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + CMatrix(rho.adjoint()));
  return DensityMatrix(std::move(rho));
}

}  // namespace

// -------------------------------------------------------------- SchmidtPair

SchmidtPair::SchmidtPair(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 2) throw std::invalid_argument("SchmidtPair: need d0 >= 2");
  double s = 0;
  for (double c : coeffs_) {
    if (!(c >= 0)) throw std::invalid_argument("SchmidtPair: negative coefficient");
    s += c * c;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("SchmidtPair: coefficients not normalized");
}

SchmidtPair SchmidtPair::qubit(double a0_squared) {
  if (a0_squared < 0 || a0_squared > 1) throw std::invalid_argument("SchmidtPair::qubit: a0^2 outside [0,1]");
  return SchmidtPair({std::sqrt(a0_squared), std::sqrt(1.0 - a0_squared)});
}

SchmidtPair SchmidtPair::epr(int d) {
  return SchmidtPair(std::vector<double>(static_cast<std::size_t>(d), 1.0 / std::sqrt(d)));
}

SchmidtPair SchmidtPair::random(int d, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(d));
  double s = 0;
  for (double& x : w) {
    x = -std::log(1.0 - rng.uniform());
    s += x;
  }
  for (double& x : w) x = std::sqrt(x / s);
  // Renormalize once more so the 1e-12 invariant survives round-off.
  double n2 = 0;
  for (double x : w) n2 += x * x;
  for (double& x : w) x /= std::sqrt(n2);
  return SchmidtPair(std::move(w));
}

CVector SchmidtPair::state() const {
  const int d = d0();
  CVector v = CVector::Zero(d * d);
  for (int k = 0; k < d; ++k) v[k * d + k] = coeffs_[static_cast<std::size_t>(k)];
  return v;
}

CMatrix SchmidtPair::reduced() const {
  CMatrix m = CMatrix::Zero(d0(), d0());
  for (int k = 0; k < d0(); ++k) m(k, k) = coeffs_[static_cast<std::size_t>(k)] * coeffs_[static_cast<std::size_t>(k)];
  return m;
}

// ---------------------------------------------------------------- Bell basis

std::vector<CVector> bell_basis(int d) {
  if (d < 2) throw std::invalid_argument("bell_basis: d >= 2");
  std::vector<CVector> out;
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      CVector v = CVector::Zero(d * d);
      for (int x = 0; x < d; ++x) v[x * d + (x + b) % d] = std::polar(inv, 2 * M_PI * a * x / d);
      out.push_back(std::move(v));
    }
  return out;
}

Unitary bell_unitary(int d) {
  const auto basis = bell_basis(d);
  CMatrix m(d * d, d * d);
  for (int j = 0; j < d * d; ++j) m.col(j) = basis[static_cast<std::size_t>(j)];
  return Unitary(std::move(m));
}

PureState swap_input_state(const SchmidtPair& a, const SchmidtPair& b) {
  if (a.d0() != b.d0()) throw std::invalid_argument("swap_input_state: mismatched d0");
  const int d = a.d0();
  CVector v = CVector::Zero(d * d * d * d);
  // |k>_A |k>_B |l>_C |l>_D
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) v[((k * d + k) * d + l) * d + l] = a[k] * b[l];
  return PureState(std::vector<int>(4, d), std::move(v));
}

BellDecomposition bell_decompose(const SchmidtPair& a, const SchmidtPair& b) {
  if (a.d0() != b.d0()) throw std::invalid_argument("bell_decompose: mismatched d0");
  const int d = a.d0();
  const auto bell = bell_basis(d);
  const PureState direct = swap_input_state(a, b);
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));

  // Reassemble sum_ij Phi_ij^BC (x) chi_ij^AD with
  // chi_ij = d^{-1/2} sum_k w^{-ik} a_k b_{k+j} |k, k+j>.
  CVector rebuilt = CVector::Zero(static_cast<Eigen::Index>(direct.dim()));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const CVector& phi = bell[static_cast<std::size_t>(i * d + j)];
      for (int k = 0; k < d; ++k) {
        const int l = (k + j) % d;
        const cplx chi = std::polar(inv * a[k] * b[l], -2 * M_PI * i * k / d);
        for (int x = 0; x < d; ++x)
          for (int y = 0; y < d; ++y) {
            const cplx ph = phi[x * d + y];
            if (ph == cplx(0)) continue;
            rebuilt[((k * d + x) * d + y) * d + l] += ph * chi;  // A=k, B=x, C=y, D=l
          }
      }
    }
  BellDecomposition out;
  out.residual = (rebuilt - direct.amplitudes()).norm();

  const int dd = d * d;
  out.overlaps = CMatrix::Zero(dd, dd);
  for (int m = 0; m < dd; ++m)
    for (int l = 0; l < dd; ++l) {
      const CVector& ad = bell[static_cast<std::size_t>(m)];
      const CVector& bc = bell[static_cast<std::size_t>(l)];
      cplx s = 0;
      for (int xa = 0; xa < d; ++xa)
        for (int xd = 0; xd < d; ++xd)
          for (int xb = 0; xb < d; ++xb)
            for (int xc = 0; xc < d; ++xc)
              s += std::conj(ad[xa * d + xd] * bc[xb * d + xc]) * direct[static_cast<std::size_t>(((xa * d + xb) * d + xc) * d + xd)];
      out.overlaps(m, l) = s;
    }
  return out;
}

// ---------------------------------------------------------------- swapping

double SwapResult::total_probability() const {
  double s = 0;
  for (const auto& o : outcomes) s += o.probability;
  return s;
}

double SwapResult::avg_entropy(LogBase base) const {
  double s = 0;
  for (const auto& o : outcomes) s += o.probability * von_neumann_entropy(o.rho_a, base);
  return s;
}

SwapResult swap_once(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U) {
  if (a.d0() != b.d0()) throw std::invalid_argument("swap_once: mismatched d0");
  const int d = a.d0();
  if (U.dim() != static_cast<std::size_t>(d * d)) throw std::invalid_argument("swap_once: U must have dim d0^2");
  SwapResult r{{}, U};
  const CMatrix& u = U.matrix();
  for (int i = 0; i < d * d; ++i) {
    CMatrix psi(d, d);
    for (int x1 = 0; x1 < d; ++x1)
      for (int x2 = 0; x2 < d; ++x2) psi(x1, x2) = std::conj(u(x1 * d + x2, i)) * a[x1] * b[x2];
    const double p = psi.squaredNorm();
    if (p < kProbFloor) continue;
    r.outcomes.push_back({i, p, psi, normalized_reduced(psi)});
  }
  return r;
}

EntropyBound entropy_bound_check(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U) {
  if (a.d0() != 2 || b.d0() != 2) throw std::invalid_argument("entropy_bound_check: qubits only");
  EntropyBound e;
  e.lhs = swap_once(a, b, U).avg_entropy(LogBase::Two);
  const double a0 = a[0] * a[0], a1 = a[1] * a[1], b0 = b[0] * b[0], b1 = b[1] * b[1];
  e.p0 = a0 * b0 + a1 * b1;
  e.p1 = a0 * b1 + a1 * b0;
  if (e.p0 > 0) e.rhs += e.p0 * shannon_entropy({a0 * b0 / e.p0, a1 * b1 / e.p0});
  if (e.p1 > 0) e.rhs += e.p1 * shannon_entropy({a0 * b1 / e.p1, a1 * b0 / e.p1});
  return e;
}

std::vector<double> parity_conditional_entropy(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U) {
  if (a.d0() != 2 || b.d0() != 2) throw std::invalid_argument("parity_conditional_entropy: qubits only");
  std::vector<double> out;
  for (const auto& o : swap_once(a, b, U).outcomes) {
    std::vector<double> px(4);
    for (int x = 0; x < 4; ++x) px[static_cast<std::size_t>(x)] = std::norm(o.psi_ad(x / 2, x % 2)) / o.probability;
    const double even = px[0] + px[3];
    // X determines odd(X), so H(X | odd) = H(X) - H(odd).
    out.push_back(std::max(0.0, shannon_entropy(px) - shannon_entropy({even, 1.0 - even})));
  }
  return out;
}

ConcurrenceReport post_measurement_concurrence(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U) {
  const int d = a.d0();
  const SwapResult sr = swap_once(a, b, U);
  const CMatrix& u = U.matrix();
  ConcurrenceReport r;
  for (const auto& o : sr.outcomes) {
    double s = 0;
    for (int x1 = 0; x1 < d; ++x1)
      for (int y1 = x1 + 1; y1 < d; ++y1)
        for (int x2 = 0; x2 < d; ++x2)
          for (int y2 = x2 + 1; y2 < d; ++y2) {
            const cplx minor = u(x1 * d + x2, o.index) * u(y1 * d + y2, o.index) -
                               u(x1 * d + y2, o.index) * u(y1 * d + x2, o.index);
            s += std::norm(minor) * a[x1] * a[x1] * a[y1] * a[y1] * b[x2] * b[x2] * b[y2] * b[y2];
          }
    r.closed_form.push_back(2.0 * std::sqrt(s));
    const CMatrix rho_tilde = o.psi_ad * o.psi_ad.adjoint();
    r.direct.push_back(reduced_concurrence(rho_tilde));
    r.avg_concurrence += r.direct.back();
  }
  r.avg_entropy = sr.avg_entropy(LogBase::Two);
  r.bound = d == 2 ? 4 * a[0] * a[1] * b[0] * b[1] : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double concurrence_entropy_constant(int d) {
  if (d < 2) throw std::invalid_argument("concurrence_entropy_constant: d >= 2");
  return std::log2(static_cast<double>(d)) * std::sqrt(d / (2.0 * (d - 1)));
}

// ------------------------------------------------------------------- chain

ChainSwapResult chain_swap(int n, const SchmidtPair& a, const std::vector<Unitary>& bases, ChainMode mode,
                           Rng* rng, std::size_t samples) {
  if (n < 2) throw std::invalid_argument("chain_swap: n >= 2");
  if (bases.size() != static_cast<std::size_t>(n - 1)) throw std::invalid_argument("chain_swap: need n-1 bases");
  const int d = a.d0();
  const int dd = d * d;
  for (const auto& U : bases)
    if (U.dim() != static_cast<std::size_t>(dd)) throw std::invalid_argument("chain_swap: basis dim must be d0^2");

  ChainSwapResult res;
  res.bound = d == 2 ? std::pow(std::abs(2 * a[0] * a[1]), n) : std::numeric_limits<double>::quiet_NaN();

  // M[x, y]: amplitude of |x>_{L_1} |y>_{R_j} after the first j-1 measurements.
  auto step = [&](const CMatrix& M, const CMatrix& U, int i) {
    CMatrix out = CMatrix::Zero(d, d);
    for (int r = 0; r < d; ++r)
      for (int l = 0; l < d; ++l) {
        const cplx w = std::conj(U(r * d + l, i)) * a[l];
        if (w == cplx(0)) continue;
        out.col(l) += w * M.col(r);
      }
    return out;
  };
  auto leaf = [&](const CMatrix& M, double& s, double& c) {
    const DensityMatrix rho = normalized_reduced(M);
    s = von_neumann_entropy(rho, LogBase::Two);
    c = reduced_concurrence(rho.matrix());
  };

  CMatrix M0 = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) M0(k, k) = a[k];

  if (mode == ChainMode::Enumerate) {
    double paths = 1;
    for (int j = 0; j < n - 1; ++j) paths *= dd;
    if (paths > static_cast<double>(kChainEnumerationBudget))
      throw BudgetError("chain_swap: enumeration exceeds 2^20 outcome sequences; use sampling");
    std::function<void(const CMatrix&, int)> rec = [&](const CMatrix& M, int j) {
      if (j == n - 1) {
        const double p = M.squaredNorm();
        ++res.paths;
        if (p < 1e-300) return;
        double s, c;
        leaf(M, s, c);
        res.avg_entropy += p * s;
        res.avg_concurrence += p * c;
        return;
      }
      for (int i = 0; i < dd; ++i) {
        CMatrix next = step(M, bases[static_cast<std::size_t>(j)].matrix(), i);
        if (next.squaredNorm() == 0.0) {
          res.paths += static_cast<std::size_t>(std::pow(dd, n - 2 - j));
          continue;
        }
        rec(next, j + 1);
      }
    };
    rec(M0, 0);
    return res;
  }

  if (!rng || samples == 0) throw std::invalid_argument("chain_swap: sampling needs an rng and a sample count");
  res.sampled = true;
  double sum = 0, sum2 = 0, csum = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    CMatrix M = M0;
    for (int j = 0; j < n - 1; ++j) {
      const double norm = M.squaredNorm();
      std::vector<CMatrix> branch;
      std::vector<double> p;
      for (int i = 0; i < dd; ++i) {
        branch.push_back(step(M, bases[static_cast<std::size_t>(j)].matrix(), i));
        p.push_back(branch.back().squaredNorm() / norm);
      }
      double u = rng->uniform();
      int pick = dd - 1;
      for (int i = 0; i < dd; ++i) {
        if (u < p[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
        u -= p[static_cast<std::size_t>(i)];
      }
      while (p[static_cast<std::size_t>(pick)] <= 0 && pick > 0) --pick;
      M = branch[static_cast<std::size_t>(pick)];
      M /= std::sqrt(M.squaredNorm());
    }
    double s, c;
    leaf(M, s, c);
    sum += s;
    sum2 += s * s;
    csum += c;
  }
  const double m = static_cast<double>(samples);
  res.paths = samples;
  res.avg_entropy = sum / m;
  res.avg_concurrence = csum / m;
  res.std_error = samples > 1 ? std::sqrt(std::max(0.0, (sum2 / m - res.avg_entropy * res.avg_entropy) / (m - 1))) : 0;
  return res;
}

// --------------------------------------------------------- rotated cluster

PureState rotated_cluster_state(int n, double theta) {
  if (n < 2 || n % 2) throw std::invalid_argument("rotated_cluster_state: n must be even and >= 2");
  PureState s = PureState::qubits_zero(n);
  const CMatrix h = gates::H(), cx = gates::CNOT();
  for (int i = 0; i < n; i += 2) {
    apply_gate_inplace(s, h, {i});
    apply_gate_inplace(s, cx, {i, i + 1});
  }
  for (int i = 1; i + 1 < n; i += 2) {
    apply_gate_inplace(s, cx, {i, i + 1});
    apply_gate_inplace(s, h, {i});
  }
  const CMatrix ry = gates::Ry(theta);
  for (int i = 0; i < n; ++i) apply_gate_inplace(s, ry, {i});
  return s;
}

RotatedClusterResult rotated_cluster_experiment(int n, double theta) {
  if (n < 4 || n > 20 || n % 2) throw std::invalid_argument("rotated_cluster_experiment: need even 4 <= n <= 20");
  if (!(theta >= 0 && theta <= M_PI / 2 + 1e-15)) throw std::invalid_argument("rotated_cluster_experiment: theta outside [0, pi/2]");
  const PureState s = rotated_cluster_state(n, theta);
  SitePartition part = SitePartition::chain(0, 1, n - 1, 1);
  RotatedClusterResult r;
  r.n = n;
  r.theta = theta;
  r.cmi = cmi(measurement_distribution(s), part, LogBase::Two);
  r.bound = std::pow(std::cos(theta), n - 2);
  r.avg_entropy = holevo_avg_entropy(s, part, LogBase::Two);
  return r;
}

// ------------------------------------------------------------- imperfectness

double ImperfectnessReport::f(int i, int k, int kp) const {
  for (const auto& v : f_values)
    if (v.i == i && v.k == k && v.kp == kp) return v.f;
  throw std::out_of_range("ImperfectnessReport::f: no such entry");
}

double imperfectness_f_value(const CMatrix& U, const CMatrix& sigma, int i, int k, int kp) {
  // tr[U^dag (|i><i| x 1) U (|k><k'| x sigma)] = sum_{c,c'} conj(U[(i,m),(k,c)])... written out:
  // sum_m sum_{c,c'} conj(U[(i,m),(k,c')]) U[(i,m),(k',c)] sigma[c, c'].
  const auto d = static_cast<int>(sigma.rows());
  cplx t = 0;
  for (int m = 0; m < d; ++m)
    for (int c = 0; c < d; ++c)
      for (int cp = 0; cp < d; ++cp)
        t += std::conj(U(i * d + m, k * d + cp)) * U(i * d + m, kp * d + c) * sigma(c, cp);
  return std::norm(t);
}

ImperfectnessReport imperfectness_f(const Unitary& U, const DensityMatrix& sigma_c) {
  const int d = sqrt_dim(U.dim());
  if (sigma_c.dim() != static_cast<std::size_t>(d)) throw std::invalid_argument("imperfectness_f: sigma_C must have dim d0");
  ImperfectnessReport rep;
  rep.d0 = d;
  rep.sigma_c = sigma_c;

  // Purification |b> = sum_j sqrt(mu_j) |e_j>_C |j>_D.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sigma_c.matrix());
  CVector b = CVector::Zero(d * d);
  for (int j = 0; j < d; ++j) {
    const double mu = std::max(es.eigenvalues()[j], 0.0);
    for (int c = 0; c < d; ++c) b[c * d + j] = std::sqrt(mu) * es.eigenvectors()(c, j);
  }
  const CMatrix& u = U.matrix();
  // phi~_{i,k}[c, dd] = sum_{c'} U[(i,c),(k,c')] b[c', dd]
  auto phi = [&](int i, int k) {
    CVector v = CVector::Zero(d * d);
    for (int c = 0; c < d; ++c)
      for (int dd = 0; dd < d; ++dd) {
        cplx s = 0;
        for (int cp = 0; cp < d; ++cp) s += u(i * d + c, k * d + cp) * b[cp * d + dd];
        v[c * d + dd] = s;
      }
    return v;
  };

  rep.epsilon = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    std::vector<CVector> ph;
    for (int k = 0; k < d; ++k) ph.push_back(phi(i, k));
    for (int k = 0; k < d; ++k)
      for (int kp = 0; kp < d; ++kp) {
        if (k == kp) continue;
        FValue v;
        v.i = i;
        v.k = k;
        v.kp = kp;
        v.q_k = ph[static_cast<std::size_t>(k)].squaredNorm();
        v.q_kp = ph[static_cast<std::size_t>(kp)].squaredNorm();
        const cplx ov = ph[static_cast<std::size_t>(k)].dot(ph[static_cast<std::size_t>(kp)]);
        v.f = std::norm(ov);
        v.f_trace = imperfectness_f_value(u, sigma_c.matrix(), i, k, kp);
        if (v.q_k > kProbFloor && v.q_kp > kProbFloor) {
          v.overlap = v.f / (v.q_k * v.q_kp);
          rep.epsilon = std::min(rep.epsilon, v.overlap);
        }
        rep.max_formula_gap = std::max(rep.max_formula_gap, std::abs(v.f - v.f_trace));
        rep.f_values.push_back(v);
      }
  }
  if (!std::isfinite(rep.epsilon)) rep.epsilon = 0;
  return rep;
}

TopSchmidtReport top_schmidt_growth(const SchmidtPair& a, const SchmidtPair& b, const Unitary& U) {
  const int d = a.d0();
  if (b.d0() != d || U.dim() != static_cast<std::size_t>(d * d))
    throw std::invalid_argument("top_schmidt_growth: dimension mismatch");
  TopSchmidtReport r;
  r.rho_top = 0;
  for (int k = 0; k < d; ++k) r.rho_top = std::max(r.rho_top, a[k] * a[k]);
  r.epsilon = imperfectness_f(U, DensityMatrix(b.reduced())).epsilon;
  r.lower_bound = (1 - r.epsilon) * r.rho_top + r.epsilon;

  // After U on BC: amplitude of |k>_A |x>_B |c>_C |l>_D is a_k b_l U[(x,c),(k,l)].
  const CMatrix& u = U.matrix();
  for (int x = 0; x < d; ++x) {
    // Unmeasured C: psi_x as a d x d^2 matrix A vs (C, D).
    CMatrix psi = CMatrix::Zero(d, d * d);
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < d; ++c)
        for (int l = 0; l < d; ++l) psi(k, c * d + l) = a[k] * b[l] * u(x * d + c, k * d + l);
    const double p = psi.squaredNorm();
    if (p > kProbFloor) r.expected_top += p * top_eigenvalue(psi * psi.adjoint() / p);
    for (int c = 0; c < d; ++c) {
      CMatrix sub = psi.middleCols(c * d, d);
      const double pc = sub.squaredNorm();
      if (pc > kProbFloor) r.expected_top_full += pc * top_eigenvalue(sub * sub.adjoint() / pc);
    }
  }
  return r;
}

Unitary random_triangular_unitary(int d, int D, Rng& rng) {
  if (d < 2 || D < 2) throw std::invalid_argument("random_triangular_unitary: need d >= 2 and D >= 2");
  const int w = D - 1;
  const int m = 2 * w;
  const std::vector<int> dims(static_cast<std::size_t>(m), d);
  const std::size_t dim = total_dim(dims);
  const auto di = static_cast<Eigen::Index>(dim);
  CMatrix total = CMatrix::Identity(di, di);
  for (int t = 1; t <= w; ++t)
    for (int j = 0; j < t; ++j) {
      const Unitary g = haar_unitary(static_cast<std::size_t>(d * d), rng);
      const int s = w - t + 2 * j;
      for (Eigen::Index col = 0; col < di; ++col) {
        PureState v(dims, total.col(col), true);
        apply_gate_inplace(v, g.matrix(), {s, s + 1});
        total.col(col) = v.amplitudes();
      }
    }
  return Unitary(std::move(total));
}

}  // namespace cmilab

namespace cmilab {

namespace {

// Index of (b, c, b', c') in the B C B' C' register.
inline Eigen::Index bcbc(int d, int b, int c, int b2, int c2) { return ((b * d + c) * d + b2) * d + c2; }

CMatrix swap_permutation(int d, bool swap_c) {
  const Eigen::Index D = static_cast<Eigen::Index>(d) * d * d * d;
  CMatrix P = CMatrix::Zero(D, D);
  for (int b = 0; b < d; ++b)
    for (int c = 0; c < d; ++c)
      for (int b2 = 0; b2 < d; ++b2)
        for (int c2 = 0; c2 < d; ++c2)
          P(bcbc(d, b2, swap_c ? c2 : c, b, swap_c ? c : c2), bcbc(d, b, c, b2, c2)) = 1.0;
  return P;
}

}  // namespace

CMatrix partial_swap_operator(int d) { return swap_permutation(d, false); }
CMatrix full_swap_operator(int d) { return swap_permutation(d, true); }

CMatrix haar_partial_swap_twirl(int d, std::size_t samples, std::uint64_t seed) {
  if (d < 2 || samples < 1) throw std::invalid_argument("haar_partial_swap_twirl: need d >= 2 and samples >= 1");
  const CMatrix O = partial_swap_operator(d);
  const Eigen::Index D = static_cast<Eigen::Index>(d) * d * d * d;
  // Fixed chunking keeps the summation order independent of the thread count.
  const std::size_t chunk = 1024;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<CMatrix> partial(chunks, CMatrix::Zero(D, D));
  const Rng root(seed);
  parallel_for(chunks, [&](std::size_t k) {
    for (std::size_t s = k * chunk; s < std::min(samples, (k + 1) * chunk); ++s) {
      Rng rng = root.substream(static_cast<std::uint64_t>(s));
      const CMatrix V = haar_unitary(static_cast<std::size_t>(d * d), rng).matrix();
      const CMatrix W = kron(V, V);
      partial[k].noalias() += W.adjoint() * (O * W);
    }
  });
  CMatrix sum = CMatrix::Zero(D, D);
  for (const auto& p : partial) sum += p;
  return sum / static_cast<double>(samples);
}

}  // namespace cmilab
