#include <cmath>
#include <stdexcept>

#include "cmilab/errors.hpp"
#include "cmilab/hamiltonians.hpp"
#include "cmilab/parallel.hpp"

namespace cmilab {

namespace {

struct Eigenpair {
  double value = 0;
  CVector vector;
};

void orthogonalize(CVector& v, const std::vector<CVector>& against) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& u : against) v -= u.dot(v) * u;
}

// Lowest eigenpair of H restricted to the complement of `deflate`.
// Explicit restarts from the current Ritz vector; cheap enough at n <= 20.
Eigenpair lanczos_lowest(const HamiltonianSpec& spec, const std::vector<CVector>& deflate, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << spec.n);
  const int krylov = static_cast<int>(std::min<Eigen::Index>(dim - static_cast<Eigen::Index>(deflate.size()), 160));
  if (krylov < 1) throw std::invalid_argument("lanczos: nothing left after deflation");
  Rng rng(seed);
  CVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.complex_normal();
  orthogonalize(v, deflate);
  v.normalize();

  CVector w(dim);
  for (int restart = 0; restart < 200; ++restart) {
    std::vector<CVector> basis{v};
    std::vector<double> alpha, beta;
    for (int k = 0; k < krylov; ++k) {
      spec.apply(basis[static_cast<std::size_t>(k)], w);
      const double a = basis[static_cast<std::size_t>(k)].dot(w).real();
      alpha.push_back(a);
      orthogonalize(w, basis);
      orthogonalize(w, deflate);
      const double b = w.norm();
      if (k + 1 == krylov || b < 1e-12) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      T(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    CVector ritz = CVector::Zero(dim);
    for (Eigen::Index i = 0; i < m; ++i) ritz += es.eigenvectors()(i, 0) * basis[static_cast<std::size_t>(i)];
    orthogonalize(ritz, deflate);
    ritz.normalize();
    spec.apply(ritz, w);
    const double e = ritz.dot(w).real();
    const double res = (w - e * ritz).norm();
    if (res < 1e-11 || (res < 1e-9 && restart > 20)) return {e, ritz};
    v = ritz;
  }
  throw std::runtime_error("ground_state: Lanczos did not converge");
}

}  // namespace

GroundStateResult ground_state(const HamiltonianSpec& spec) {
  spec.validate();
  GroundStateResult r;
  CVector psi;
  if (spec.n <= kDenseSolverMaxSites) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(spec.dense());
    r.energy = es.eigenvalues()[0];
    r.gap = es.eigenvalues().size() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : INFINITY;
    psi = es.eigenvectors().col(0);
    r.dense_solver = true;
  } else {
    const Eigenpair g = lanczos_lowest(spec, {}, 0x9e3779b97f4a7c15ULL);
    const Eigenpair e1 = lanczos_lowest(spec, {g.vector}, 0x7f4a7c159e3779b9ULL);
    r.energy = g.value;
    r.gap = e1.value - g.value;
    psi = g.vector;
    r.dense_solver = false;
  }
  Eigen::Index top = 0;
  psi.cwiseAbs().maxCoeff(&top);
  psi *= std::abs(psi[top]) / psi[top];
  CVector hpsi;
  spec.apply(psi, hpsi);
  r.residual = (hpsi - r.energy * psi).norm();
  if (r.residual >= 1e-9) throw std::runtime_error("ground_state: residual above 1e-9");
  r.degenerate = r.gap < kDegeneracyGap;
  r.state = PureState(std::vector<int>(static_cast<std::size_t>(spec.n), 2), psi, true);
  return r;
}

std::vector<double> lowest_eigenvalues(const HamiltonianSpec& spec, int count) {
  spec.validate();
  if (spec.n > 12) throw BudgetError("lowest_eigenvalues: dense spectrum limited to 12 sites");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(spec.dense(), Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int i = 0; i < count && i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

std::vector<DecayScanRow> cmi_decay_scan(const std::vector<HamiltonianSpec>& specs, const CmiSchedule& schedule) {
  std::vector<DecayScanRow> rows(specs.size());
  parallel_for(specs.size(), [&](std::size_t k) {
    const HamiltonianSpec& spec = specs[k];
    const GroundStateResult gs = ground_state(spec);
    if (gs.degenerate) throw std::domain_error("cmi_decay_scan: degenerate ground state for " + spec.model + " " + spec.params);
    const Distribution dist = measurement_distribution(gs.state);
    DecayScanRow& row = rows[k];
    row.model = spec.model;
    row.params = spec.params;
    row.gap = gs.gap;
    std::vector<std::pair<double, double>> pts;
    for (int d : schedule.distances) {
      row.distances.push_back(d);
      row.cmi_bits.push_back(cmi(dist, schedule.partition(spec, d), LogBase::Two).cmi);
      pts.emplace_back(d, row.cmi_bits.back());
    }
    if (pts.size() >= 3) row.fit = fit_cmi_length(pts);
  });
  return rows;
}

}  // namespace cmilab
