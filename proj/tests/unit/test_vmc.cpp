#include <gtest/gtest.h>

#include <cmath>

#include "cmilab/errors.hpp"
#include "cmilab/entswap.hpp"
#include "cmilab/vmc.hpp"

using namespace cmilab;

namespace {

// psi(x) = sum over every hidden configuration h of exp(a.x + b.h + x^T W h).
cplx rbm_by_hidden_sum(const RbmParams& p, Config x) {
  cplx total = 0;
  for (std::uint64_t h = 0; h < (std::uint64_t{1} << p.n_hidden); ++h) {
    cplx e = 0;
    for (int i = 0; i < p.n; ++i) e += p.a[i] * double(config_bit(x, p.n, i));
    for (int j = 0; j < p.n_hidden; ++j) {
      const double hj = double((h >> j) & 1U);
      e += p.b[j] * hj;
      for (int i = 0; i < p.n; ++i) e += double(config_bit(x, p.n, i)) * p.W(i, j) * hj;
    }
    total += std::exp(e);
  }
  return total;
}

Ansatz random_ansatz(int n, int nh, double scale, std::uint64_t seed) {
  Rng rng(seed);
  Ansatz a;
  a.params = RbmParams::random(n, nh, scale, rng);
  return a;
}

}  // namespace

TEST(Rbm, MatchesHiddenUnitSum) {
  const Ansatz a = random_ansatz(5, 4, 0.4, 1);
  for (Config x = 0; x < 32; ++x) {
    const cplx ref = rbm_by_hidden_sum(a.params, x);
    EXPECT_LT(std::abs(rbm_amplitude(a.params, x) - ref), 1e-12 * std::abs(ref)) << x;
    EXPECT_LT(std::abs(std::exp(rbm_log_amplitude(a.params, x)) - ref), 1e-12 * std::abs(ref));
  }
  // Vector overload: site 0 first.
  EXPECT_LT(std::abs(rbm_amplitude(a.params, std::vector<int>{1, 0, 0, 1, 1}) - rbm_amplitude(a.params, Config{0b10011})),
            1e-14);
}

TEST(Rbm, LogAmplitudeStableForLargeArguments) {
  RbmParams p = RbmParams::zeros(2, 1);
  p.b[0] = 45.0;
  p.W(0, 0) = 45.0;
  const cplx l = rbm_log_amplitude(p, 0b10);
  EXPECT_TRUE(std::isfinite(l.real()));
  EXPECT_NEAR(l.real(), 90.0, 1e-12);
}

TEST(Rbm, FlattenRoundTripAndGuard) {
  RbmParams p = random_ansatz(3, 2, 1.0, 2).params;
  const CVector v = p.flatten();
  EXPECT_EQ(v.size(), p.n_complex());
  RbmParams q = RbmParams::zeros(3, 2);
  q.unflatten(v);
  EXPECT_EQ((q.W - p.W).norm(), 0.0);
  EXPECT_NO_THROW(q.check_guard());
  q.W(1, 1) = 51.0;
  EXPECT_THROW(q.check_guard(), std::overflow_error);
  q.W(1, 1) = NAN;
  EXPECT_THROW(q.check_guard(), std::overflow_error);
}

TEST(Rbm, RealOnlyHasNoImaginaryParts) {
  Rng rng(3);
  const RbmParams p = RbmParams::random(4, 3, 0.5, rng, true);
  EXPECT_EQ(p.flatten().imag().norm(), 0.0);
}

TEST(Rbm, LogDerivativesMatchFiniteDifferences) {
  const Ansatz a = random_ansatz(4, 3, 0.5, 4);
  const CVector w = a.params.flatten();
  const double h = 1e-6;
  for (Config x : {Config{0}, Config{5}, Config{13}}) {
    const CVector O = rbm_log_derivatives(a.params, x);
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      RbmParams pp = a.params, pm = a.params;
      CVector wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      pp.unflatten(wp);
      pm.unflatten(wm);
      const cplx fd = (rbm_log_amplitude(pp, x) - rbm_log_amplitude(pm, x)) / (2 * h);
      EXPECT_LT(std::abs(fd - O[k]), 1e-8) << "param " << k;
    }
  }
}

TEST(LocalEnergy, EigenstateHasConstantLocalEnergy) {
  const HamiltonianSpec H = build(RotatedCluster{6, 0.7});
  const PureState psi = rotated_cluster_state(6, 0.7);
  const LogAmplitude lp = [&](Config x) { return std::log(psi[x]); };
  for (Config x = 0; x < 64; ++x) {
    if (std::norm(psi[x]) < 1e-12) continue;
    EXPECT_LT(std::abs(local_energy(H, lp, x) - cplx(-6.0)), 1e-9);
  }
}

TEST(LocalEnergy, AverageIsRayleighQuotient) {
  const HamiltonianSpec H = build(Tfim{5, 1.0, 0.8});
  const Ansatz a = random_ansatz(5, 5, 0.3, 5);
  const PureState s = ansatz_state(a);
  cplx avg = 0;
  for (Config x = 0; x < 32; ++x) avg += std::norm(s[x]) * local_energy(H, a.oracle(), x);
  const cplx ray = s.amplitudes().dot(H.dense() * s.amplitudes());
  EXPECT_LT(std::abs(avg - ray), 1e-12);
  EXPECT_NEAR(exact_energy(a, H), ray.real(), 1e-12);
  EXPECT_THROW(local_energy(H, [](Config) { return cplx(-INFINITY, 0); }, 0), std::domain_error);
}

TEST(Metropolis, TransitionMatrixIsStochasticAndStationary) {
  const Ansatz a = random_ansatz(4, 4, 0.6, 6);
  const Eigen::MatrixXd T = metropolis_transition_matrix(a.oracle(), 4);
  const PureState s = ansatz_state(a);
  Eigen::VectorXd pi(16);
  for (int x = 0; x < 16; ++x) pi[x] = std::norm(s[static_cast<std::size_t>(x)]);
  EXPECT_LT((T.colwise().sum() - Eigen::RowVectorXd::Ones(16)).norm(), 1e-13);
  EXPECT_LT((T * pi - pi).norm(), 1e-13);
  // Detailed balance, entry by entry.
  for (int x = 0; x < 16; ++x)
    for (int y = 0; y < 16; ++y) EXPECT_NEAR(T(y, x) * pi[x], T(x, y) * pi[y], 1e-14);
}

TEST(Metropolis, ChiSquareOnEnumerableTarget) {
  const Ansatz a = random_ansatz(4, 4, 0.6, 7);
  const PureState s = ansatz_state(a);
  Rng rng(8);
  SamplerConfig cfg;
  cfg.sweeps_between = 3;
  const int N = 20000;
  const SampleBatch b = metropolis_sample(a.oracle(), 4, N, cfg, rng, 0);
  EXPECT_GT(b.acceptance, 0.0);
  EXPECT_LE(b.acceptance, 1.0);
  std::vector<int> counts(16, 0);
  for (Config c : b.configs) ++counts[c];
  double chi2 = 0;
  for (int x = 0; x < 16; ++x) {
    const double e = N * std::norm(s[static_cast<std::size_t>(x)]);
    chi2 += (counts[static_cast<std::size_t>(x)] - e) * (counts[static_cast<std::size_t>(x)] - e) / e;
  }
  // 15 dof; p = 0.001 cut at 37.7. Residual autocorrelation is covered by the margin.
  EXPECT_LT(chi2, 45.0);
}

TEST(Gradient, ExactMatchesFiniteDifferences) {
  const HamiltonianSpec H = build(Tfim{4, 1.0, 1.0});
  const Ansatz a = random_ansatz(4, 3, 0.3, 9);
  const Eigen::VectorXd g = gradient_exact(a, H).real_gradient;
  const CVector w = a.params.flatten();
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const cplx step = k < w.size() ? cplx(h, 0) : cplx(0, h);
    Ansatz p = a, m = a;
    CVector wp = w, wm = w;
    wp[k % w.size()] += step;
    wm[k % w.size()] -= step;
    p.params.unflatten(wp);
    m.params.unflatten(wm);
    EXPECT_NEAR(g[k], (exact_energy(p, H) - exact_energy(m, H)) / (2 * h), 1e-8) << k;
  }
}

TEST(Gradient, SampledConvergesToExact) {
  const HamiltonianSpec H = build(Tfim{4, 1.0, 1.0});
  const Ansatz a = random_ansatz(4, 3, 0.3, 10);
  Rng rng(11);
  const SampleBatch b = metropolis_sample(a.oracle(), 4, 40000, SamplerConfig{}, rng, 0);
  const GradientReport s = gradient(a, b.configs, H, true), e = gradient_exact(a, H, true);
  EXPECT_NEAR(s.energy.real(), e.energy.real(), 0.02);
  EXPECT_LT((s.real_gradient - e.real_gradient).norm(), 0.05 * (1 + e.real_gradient.norm()));
  EXPECT_GE(s.energy_var, 0.0);
  // S is Hermitian positive semidefinite.
  EXPECT_LT((e.sr_matrix - e.sr_matrix.adjoint()).norm(), 1e-12);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<CMatrix>(e.sr_matrix).eigenvalues().minCoeff(), -1e-12);
}

TEST(Gradient, PhaseInformedHasRealGradientOnly) {
  const HamiltonianSpec H = build(Tfim{4, 1.0, 1.0});
  Ansatz a;
  Rng rng(12);
  a.params = RbmParams::random(4, 3, 0.3, rng, true);
  a.mode = VmcMode::PhaseInformed;
  a.phase.assign(16, 0.0);
  const GradientReport g = gradient_exact(a, H, true);
  const Eigen::Index m = a.params.n_complex();
  EXPECT_EQ(g.real_gradient.tail(m).norm(), 0.0);
  EXPECT_TRUE(apply_update(a, g, Optimizer::Sr, 0.1, 1e-3) || true);
  EXPECT_EQ(a.params.flatten().imag().norm(), 0.0);
}

TEST(Update, SgdStepDecreasesEnergy) {
  const HamiltonianSpec H = build(Tfim{4, 1.0, 1.0});
  Ansatz a = random_ansatz(4, 3, 0.3, 13);
  const double e0 = exact_energy(a, H);
  for (Optimizer o : {Optimizer::Sgd, Optimizer::Sr}) {
    Ansatz b = a;
    apply_update(b, gradient_exact(b, H, o == Optimizer::Sr), o, 0.01, 1e-2);
    EXPECT_LT(exact_energy(b, H), e0) << to_string(o);
  }
  EXPECT_THROW(apply_update(a, gradient_exact(a, H, false), Optimizer::Sr, 0.01, 1e-2), std::invalid_argument);
}

TEST(Training, DeterministicAndConvergesOnSmallTfim) {
  // Sign-free coupling; with J > 0 the single-flip chain mixes poorly once the
  // ansatz concentrates on one parity sector (see ExactSrReachesSignedGroundState).
  const HamiltonianSpec H = build(Tfim{4, -1.0, 1.0});
  const double e0 = ground_state(H).energy;
  VmcConfig cfg;
  cfg.steps = 300;
  cfg.batch = 256;
  cfg.lr_step = 150;
  cfg.optimizer = Optimizer::Sr;
  cfg.sr_shift = 1e-3;
  cfg.seed = 3;
  const TrainingTrace a = train(H, cfg, e0), b = train(H, cfg, e0);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].energy_mean, b.steps[i].energy_mean);
  EXPECT_FALSE(a.aborted);
  EXPECT_LT(a.relative_error, 0.02);
  for (const auto& s : a.steps) {
    EXPECT_GE(s.energy_var, 0.0);
    EXPECT_GE(s.acceptance, 0.0);
    EXPECT_LE(s.acceptance, 1.0);
  }
}

TEST(Training, ExactSrReachesSignedGroundState) {
  const HamiltonianSpec H = build(Tfim{4, 1.0, 1.0});
  const double e0 = ground_state(H).energy;
  Rng rng(3);
  Ansatz a;
  a.params = RbmParams::random(4, 8, 0.5, rng);
  for (int s = 0; s < 2000; ++s) apply_update(a, gradient_exact(a, H, true), Optimizer::Sr, 0.05, 1e-3);
  EXPECT_NEAR(exact_energy(a, H), e0, 1e-6);
}

TEST(Training, ConfigValidation) {
  VmcConfig cfg;
  cfg.lr = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = VmcConfig{};
  cfg.optimizer = Optimizer::Sr;
  cfg.sr_shift = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(VmcConfig{}.optimizer, Optimizer::Sgd);
  EXPECT_DOUBLE_EQ(VmcConfig{}.sr_shift, 1e-2);
}

TEST(Training, DivergenceGuardAborts) {
  const HamiltonianSpec H = build(Tfim{4, 1.0, 1.0});
  VmcConfig cfg;
  cfg.steps = 50;
  cfg.batch = 64;
  cfg.divergence_threshold = -100;  // unreachable energy
  const TrainingTrace t = train(H, cfg, ground_state(H).energy);
  EXPECT_TRUE(t.aborted);
  EXPECT_LT(t.steps.size(), 50u);
}

TEST(EnergyEstimate, ChebyshevBudget) {
  const HamiltonianSpec H = build(Tfim{5, 1.0, 0.8});
  const Ansatz a = random_ansatz(5, 5, 0.3, 14);
  Rng rng(15);
  const EnergyEstimate e = energy_estimate(a.oracle(), H, 0.1, 0.1, rng);
  EXPECT_EQ(e.samples, static_cast<std::size_t>(std::max(1.0, std::ceil(e.variance / (0.01 * 0.1)))));
  EXPECT_NEAR(e.estimate, exact_energy(a, H), 0.1 + 0.05);
  EXPECT_THROW(energy_estimate(a.oracle(), H, 1e-6, 0.01, rng), BudgetError);

  // Exact eigenstate: zero variance, one sample is enough.
  const PureState psi = rotated_cluster_state(6, 0.3);
  const LogAmplitude lp = [&](Config x) { return std::log(psi[x]); };
  const EnergyEstimate z = energy_estimate(lp, build(RotatedCluster{6, 0.3}), 1e-3, 0.05, rng);
  EXPECT_NEAR(z.estimate, -6.0, 1e-9);
  EXPECT_LT(z.variance, 1e-18);
}
