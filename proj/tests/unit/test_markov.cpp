#include <gtest/gtest.h>

#include <cmath>

#include "cmilab/markov.hpp"

using namespace cmilab;

namespace {

// Bits x_0..x_{n-1}, each flipped from its left neighbour with its own probability.
Distribution markov_bits(int n, Rng& rng) {
  std::vector<double> flip(static_cast<std::size_t>(n));
  for (auto& f : flip) f = 0.1 + 0.8 * rng.uniform();
  const double p0 = 0.3 + 0.4 * rng.uniform();
  std::vector<double> p(std::size_t{1} << n);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto x = digits_of(i, std::vector<int>(static_cast<std::size_t>(n), 2));
    double q = x[0] ? 1 - p0 : p0;
    for (int k = 1; k < n; ++k) {
      const double f = flip[static_cast<std::size_t>(k)];
      q *= x[static_cast<std::size_t>(k)] != x[static_cast<std::size_t>(k - 1)] ? f : 1 - f;
    }
    p[i] = q;
  }
  std::vector<int> sites(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) sites[static_cast<std::size_t>(k)] = k;
  return Distribution(sites, std::vector<int>(static_cast<std::size_t>(n), 2), p);
}

Distribution random_table(int n, Rng& rng) {
  std::vector<double> p(std::size_t{1} << n);
  double s = 0;
  for (auto& x : p) s += (x = -std::log(rng.uniform()));
  for (auto& x : p) x /= s;
  std::vector<int> sites;
  for (int k = 0; k < n; ++k) sites.push_back(k);
  return Distribution(sites, std::vector<int>(static_cast<std::size_t>(n), 2), p);
}

}  // namespace

TEST(FactorizationPlan, Uniform1dShape) {
  const FactorizationPlan p = FactorizationPlan::uniform_1d(7, 3);
  ASSERT_EQ(p.regions.size(), 2u);
  EXPECT_EQ(p.regions[0], (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(p.separators[0], (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(p.regions[1], (std::vector<int>{3, 4, 5, 6}));
  EXPECT_NO_THROW(p.validate({0, 1, 2, 3, 4, 5, 6}));
}

TEST(FactorizationPlan, RejectsBadPlans) {
  FactorizationPlan p;
  p.regions = {{0, 1}, {2, 3}};
  p.separators = {{1}};
  EXPECT_THROW(p.validate({0, 1, 2, 3}), std::invalid_argument);  // separator outside region
  p.regions = {{0, 1}, {1, 2}};
  EXPECT_THROW(p.validate({0, 1, 2, 3}), std::invalid_argument);  // site 3 uncovered
  p.cap = 1;
  p.regions = {{0, 1, 2}, {2, 3}};
  p.separators = {{2}};
  EXPECT_THROW(p.validate({0, 1, 2, 3}), std::invalid_argument);
}

TEST(FactorizationPlan, Snake2dIsValid) {
  const FactorizationPlan p = FactorizationPlan::snake_2d(3, 3, 1);
  EXPECT_NO_THROW(p.validate({0, 1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(p.regions.size(), 9u);
}

TEST(ChainFactorize, ExactOnMarkovChains) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Distribution d = markov_bits(7, rng);
    const FactorizedDistribution f = chain_factorize(d, FactorizationPlan::uniform_1d(7, 1));
    EXPECT_LT(f.tv_error, 1e-13);
    EXPECT_LT(f.certificate, 1e-13);
  }
}

TEST(ChainFactorize, CertificateBoundsTvOnRandomTables) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Distribution d = random_table(6, rng);
    for (int w : {1, 2}) {
      const FactorizedDistribution f = chain_factorize(d, FactorizationPlan::uniform_1d(6, w));
      EXPECT_LE(f.tv_error, f.certificate + 1e-12);
      double total = 0;
      for (double q : f.evaluate_all()) total += q;
      EXPECT_NEAR(total, 1.0, 1e-12);
      double s = 0;
      for (double c : f.cut_terms) s += c;
      EXPECT_NEAR(s, f.certificate, 1e-12);
    }
  }
}

TEST(ChainFactorize, FullChainRuleIsExact) {
  Rng rng(3);
  const Distribution d = random_table(5, rng);
  FactorizationPlan plan;
  std::vector<int> prefix{0};
  plan.regions.push_back(prefix);
  for (int k = 1; k < 5; ++k) {
    plan.separators.push_back(prefix);
    prefix.push_back(k);
    plan.regions.push_back(prefix);
  }
  EXPECT_LT(chain_factorize(d, plan).tv_error, 1e-14);
}

TEST(MarkovConditionals, RelabelsSites) {
  Rng rng(4);
  const Distribution base = markov_bits(4, rng);
  const Distribution d({10, 11, 12, 13}, base.dims(), base.probs());
  EXPECT_LT(markov_conditionals(d, 1).tv_error, 1e-13);
  EXPECT_THROW(markov_conditionals(d, 4), std::invalid_argument);
}

TEST(ReluGadget, ComputesProductOfBits) {
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) EXPECT_EQ(relu_product_gadget(x, y), x * y);
  EXPECT_TRUE(relu_gadget_self_test());
  EXPECT_THROW(relu_product_gadget(2, 0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(sawtooth_g(0.5), 1.0);
  EXPECT_DOUBLE_EQ(sawtooth_g(1.0), 0.0);
}

TEST(CoherentMarkov, MarkovDistributionReproducesSqrtP) {
  Rng rng(5);
  const Distribution d = markov_bits(5, rng);
  const SitePartition part{{0, 1}, {2}, {3, 4}, 2};
  const CoherentMarkovState s = coherent_markov_state(d, part);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(s.phi[i].real(), std::sqrt(d.probs()[i]), 1e-13);
}

TEST(AreaLaw, MarkovStateSaturatesOverlap) {
  Rng rng(6);
  const Distribution d = markov_bits(6, rng);
  CVector amps(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) amps[static_cast<Eigen::Index>(i)] = std::sqrt(d.probs()[i]);
  const PureState psi(std::vector<int>(6, 2), amps);
  const AreaLawReport r = area_law_check(psi, SitePartition{{0, 1}, {2, 3}, {4, 5}, 3});
  EXPECT_NEAR(r.overlap, 1.0, 1e-12);
  EXPECT_NEAR(r.cmi_nats, 0.0, 1e-12);
  EXPECT_NEAR(r.trace_distance, 0.0, 1e-10);
  EXPECT_TRUE(r.holds());
}

TEST(AreaLaw, InequalitiesHoldOnRandomSignFreeStates) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    CVector amps(64);
    for (auto& a : amps) a = std::abs(rng.normal());
    amps.normalize();
    const AreaLawReport r =
        area_law_check(PureState(std::vector<int>(6, 2), amps), SitePartition{{0, 1}, {2, 3}, {4, 5}, 3});
    EXPECT_TRUE(r.holds()) << "trial " << t;
    EXPECT_LE(r.s_sigma_a, r.boundary_bound + 1e-9);
  }
}

TEST(AreaLaw, RejectsSignedStates) {
  CVector amps = CVector::Constant(8, 1 / std::sqrt(8.0));
  amps[3] *= -1;
  EXPECT_THROW(area_law_check(PureState({2, 2, 2}, amps), SitePartition{{0}, {1}, {2}, 2}), std::invalid_argument);
}
