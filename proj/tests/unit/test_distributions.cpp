#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "cmilab/distributions.hpp"

using namespace cmilab;

namespace {

// Three bits: A and C uniform, B = A xor C.
Distribution xor_table() {
  std::vector<double> p(8, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) p[static_cast<std::size_t>(a * 4 + (a ^ c) * 2 + c)] = 0.25;
  return Distribution({0, 1, 2}, {2, 2, 2}, p);
}

// A -> B -> C Markov chain with arbitrary kernels.
Distribution markov_chain_table(Rng& rng) {
  auto row = [&](int k) {
    std::vector<double> r(static_cast<std::size_t>(k));
    double s = 0;
    for (auto& x : r) s += (x = rng.uniform() + 0.05);
    for (auto& x : r) x /= s;
    return r;
  };
  const auto pa = row(2);
  std::vector<std::vector<double>> kab, kbc;
  for (int i = 0; i < 2; ++i) kab.push_back(row(3));
  for (int i = 0; i < 3; ++i) kbc.push_back(row(2));
  std::vector<double> p;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 2; ++c)
        p.push_back(pa[static_cast<std::size_t>(a)] * kab[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                    kbc[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)]);
  return Distribution({0, 1, 2}, {2, 3, 2}, p);
}

// Independent CMI: direct sum over the joint table.
double brute_cmi_bits(const Distribution& d, int a, int b, int c) {
  std::map<std::tuple<int, int, int>, double> pabc;
  std::map<std::pair<int, int>, double> pab, pbc;
  std::map<int, double> pb;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = digits_of(i, d.dims());
    const double p = d.probs()[i];
    const int xa = x[static_cast<std::size_t>(a)], xb = x[static_cast<std::size_t>(b)],
              xc = x[static_cast<std::size_t>(c)];
    pabc[{xa, xb, xc}] += p;
    pab[{xa, xb}] += p;
    pbc[{xb, xc}] += p;
    pb[xb] += p;
  }
  double I = 0;
  for (auto& [k, p] : pabc) {
    if (p <= 0) continue;
    auto [xa, xb, xc] = k;
    I += p * std::log2(p * pb[xb] / (pab[{xa, xb}] * pbc[{xb, xc}]));
  }
  return I;
}

}  // namespace

TEST(Distribution, ValidatesTable) {
  EXPECT_THROW(Distribution({0}, {2}, {0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Distribution({0}, {2}, {1.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(Distribution({0, 0}, {2, 2}, {0.25, 0.25, 0.25, 0.25}), std::invalid_argument);
}

TEST(Distribution, MarginalAndConditional) {
  const Distribution d = xor_table();
  const Distribution m = marginal(d, {2, 0});
  EXPECT_EQ(m.sites(), (std::vector<int>{2, 0}));
  for (double p : m.probs()) EXPECT_NEAR(p, 0.25, 1e-15);
  const Distribution c = conditional(d, {2}, {0, 1}, {1, 1});
  EXPECT_NEAR(c.prob({0}), 1.0, 1e-15);
  EXPECT_THROW(conditional(Distribution({0, 1}, {2, 2}, {0.5, 0.5, 0, 0}), {1}, {0}, {1}), std::domain_error);
}

TEST(Distribution, CsvHasOneRowPerOutcome) {
  std::ostringstream os;
  xor_table().write_csv(os);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 9);
}

TEST(Cmi, XorIsOneBit) {
  const CmiReport r = cmi(xor_table(), SitePartition{{0}, {1}, {2}, 2});
  EXPECT_NEAR(r.cmi, 1.0, 1e-14);
  EXPECT_NEAR(r.cmi_definitional, 1.0, 1e-14);
  EXPECT_NEAR(r.cmi_nats(), std::log(2.0), 1e-14);
  // Given B, A and C are perfectly (anti-)correlated: L1 gap of 1.
  EXPECT_NEAR(r.pinsker_residual, 1.0, 1e-14);
}

TEST(Cmi, MarkovChainIsZero) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const CmiReport r = cmi(markov_chain_table(rng), SitePartition{{0}, {1}, {2}, 2});
    EXPECT_NEAR(r.cmi, 0.0, 1e-13);
    EXPECT_NEAR(r.pinsker_residual, 0.0, 1e-13);
  }
}

TEST(Cmi, MatchesBruteForceAndPinsker) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> p(12);
    double s = 0;
    for (auto& x : p) s += (x = rng.uniform() * (rng.uniform() < 0.2 ? 0 : 1));
    for (auto& x : p) x /= s;
    const Distribution d({0, 1, 2}, {2, 3, 2}, p);
    const CmiReport r = cmi(d, SitePartition{{0}, {1}, {2}, 2});
    EXPECT_NEAR(r.cmi, brute_cmi_bits(d, 0, 1, 2), 1e-12);
    EXPECT_NEAR(r.cmi, r.cmi_definitional, 1e-12);
    EXPECT_GE(r.cmi, -1e-12);
    EXPECT_LE(r.pinsker_residual, std::sqrt(2 * std::max(0.0, r.cmi_nats())) + 1e-12);
  }
}

TEST(Cmi, EmptyBIsMutualInformation) {
  const Distribution d({0, 1}, {2, 2}, {0.5, 0, 0, 0.5});
  EXPECT_NEAR(cmi(d, SitePartition{{0}, {}, {1}, 1}).cmi, 1.0, 1e-14);
}

TEST(Divergences, KlAndL1) {
  const Distribution p({0}, {2}, {0.5, 0.5}), q({0}, {2}, {1.0, 0.0});
  EXPECT_TRUE(std::isinf(kl_divergence(p, q)));
  EXPECT_NEAR(kl_divergence(q, p, LogBase::Two), 1.0, 1e-15);
  EXPECT_NEAR(l1_distance(p, q), 1.0, 1e-15);
  EXPECT_NEAR(entropy(p), 1.0, 1e-15);
}

TEST(MeasurementDistribution, BornRule) {
  Rng rng(3);
  const PureState s({2, 3}, haar_state(6, rng));
  const Distribution d = measurement_distribution(s);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(d.probs()[i], std::norm(s[i]), 1e-15);
  const Distribution m = measurement_distribution(s, {1});
  EXPECT_EQ(m.size(), 3u);
}

TEST(HolevoEntropy, ProductStateIsZeroBellPairIsOne) {
  CVector ghz = CVector::Zero(8);
  ghz[0] = ghz[7] = 1 / std::sqrt(2.0);
  const PureState g({2, 2, 2}, ghz);
  // Measuring the middle qubit of GHZ collapses A.
  EXPECT_NEAR(holevo_avg_entropy(g, SitePartition{{0}, {1}, {2}, 2}), 0.0, 1e-12);
  CVector bell = CVector::Zero(8);  // qubit 1 in |0>, (0,2) in a Bell pair
  bell[0] = bell[5] = 1 / std::sqrt(2.0);
  EXPECT_NEAR(holevo_avg_entropy(PureState({2, 2, 2}, bell), SitePartition{{0}, {1}, {2}, 2}), 1.0, 1e-12);
}

TEST(DecayFit, RecoversExponential) {
  std::vector<std::pair<double, double>> pts;
  for (int d = 1; d <= 6; ++d) pts.emplace_back(d, 0.8 * std::exp(-d / 1.7));
  const DecayFit f = fit_cmi_length(pts);
  EXPECT_NEAR(f.xi, 1.7, 1e-10);
  EXPECT_NEAR(f.alpha, 0.8, 1e-10);
  EXPECT_FALSE(f.diverged);

  std::vector<std::pair<double, double>> flat{{1, 0.5}, {2, 0.5}, {3, 0.6}};
  EXPECT_TRUE(fit_cmi_length(flat).diverged);
  std::vector<std::pair<double, double>> zero{{1, 1e-15}, {2, 0}, {3, 0}};
  EXPECT_TRUE(fit_cmi_length(zero).vanished);
}
