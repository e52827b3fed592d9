#include <gtest/gtest.h>

#include <cmath>

#include "cmilab/errors.hpp"
#include "cmilab/parallel.hpp"
#include "cmilab/tensornet.hpp"

using namespace cmilab;

namespace {

std::vector<int> bits_of(std::size_t i, int n) {
  std::vector<int> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = static_cast<int>((i >> (n - 1 - k)) & 1U);
  return x;
}

double entry(const RealTensor& t, const std::vector<int>& idx) {
  std::size_t off = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) off = off * static_cast<std::size_t>(t.shape[k]) + static_cast<std::size_t>(idx[k]);
  return t.data[off];
}

// Sum over every assignment of every internal bond index; no contraction order.
double brute_peps_amplitude(const PepsState& p, const std::vector<int>& x) {
  const int R = p.rows, C = p.cols, r = p.r;
  const int nh = R * (C - 1), nv = (R - 1) * C;
  const int nb = nh + nv;
  auto h = [&](int i, int j) { return i * (C - 1) + j; };        // bond right of (i, j)
  auto v = [&](int i, int j) { return nh + i * C + j; };         // bond below (i, j)
  double total = 0;
  std::vector<int> val(static_cast<std::size_t>(nb));
  const long count = static_cast<long>(std::pow(r, nb));
  for (long a = 0; a < count; ++a) {
    long rem = a;
    for (auto& b : val) {
      b = static_cast<int>(rem % r);
      rem /= r;
    }
    double prod = 1;
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        const int up = i > 0 ? val[static_cast<std::size_t>(v(i - 1, j))] : 0;
        const int left = j > 0 ? val[static_cast<std::size_t>(h(i, j - 1))] : 0;
        const int down = i + 1 < R ? val[static_cast<std::size_t>(v(i, j))] : 0;
        const int right = j + 1 < C ? val[static_cast<std::size_t>(h(i, j))] : 0;
        prod *= entry(p.tensors[static_cast<std::size_t>(i * C + j)],
                      {up, left, down, right, x[static_cast<std::size_t>(i * C + j)]});
      }
    total += prod;
  }
  return total;
}

}  // namespace

TEST(Mps, ShapesAndValidation) {
  const MpsState m = random_mps(6, 3, 0.5, 1);
  ASSERT_EQ(m.tensors.size(), 6u);
  EXPECT_EQ(m.tensors[0].shape, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(m.tensors[5].shape, (std::vector<int>{3, 2, 1}));
  EXPECT_NO_THROW(m.validate());
  EXPECT_THROW(random_mps(21, 2, 0, 1), BudgetError);
}

TEST(Mps, ContractionOrderIndependent) {
  const MpsState m = random_mps(8, 4, 0.3, 7);
  for (std::size_t i = 0; i < 256; i += 17) {
    const auto x = bits_of(i, 8);
    EXPECT_NEAR(amplitude(m, x), amplitude_right_to_left(m, x), 1e-10 * (1 + std::abs(amplitude(m, x))));
  }
}

TEST(Mps, NormSquaredMatchesEnumeration) {
  const MpsState m = random_mps(7, 3, 1.0, 2);
  double s = 0;
  for (std::size_t i = 0; i < 128; ++i) s += std::pow(amplitude(m, bits_of(i, 7)), 2);
  EXPECT_NEAR(norm_squared(m), s, 1e-10 * s);
  const PureState psi = to_statevector(m);
  EXPECT_NEAR(psi.amplitudes().norm(), 1.0, 1e-12);
  EXPECT_NEAR(psi[5].real(), amplitude(m, bits_of(5, 7)) / std::sqrt(s), 1e-12);
}

TEST(Mps, BondDimensionOneIsProduct) {
  const PureState psi = to_statevector(random_mps(6, 1, 0.0, 3));
  EXPECT_NEAR(von_neumann_entropy(partial_trace(psi, {0, 1, 2})), 0.0, 1e-10);
}

TEST(Peps, BruteForceBondSum3x3) {
  const PepsState p = random_peps(3, 3, 2, 0.2, 11);
  for (std::size_t i = 0; i < 512; i += 37) {
    const auto x = bits_of(i, 9);
    const double ref = brute_peps_amplitude(p, x);
    EXPECT_NEAR(amplitude(p, x), ref, 1e-10 * (1 + std::abs(ref)));
  }
}

TEST(Peps, RectangularBruteForce) {
  const PepsState p = random_peps(2, 3, 3, -0.4, 12);
  for (std::size_t i = 0; i < 64; i += 5) {
    const auto x = bits_of(i, 6);
    EXPECT_NEAR(amplitude(p, x), brute_peps_amplitude(p, x), 1e-10 * (1 + std::abs(brute_peps_amplitude(p, x))));
  }
}

TEST(Peps, OneRowPepsIsAnMps) {
  // With up/down bonds of dimension 1 the contraction is a chain.
  const PepsState p = random_peps(1, 5, 3, 0.0, 4);
  MpsState m;
  m.n = 5;
  m.r = 3;
  for (const auto& t : p.tensors) {
    RealTensor s;
    s.shape = {t.shape[1], 2, t.shape[3]};
    s.data = t.data;  // (1, l, 1, r, 2) -> reorder to (l, 2, r)
    for (int l = 0; l < t.shape[1]; ++l)
      for (int r = 0; r < t.shape[3]; ++r)
        for (int ph = 0; ph < 2; ++ph)
          s.data[static_cast<std::size_t>((l * 2 + ph) * t.shape[3] + r)] = entry(t, {0, l, 0, r, ph});
    m.tensors.push_back(s);
  }
  for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(amplitude(p, bits_of(i, 5)), amplitude(m, bits_of(i, 5)), 1e-10);
}

TEST(Peps, BudgetAndHighMemory) {
  EXPECT_THROW(random_peps(5, 5, 2, 0, 1), BudgetError);
  EXPECT_NO_THROW(random_peps(5, 5, 2, 0, 1, true));
  EXPECT_THROW(random_peps(6, 5, 2, 0, 1, true), BudgetError);
}

TEST(SignReport, PositiveMeanGivesSignFreeState) {
  // Large mean makes every tensor entry positive with overwhelming probability.
  EXPECT_DOUBLE_EQ(sign_report(random_mps(8, 2, 20.0, 5)), 1.0);
  EXPECT_DOUBLE_EQ(sign_report(random_peps(2, 3, 2, 20.0, 5)), 1.0);
  const double f = sign_report(random_mps(10, 4, 0.0, 5));
  EXPECT_GT(f, 0.2);
  EXPECT_LT(f, 0.8);
  CVector v = CVector::Constant(4, -0.5);
  EXPECT_DOUBLE_EQ(sign_report(PureState({2, 2}, v)), 1.0);  // global sign divided out
}

TEST(TnGeometry, ColumnBlocks) {
  TnGeometry g;
  g.rows = 2;
  g.cols = 5;
  const SitePartition p = g.partition(2);
  EXPECT_EQ(p.A, (std::vector<int>{0, 5}));
  EXPECT_EQ(p.B, (std::vector<int>{1, 6}));
  EXPECT_EQ(p.C, (std::vector<int>{2, 7}));
  EXPECT_EQ(p.distance, 2);
}

TEST(TnCmi, DeterministicAcrossThreadCounts) {
  TnGeometry g;
  g.cols = 8;
  g.distances = {1, 2, 3};
  set_num_threads(1);
  const TnCmiResult a = tn_cmi_experiment(TnFamily::MPS, 3, 0.0, 4, 9, g);
  set_num_threads(2);
  const TnCmiResult b = tn_cmi_experiment(TnFamily::MPS, 3, 0.0, 4, 9, g);
  set_num_threads(1);
  EXPECT_EQ(a.cmi_bits, b.cmi_bits);
  EXPECT_EQ(a.positive_fraction, b.positive_fraction);
  for (const auto& row : a.cmi_bits)
    for (double v : row) EXPECT_GE(v, -1e-12);
  EXPECT_STREQ(to_string(TnFamily::PEPS), "peps");
}
