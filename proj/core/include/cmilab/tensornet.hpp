#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmilab/distributions.hpp"
#include "cmilab/state.hpp"

namespace cmilab {

/// Real tensor with row-major storage and an explicit shape.
struct RealTensor {
  std::vector<int> shape;
  std::vector<double> data;
  std::size_t size() const { return data.size(); }
};

/// Site k holds a (r_{k-1}, 2, r_k) tensor; the outer bonds have dimension 1.
struct MpsState {
  int n = 0;
  int r = 1;
  double mu = 0;
  std::uint64_t seed = 0;
  std::vector<RealTensor> tensors;
  void validate() const;
};

/// Site (i, j) holds a (up, left, down, right, phys) tensor. Bonds leaving
/// the grid have dimension 1. Sites are numbered row-major.
struct PepsState {
  int rows = 0, cols = 0;
  int r = 1;
  double mu = 0;
  std::uint64_t seed = 0;
  std::vector<RealTensor> tensors;
  int n_sites() const { return rows * cols; }
  void validate() const;
};

inline constexpr int kMaxMpsSites = 20;
inline constexpr int kMaxPepsSites = 16;
inline constexpr int kMaxPepsSitesHighMemory = 25;

MpsState random_mps(int n, int r, double mu, std::uint64_t seed);
PepsState random_peps(int rows, int cols, int r, double mu, std::uint64_t seed, bool high_memory = false);

/// Un-normalized amplitude of bitstring x (site 0 first).
double amplitude(const MpsState& mps, const std::vector<int>& x);
double amplitude(const PepsState& peps, const std::vector<int>& x);
/// Contraction starting from the last site; used to cross-check `amplitude`.
double amplitude_right_to_left(const MpsState& mps, const std::vector<int>& x);

/// Squared norm of the un-normalized vector.
double norm_squared(const MpsState& mps);

PureState to_statevector(const MpsState& mps);
PureState to_statevector(const PepsState& peps, bool high_memory = false);

/// Fraction of amplitudes strictly positive once the sign of the
/// largest-magnitude amplitude has been divided out.
double sign_report(const PureState& state);
double sign_report(const MpsState& mps);
double sign_report(const PepsState& peps);

enum class TnFamily { MPS, PEPS };
const char* to_string(TnFamily f);

/// Regions are blocks of whole columns (an MPS is a one-row grid). A covers
/// columns [0, width), C covers [width + dist - 1, 2 width + dist - 1), B the
/// columns in between; columns right of C are traced out. dist = |B| + 1.
struct TnGeometry {
  int rows = 1;
  int cols = 12;
  int width = 1;
  std::vector<int> distances{1, 2, 3, 4, 5, 6};
  SitePartition partition(int dist) const;
};

struct TnCmiResult {
  TnFamily family = TnFamily::MPS;
  int r = 1;
  double mu = 0;
  TnGeometry geometry;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> cmi_bits;  // [sample][distance]
  std::vector<double> positive_fraction;      // per sample
  std::vector<double> median;                 // per distance
  DecayFit fit;
};

/// Sample s is built from seed substream s of `seed`.
TnCmiResult tn_cmi_experiment(TnFamily family, int r, double mu, int samples, std::uint64_t seed,
                              const TnGeometry& geometry);

}  // namespace cmilab
