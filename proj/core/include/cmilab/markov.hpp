#pragma once

#include <vector>

#include "cmilab/distributions.hpp"

namespace cmilab {

/// q(x) = p(x_{s_1}) * prod_{k>=2} p(x_{s_k}) / p(x_{s'_{k-1}}).
/// separators[k-1] is the conditioning set of regions[k]; it must lie in
/// regions[k] and in the union of earlier regions, and the rest of regions[k]
/// must be new. For 1D consecutive plans this is the usual "neighbouring
/// regions overlap exactly on the separator" condition.
struct FactorizationPlan {
  std::vector<std::vector<int>> regions;
  std::vector<std::vector<int>> separators;
  int block_scale = 1;
  int cap = 0;  // declared bound on |s_k|; 0 = unchecked

  void validate(const std::vector<int>& sites) const;

  /// 1D chain of blocks of width w; regions are adjacent block pairs and
  /// separators the shared block. The last block may be shorter.
  static FactorizationPlan uniform_1d(int n, int w);
  /// Snake order over a rows x cols grid (site = r*cols + c). Each new site
  /// conditions on already-visited sites within Chebyshev distance `width`.
  static FactorizationPlan snake_2d(int rows, int cols, int width);
};

struct FactorizedDistribution {
  FactorizationPlan plan;
  std::vector<int> source_sites;
  std::vector<int> source_dims;
  std::vector<Distribution> region_tables;
  std::vector<Distribution> separator_tables;
  double tv_error = 0;     // sum_x |p(x) - q(x)|
  double certificate = 0;  // sum over cuts of E_N || p(past, new | N) - p(past|N) p(new|N) ||_1
  std::vector<double> cut_terms;

  /// q(x) for every outcome index of the source distribution.
  std::vector<double> evaluate_all() const;
};

FactorizedDistribution chain_factorize(const Distribution& dist, const FactorizationPlan& plan);
FactorizedDistribution markov_conditionals(const Distribution& dist, int block);

double relu(double x);
double sawtooth_g(double x);
double sawtooth_h(double x);
/// x*y for bits through 2h((x+y)/2) - (x+y)/2.
int relu_product_gadget(int x, int y);
bool relu_gadget_self_test();

struct CoherentMarkovState {
  PureState phi;
  SitePartition partition;
};

/// phi(x) = sqrt(p(x_AB) p(x_BC) / p(x_B)); sites of `dist` are taken as the
/// register 0..n-1 in table order.
CoherentMarkovState coherent_markov_state(const Distribution& dist, const SitePartition& partition);

struct AreaLawReport {
  double s_rho_a = 0;     // nats
  double s_sigma_a = 0;   // nats
  double boundary_bound = 0;  // |B| ln d
  double overlap = 0;     // <phi|psi>
  double overlap_floor = 0;   // 1 - sqrt(I_nats / 2)
  double cmi_nats = 0;
  double trace_distance = 0;  // || rho_A - sigma_A ||_1
  double trace_bound = 0;     // 2 sqrt(1 - overlap^2)
  double fannes_gap = 0;      // |S(rho_A) - S(sigma_A)|
  double fannes_bound = 0;    // T ln(d_A - 1) + h_e(T), T = trace_distance / 2

  bool holds(double tol = 1e-9) const;
};

/// Throws std::invalid_argument for states with negative or complex amplitudes
/// beyond 1e-10.
AreaLawReport area_law_check(const PureState& state, const SitePartition& partition);

}  // namespace cmilab
