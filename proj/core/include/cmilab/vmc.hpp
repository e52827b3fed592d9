#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cmilab/hamiltonians.hpp"
#include "cmilab/rng.hpp"
#include "cmilab/state.hpp"

namespace cmilab {

/// Configurations are bit patterns with site k at bit (n - 1 - k), matching
/// the Hamiltonian masks and the dense state index.
using Config = std::uint64_t;
using LogAmplitude = std::function<cplx(Config)>;

inline int config_bit(Config x, int n, int site) { return static_cast<int>((x >> (n - 1 - site)) & 1U); }

/// psi(x) = exp(sum_i a_i x_i) prod_j (1 + exp(b_j + sum_i W_ij x_i)), x in {0,1}^n.
struct RbmParams {
  int n = 0;
  int n_hidden = 0;
  CVector a;  // n
  CVector b;  // n_hidden
  CMatrix W;  // n x n_hidden

  static RbmParams zeros(int n, int n_hidden);
  /// Entries ~ scale * complex normal; imaginary parts zeroed when real_only.
  static RbmParams random(int n, int n_hidden, double scale, Rng& rng, bool real_only = false);

  int n_complex() const { return n + n_hidden + n * n_hidden; }
  /// Flattened complex parameters: a, then b, then W row-major.
  CVector flatten() const;
  void unflatten(const CVector& v);
  /// Throws std::overflow_error if any entry is non-finite or exceeds 50 in modulus.
  void check_guard() const;
};

inline constexpr double kRbmEntryGuard = 50.0;

cplx rbm_log_amplitude(const RbmParams& p, Config x);
cplx rbm_amplitude(const RbmParams& p, Config x);
cplx rbm_amplitude(const RbmParams& p, const std::vector<int>& x);
/// d log psi / d w for every flattened complex parameter.
CVector rbm_log_derivatives(const RbmParams& p, Config x);

enum class VmcMode { FreePhase, PhaseInformed };
enum class Optimizer { Sgd, Sr };
const char* to_string(VmcMode m);
const char* to_string(Optimizer o);

/// Ansatz used by training: the complex RBM, or |RBM| (real parameters)
/// times a fixed phase table e^{i g(x)}.
struct Ansatz {
  RbmParams params;
  VmcMode mode = VmcMode::FreePhase;
  std::vector<double> phase;  // g(x) per configuration in phase-informed mode

  cplx log_amplitude(Config x) const;
  LogAmplitude oracle() const;
};

/// sum_{x'} <x|H|x'> psi(x') / psi(x). Throws std::domain_error if psi(x) = 0.
cplx local_energy(const HamiltonianSpec& H, const LogAmplitude& log_psi, Config x);

struct SamplerConfig {
  int burn_in_sweeps = 50;
  int sweeps_between = 1;  // one sweep = n single-spin-flip proposals
};

struct SampleBatch {
  std::vector<Config> configs;
  double acceptance = 0;
  Config last = 0;
};

/// Single-spin-flip Metropolis on |psi|^2, started from `start`.
SampleBatch metropolis_sample(const LogAmplitude& log_psi, int n, int count, const SamplerConfig& cfg, Rng& rng,
                              Config start = 0, bool burn_in = true);

/// Transition matrix of one random-site Metropolis proposal, T(to, from).
Eigen::MatrixXd metropolis_transition_matrix(const LogAmplitude& log_psi, int n);

/// Weighted expectation data for the energy gradient.
struct GradientReport {
  cplx energy = 0;
  double energy_var = 0;
  CVector force;        // F_k = <E_loc O_k*> - <E_loc><O_k*>, per complex parameter
  Eigen::VectorXd real_gradient;  // dE/d(Re w) then dE/d(Im w)
  CMatrix sr_matrix;    // S_kl = <O_k* O_l> - <O_k*><O_l>
};

/// From Monte Carlo samples (uniform weights).
GradientReport gradient(const Ansatz& psi, const std::vector<Config>& samples, const HamiltonianSpec& H,
                        bool with_sr = false);
/// From full enumeration with |psi|^2 weights (n <= 16).
GradientReport gradient_exact(const Ansatz& psi, const HamiltonianSpec& H, bool with_sr = false);

/// <psi|H|psi> / <psi|psi> by enumeration.
double exact_energy(const Ansatz& psi, const HamiltonianSpec& H);
PureState ansatz_state(const Ansatz& psi);

/// Parameter step from a gradient report. SR solves (S + shift) delta = F.
/// Returns true if the SR matrix needed the shift to be factorized.
bool apply_update(Ansatz& psi, const GradientReport& g, Optimizer opt, double lr, double sr_shift);

struct VmcConfig {
  int steps = 600;
  int batch = 512;
  double lr = 0.05;
  int lr_step = 300;        // lr halves every lr_step steps
  double init_scale = 0.05;
  int n_hidden = 0;         // 0 means 2n
  SamplerConfig sampler;
  std::uint64_t seed = 1;
  VmcMode mode = VmcMode::FreePhase;
  Optimizer optimizer = Optimizer::Sgd;
  double sr_shift = 1e-2;
  /// Abort once the mean energy exceeds this after the first tenth of training.
  double divergence_threshold = 0.0;
  void validate() const;
};

struct StepStats {
  int step = 0;
  double energy_mean = 0;
  double energy_var = 0;
  double acceptance = 0;
};

struct TrainingTrace {
  std::vector<StepStats> steps;
  double e0 = 0;
  double final_energy = 0;  // exact Rayleigh quotient of the final ansatz
  double relative_error = 0;
  bool aborted = false;
  std::string abort_reason;
  int sr_shift_events = 0;
  Ansatz final_ansatz;
};

/// Phase-informed mode takes g(x) from the dense ground state of H.
TrainingTrace train(const HamiltonianSpec& H, const VmcConfig& cfg, double e0);

struct EnergyEstimate {
  double estimate = 0;
  double imag_residual = 0;
  double variance = 0;
  std::size_t samples = 0;  // Chebyshev budget T = var / (eps^2 delta)
};

/// Pilot batch for the variance, then T Metropolis samples.
EnergyEstimate energy_estimate(const LogAmplitude& log_psi, const HamiltonianSpec& H, double epsilon, double delta,
                               Rng& rng, const SamplerConfig& sampler = {}, int pilot = 256);

}  // namespace cmilab
