#include "cmilab/vmc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cmilab/errors.hpp"

namespace cmilab {

namespace {

// Terms sharing an x mask need one amplitude ratio between them.
struct MaskGroup {
  Config x_mask = 0;
  struct Entry {
    double coeff;
    Config z_mask;
    int y_count;
  };
  std::vector<Entry> entries;
};

std::vector<MaskGroup> group_terms(const HamiltonianSpec& H) {
  std::map<Config, std::size_t> where;
  std::vector<MaskGroup> groups;
  for (const auto& t : H.terms) {
    const Config xm = t.x_mask(H.n);
    auto it = where.find(xm);
    if (it == where.end()) {
      it = where.emplace(xm, groups.size()).first;
      groups.push_back({xm, {}});
    }
    groups[it->second].entries.push_back({t.coeff, t.z_mask(H.n), t.y_count()});
  }
  return groups;
}

cplx local_energy_grouped(const std::vector<MaskGroup>& groups, const LogAmplitude& log_psi, Config x, cplx log_x) {
  if (!std::isfinite(log_x.real())) throw std::domain_error("local_energy: psi(x) = 0");
  cplx e = 0;
  for (const auto& g : groups) {
    const Config xp = x ^ g.x_mask;
    cplx m = 0;
    for (const auto& t : g.entries) m += t.coeff * pauli_phase(t.z_mask, t.y_count, xp);
    if (m == cplx(0)) continue;
    e += m * (g.x_mask == 0 ? cplx(1) : std::exp(log_psi(xp) - log_x));
  }
  return e;
}

// Amplitude ratios from cached e^{theta_j}. Flipping site i multiplies
// e^{theta_j} by e^{+-W_ij}, so a ratio costs no transcendental calls. Falls
// back to the log form when e^{theta} could overflow.
class RbmEvaluator {
 public:
  explicit RbmEvaluator(const Ansatz& psi) : psi_(psi), p_(psi.params) {
    double bound = 0;
    for (int j = 0; j < p_.n_hidden; ++j) {
      double s = std::abs(p_.b[j]);
      for (int i = 0; i < p_.n; ++i) s += std::abs(p_.W(i, j));
      bound = std::max(bound, s);
    }
    // Products of n_hidden factors of size up to e^bound must stay finite.
    fast_ = bound * std::max(1, p_.n_hidden) < 600.0;
    if (fast_) {
      eW_ = p_.W.array().exp();
      eWi_ = (-p_.W.array()).exp();
    }
  }

  // e^{theta(x)}; empty in the slow path.
  CVector fields(Config x) const {
    if (!fast_) return {};
    CVector th = p_.b;
    for (int i = 0; i < p_.n; ++i)
      if (config_bit(x, p_.n, i)) th += p_.W.row(i).transpose();
    return th.array().exp();
  }

  // prod_j (1 + e^{theta_j}); shared by every ratio taken from x.
  static cplx denominator(const CVector& et) {
    cplx d = 1;
    for (Eigen::Index j = 0; j < et.size(); ++j) d *= 1.0 + et[j];
    return d;
  }

  cplx ratio(Config x, const CVector& et, Config xp, CVector* et_new = nullptr) const {
    return ratio(x, et, fast_ ? denominator(et) : cplx(1), xp, et_new);
  }

  cplx ratio(Config x, const CVector& et, cplx den, Config xp, CVector* et_new = nullptr) const {
    if (x == xp) {
      if (et_new) *et_new = et;
      return 1.0;
    }
    if (!fast_) return std::exp(psi_.log_amplitude(xp) - psi_.log_amplitude(x));
    cplx la = 0;
    int flips[64];
    int nf = 0;
    for (Config diff = x ^ xp; diff; diff &= diff - 1) {
      const int site = p_.n - 1 - std::countr_zero(diff);
      const bool up = config_bit(x, p_.n, site) == 0;
      la += up ? p_.a[site] : -p_.a[site];
      flips[nf++] = up ? site : -1 - site;
    }
    if (psi_.mode == VmcMode::PhaseInformed)
      la += cplx(0, psi_.phase[static_cast<std::size_t>(xp)] - psi_.phase[static_cast<std::size_t>(x)]);
    if (et_new) et_new->resize(p_.n_hidden);
    cplx num = 1;
    for (int j = 0; j < p_.n_hidden; ++j) {
      cplx f = et[j];
      for (int k = 0; k < nf; ++k) f *= flips[k] >= 0 ? eW_(flips[k], j) : eWi_(-1 - flips[k], j);
      num *= 1.0 + f;
      if (et_new) (*et_new)[j] = f;
    }
    const cplx r = std::exp(la) * num / den;
    return r;
  }

  CVector log_derivatives(Config x, const CVector& et) const {
    if (!fast_) return rbm_log_derivatives(p_, x);
    CVector o = CVector::Zero(p_.n_complex());
    const CVector sig = et.array() / (1.0 + et.array());
    o.segment(p_.n, p_.n_hidden) = sig;
    for (int i = 0; i < p_.n; ++i)
      if (config_bit(x, p_.n, i)) {
        o[i] = 1.0;
        o.segment(p_.n + p_.n_hidden + i * p_.n_hidden, p_.n_hidden) = sig;
      }
    return o;
  }

  cplx local_energy(const std::vector<MaskGroup>& groups, Config x, const CVector& et) const {
    const cplx den = fast_ ? denominator(et) : cplx(1);
    cplx e = 0;
    for (const auto& g : groups) {
      const Config xp = x ^ g.x_mask;
      cplx m = 0;
      for (const auto& t : g.entries) m += t.coeff * pauli_phase(t.z_mask, t.y_count, xp);
      if (m != cplx(0)) e += m * ratio(x, et, den, xp);
    }
    return e;
  }

  SampleBatch sample(int count, const SamplerConfig& cfg, Rng& rng, Config start, bool burn_in) const {
    const int n = p_.n;
    SampleBatch out;
    Config x = start;
    CVector et = fields(x);
    std::size_t proposed = 0, accepted = 0;
    CVector et_new;
    auto sweep = [&] {
      for (int k = 0; k < n; ++k) {
        const Config xp = x ^ (Config{1} << rng.below(static_cast<std::uint64_t>(n)));
        const double a = std::norm(ratio(x, et, xp, &et_new));
        ++proposed;
        if (a >= 1.0 || rng.uniform() < a) {
          x = xp;
          std::swap(et, et_new);
          ++accepted;
        }
      }
    };
    if (burn_in)
      for (int s = 0; s < cfg.burn_in_sweeps; ++s) sweep();
    proposed = accepted = 0;
    out.configs.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
      for (int s = 0; s < cfg.sweeps_between; ++s) sweep();
      out.configs.push_back(x);
      et = fields(x);  // drop accumulated rounding
    }
    out.acceptance = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0;
    out.last = x;
    return out;
  }

 private:
  const Ansatz& psi_;
  const RbmParams& p_;
  bool fast_ = false;
  CMatrix eW_, eWi_;
};

std::size_t dim_of(int n) {
  if (n < 1 || n > 16) throw BudgetError("vmc: enumeration limited to 16 sites");
  return std::size_t{1} << n;
}

// |psi|^2 / Z over every configuration.
std::vector<double> exact_weights(const LogAmplitude& log_psi, int n) {
  const std::size_t dim = dim_of(n);
  std::vector<double> lr(dim);
  double top = -INFINITY;
  for (std::size_t x = 0; x < dim; ++x) {
    lr[x] = 2.0 * log_psi(x).real();
    top = std::max(top, lr[x]);
  }
  double z = 0;
  for (double& v : lr) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : lr) v /= z;
  return lr;
}

GradientReport weighted_gradient(const Ansatz& psi, const std::vector<Config>& configs, const std::vector<double>& w,
                                 const HamiltonianSpec& H, bool with_sr) {
  if (configs.empty()) throw std::invalid_argument("gradient: empty batch");
  const auto groups = group_terms(H);
  const RbmEvaluator ev(psi);
  const int P = psi.params.n_complex();
  const auto N = static_cast<Eigen::Index>(configs.size());
  CMatrix O(N, P);
  CVector E(N);
  for (Eigen::Index s = 0; s < N; ++s) {
    const Config x = configs[static_cast<std::size_t>(s)];
    if (!std::isfinite(psi.log_amplitude(x).real())) throw std::domain_error("gradient: psi(x) = 0");
    const CVector et = ev.fields(x);
    E[s] = ev.local_energy(groups, x, et);
    O.row(s) = ev.log_derivatives(x, et).transpose();
  }
  Eigen::VectorXd wv(N);
  for (Eigen::Index s = 0; s < N; ++s) wv[s] = w[static_cast<std::size_t>(s)];
  GradientReport g;
  g.energy = (wv.cast<cplx>().array() * E.array()).sum();
  g.energy_var = (wv.array() * (E.array() - g.energy).abs2()).sum();
  const CVector mean_o = O.transpose() * wv.cast<cplx>();
  CMatrix Oc = O.rowwise() - mean_o.transpose();
  const CVector dE = (E.array() - g.energy).matrix();
  g.force = Oc.adjoint() * (wv.cast<cplx>().array() * dE.array()).matrix();
  g.real_gradient = Eigen::VectorXd::Zero(2 * P);
  g.real_gradient.head(P) = 2.0 * g.force.real();
  if (psi.mode == VmcMode::FreePhase) g.real_gradient.tail(P) = 2.0 * g.force.imag();
  if (with_sr) {
    const CMatrix sOc = Oc.array().colwise() * wv.cwiseSqrt().cast<cplx>().array();
    g.sr_matrix = CMatrix::Zero(P, P);
    g.sr_matrix.selfadjointView<Eigen::Lower>().rankUpdate(sOc.adjoint());
    g.sr_matrix = g.sr_matrix.selfadjointView<Eigen::Lower>();
  }
  return g;
}

}  // namespace

cplx local_energy(const HamiltonianSpec& H, const LogAmplitude& log_psi, Config x) {
  return local_energy_grouped(group_terms(H), log_psi, x, log_psi(x));
}

SampleBatch metropolis_sample(const LogAmplitude& log_psi, int n, int count, const SamplerConfig& cfg, Rng& rng,
                              Config start, bool burn_in) {
  if (count < 0 || cfg.burn_in_sweeps < 0 || cfg.sweeps_between < 1) throw std::invalid_argument("metropolis_sample: bad counts");
  SampleBatch out;
  Config x = start;
  cplx lx = log_psi(x);
  if (!std::isfinite(lx.real())) throw std::domain_error("metropolis_sample: start has zero amplitude");
  std::size_t proposed = 0, accepted = 0;
  auto sweep = [&] {
    for (int k = 0; k < n; ++k) {
      const Config xp = x ^ (Config{1} << rng.below(static_cast<std::uint64_t>(n)));
      const cplx lp = log_psi(xp);
      const double logr = 2.0 * (lp.real() - lx.real());
      ++proposed;
      if (logr >= 0 || rng.uniform() < std::exp(logr)) {
        x = xp;
        lx = lp;
        ++accepted;
      }
    }
  };
  if (burn_in)
    for (int s = 0; s < cfg.burn_in_sweeps; ++s) sweep();
  proposed = accepted = 0;
  out.configs.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    for (int s = 0; s < cfg.sweeps_between; ++s) sweep();
    out.configs.push_back(x);
  }
  out.acceptance = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0;
  out.last = x;
  return out;
}

Eigen::MatrixXd metropolis_transition_matrix(const LogAmplitude& log_psi, int n) {
  const std::size_t dim = dim_of(n);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Config x = 0; x < dim; ++x) {
    const double lx = log_psi(x).real();
    for (int k = 0; k < n; ++k) {
      const Config xp = x ^ (Config{1} << k);
      const double a = std::min(1.0, std::exp(2.0 * (log_psi(xp).real() - lx)));
      T(static_cast<Eigen::Index>(xp), static_cast<Eigen::Index>(x)) += a / n;
      T(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) += (1.0 - a) / n;
    }
  }
  return T;
}

GradientReport gradient(const Ansatz& psi, const std::vector<Config>& samples, const HamiltonianSpec& H, bool with_sr) {
  const std::vector<double> w(samples.size(), samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size()));
  return weighted_gradient(psi, samples, w, H, with_sr);
}

GradientReport gradient_exact(const Ansatz& psi, const HamiltonianSpec& H, bool with_sr) {
  const std::vector<double> w = exact_weights(psi.oracle(), H.n);
  std::vector<Config> configs(w.size());
  for (std::size_t x = 0; x < w.size(); ++x) configs[x] = x;
  return weighted_gradient(psi, configs, w, H, with_sr);
}

PureState ansatz_state(const Ansatz& psi) {
  const int n = psi.params.n;
  const std::size_t dim = dim_of(n);
  std::vector<cplx> logs(dim);
  double top = -INFINITY;
  for (std::size_t x = 0; x < dim; ++x) {
    logs[x] = psi.log_amplitude(x);
    top = std::max(top, logs[x].real());
  }
  CVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) v[static_cast<Eigen::Index>(x)] = std::exp(logs[x] - top);
  return PureState(std::vector<int>(static_cast<std::size_t>(n), 2), v, true);
}

double exact_energy(const Ansatz& psi, const HamiltonianSpec& H) {
  const PureState s = ansatz_state(psi);
  CVector hv;
  H.apply(s.amplitudes(), hv);
  return s.amplitudes().dot(hv).real();
}

bool apply_update(Ansatz& psi, const GradientReport& g, Optimizer opt, double lr, double sr_shift) {
  CVector w = psi.params.flatten();
  const bool real_only = psi.mode == VmcMode::PhaseInformed;
  bool shifted = false;
  if (opt == Optimizer::Sgd) {
    if (real_only) w.real() -= lr * g.real_gradient.head(w.size());
    else w -= lr * 2.0 * g.force;
  } else {
    if (g.sr_matrix.size() == 0) throw std::invalid_argument("apply_update: SR needs the S matrix");
    if (!(sr_shift > 0)) throw std::invalid_argument("apply_update: SR shift must be positive");
    const auto P = g.sr_matrix.rows();
    // A pivot within 10x of the shift means S alone was (nearly) singular there.
    if (real_only) {
      const Eigen::MatrixXd S = g.sr_matrix.real() + sr_shift * Eigen::MatrixXd::Identity(P, P);
      Eigen::LDLT<Eigen::MatrixXd> f(S);
      shifted = f.vectorD().minCoeff() < 10.0 * sr_shift;
      w.real() -= lr * f.solve(g.force.real());
    } else {
      Eigen::LDLT<CMatrix> f(g.sr_matrix + sr_shift * CMatrix::Identity(P, P));
      shifted = f.vectorD().real().minCoeff() < 10.0 * sr_shift;
      w -= lr * f.solve(g.force);
    }
  }
  psi.params.unflatten(w);
  return shifted;
}

void VmcConfig::validate() const {
  if (steps < 1 || batch < 1 || lr_step < 1 || n_hidden < 0) throw std::invalid_argument("VmcConfig: counts must be positive");
  if (!(lr > 0) || !(init_scale >= 0)) throw std::invalid_argument("VmcConfig: lr must be positive");
  if (sampler.burn_in_sweeps < 0 || sampler.sweeps_between < 1) throw std::invalid_argument("VmcConfig: bad sampler");
  if (optimizer == Optimizer::Sr && !(sr_shift > 0)) throw std::invalid_argument("VmcConfig: SR shift must be positive");
}

TrainingTrace train(const HamiltonianSpec& H, const VmcConfig& cfg, double e0) {
  cfg.validate();
  H.validate();
  const int n = H.n;
  dim_of(n);
  const Rng root(cfg.seed);
  Rng init = root.substream("init");
  Rng chain = root.substream("sampler");

  TrainingTrace tr;
  tr.e0 = e0;
  Ansatz& psi = tr.final_ansatz;
  psi.mode = cfg.mode;
  if (cfg.mode == VmcMode::PhaseInformed) {
    const GroundStateResult gs = ground_state(H);
    psi.phase.resize(gs.state.dim());
    for (std::size_t x = 0; x < gs.state.dim(); ++x)
      psi.phase[x] = std::abs(gs.state[x]) > 0 ? std::arg(gs.state[x]) : 0.0;
  }
  const int nh = cfg.n_hidden > 0 ? cfg.n_hidden : 2 * n;
  psi.params = RbmParams::random(n, nh, cfg.init_scale, init, cfg.mode == VmcMode::PhaseInformed);

  Config x = chain.below(std::uint64_t{1} << n);
  for (int step = 0; step < cfg.steps; ++step) {
    const double lr = cfg.lr * std::pow(0.5, step / cfg.lr_step);
    const SampleBatch batch = RbmEvaluator(psi).sample(cfg.batch, cfg.sampler, chain, x, step == 0);
    x = batch.last;
    const GradientReport g = gradient(psi, batch.configs, H, cfg.optimizer == Optimizer::Sr);
    tr.steps.push_back({step, g.energy.real(), g.energy_var, batch.acceptance});
    if (!std::isfinite(g.energy.real()) ||
        (step >= cfg.steps / 10 && g.energy.real() > cfg.divergence_threshold)) {
      tr.aborted = true;
      tr.abort_reason = "energy diverged at step " + std::to_string(step);
      break;
    }
    const RbmParams before = psi.params;
    if (apply_update(psi, g, cfg.optimizer, lr, cfg.sr_shift)) ++tr.sr_shift_events;
    try {
      psi.params.check_guard();
    } catch (const std::overflow_error& e) {
      psi.params = before;
      tr.aborted = true;
      tr.abort_reason = e.what();
      break;
    }
  }
  tr.final_energy = exact_energy(psi, H);
  tr.relative_error = std::abs(tr.final_energy - e0) / std::abs(e0);
  return tr;
}

EnergyEstimate energy_estimate(const LogAmplitude& log_psi, const HamiltonianSpec& H, double epsilon, double delta,
                               Rng& rng, const SamplerConfig& sampler, int pilot) {
  if (!(epsilon > 0) || !(delta > 0 && delta < 1) || pilot < 2) throw std::invalid_argument("energy_estimate: bad parameters");
  const auto groups = group_terms(H);
  const int n = H.n;
  auto eloc = [&](Config c) { return local_energy_grouped(groups, log_psi, c, log_psi(c)); };
  Config start = rng.below(std::uint64_t{1} << n);
  while (!std::isfinite(log_psi(start).real())) start = rng.below(std::uint64_t{1} << n);
  const SampleBatch p = metropolis_sample(log_psi, n, pilot, sampler, rng, start, true);
  double m = 0, m2 = 0;
  for (Config c : p.configs) {
    const double e = eloc(c).real();
    m += e;
    m2 += e * e;
  }
  m /= pilot;
  const double var = std::max(0.0, (m2 / pilot - m * m) * pilot / (pilot - 1.0));
  const double budget = std::ceil(var / (epsilon * epsilon * delta));
  if (budget > 1e8) throw BudgetError("energy_estimate: Chebyshev budget above 1e8 samples");
  EnergyEstimate out;
  out.variance = var;
  out.samples = static_cast<std::size_t>(std::max(1.0, budget));
  const SampleBatch b = metropolis_sample(log_psi, n, static_cast<int>(out.samples), sampler, rng, p.last, false);
  cplx acc = 0;
  for (Config c : b.configs) acc += eloc(c);
  acc /= static_cast<double>(b.configs.size());
  out.estimate = acc.real();
  out.imag_residual = std::abs(acc.imag());
  return out;
}

}  // namespace cmilab
