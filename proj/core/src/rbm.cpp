#include <cmath>
#include <stdexcept>

#include "cmilab/vmc.hpp"

namespace cmilab {

namespace {

cplx log1pexp(cplx t) {
  if (t.real() > 0) return t + std::log(1.0 + std::exp(-t));
  return std::log(1.0 + std::exp(t));
}

cplx sigmoid(cplx t) {
  if (t.real() > 0) return 1.0 / (1.0 + std::exp(-t));
  const cplx e = std::exp(t);
  return e / (1.0 + e);
}

CVector hidden_fields(const RbmParams& p, Config x) {
  CVector theta = p.b;
  for (int i = 0; i < p.n; ++i)
    if (config_bit(x, p.n, i)) theta += p.W.row(i).transpose();
  return theta;
}

}  // namespace

RbmParams RbmParams::zeros(int n, int n_hidden) {
  if (n < 1 || n > 62 || n_hidden < 0) throw std::invalid_argument("RbmParams: bad sizes");
  RbmParams p;
  p.n = n;
  p.n_hidden = n_hidden;
  p.a = CVector::Zero(n);
  p.b = CVector::Zero(n_hidden);
  p.W = CMatrix::Zero(n, n_hidden);
  return p;
}

RbmParams RbmParams::random(int n, int n_hidden, double scale, Rng& rng, bool real_only) {
  RbmParams p = zeros(n, n_hidden);
  auto draw = [&] {
    const cplx z = scale * rng.complex_normal();
    return real_only ? cplx(z.real() * std::sqrt(2.0), 0.0) : z;
  };
  for (Eigen::Index i = 0; i < p.a.size(); ++i) p.a[i] = draw();
  for (Eigen::Index j = 0; j < p.b.size(); ++j) p.b[j] = draw();
  for (Eigen::Index i = 0; i < p.W.rows(); ++i)
    for (Eigen::Index j = 0; j < p.W.cols(); ++j) p.W(i, j) = draw();
  return p;
}

CVector RbmParams::flatten() const {
  CVector v(n_complex());
  v.head(n) = a;
  v.segment(n, n_hidden) = b;
  for (int i = 0; i < n; ++i) v.segment(n + n_hidden + i * n_hidden, n_hidden) = W.row(i).transpose();
  return v;
}

void RbmParams::unflatten(const CVector& v) {
  if (v.size() != n_complex()) throw std::invalid_argument("RbmParams::unflatten: size mismatch");
  a = v.head(n);
  b = v.segment(n, n_hidden);
  for (int i = 0; i < n; ++i) W.row(i) = v.segment(n + n_hidden + i * n_hidden, n_hidden).transpose();
}

void RbmParams::check_guard() const {
  const CVector v = flatten();
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (!std::isfinite(v[k].real()) || !std::isfinite(v[k].imag()) || std::abs(v[k]) > kRbmEntryGuard)
      throw std::overflow_error("RbmParams: entry outside the overflow guard");
}

cplx rbm_log_amplitude(const RbmParams& p, Config x) {
  cplx s = 0;
  for (int i = 0; i < p.n; ++i)
    if (config_bit(x, p.n, i)) s += p.a[i];
  const CVector theta = hidden_fields(p, x);
  for (Eigen::Index j = 0; j < theta.size(); ++j) s += log1pexp(theta[j]);
  return s;
}

cplx rbm_amplitude(const RbmParams& p, Config x) { return std::exp(rbm_log_amplitude(p, x)); }

cplx rbm_amplitude(const RbmParams& p, const std::vector<int>& x) {
  if (static_cast<int>(x.size()) != p.n) throw std::invalid_argument("rbm_amplitude: length mismatch");
  Config c = 0;
  for (int i = 0; i < p.n; ++i) {
    if (x[static_cast<std::size_t>(i)] != 0 && x[static_cast<std::size_t>(i)] != 1)
      throw std::invalid_argument("rbm_amplitude: entries must be 0 or 1");
    c = (c << 1) | static_cast<Config>(x[static_cast<std::size_t>(i)]);
  }
  return rbm_amplitude(p, c);
}

CVector rbm_log_derivatives(const RbmParams& p, Config x) {
  CVector o = CVector::Zero(p.n_complex());
  const CVector theta = hidden_fields(p, x);
  CVector sig(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) sig[j] = sigmoid(theta[j]);
  o.segment(p.n, p.n_hidden) = sig;
  for (int i = 0; i < p.n; ++i)
    if (config_bit(x, p.n, i)) {
      o[i] = 1.0;
      o.segment(p.n + p.n_hidden + i * p.n_hidden, p.n_hidden) = sig;
    }
  return o;
}

const char* to_string(VmcMode m) { return m == VmcMode::FreePhase ? "free-phase" : "phase-informed"; }
const char* to_string(Optimizer o) { return o == Optimizer::Sgd ? "sgd" : "sr"; }

cplx Ansatz::log_amplitude(Config x) const {
  if (mode == VmcMode::FreePhase) return rbm_log_amplitude(params, x);
  return cplx(rbm_log_amplitude(params, x).real(), phase[static_cast<std::size_t>(x)]);
}

LogAmplitude Ansatz::oracle() const {
  return [this](Config x) { return log_amplitude(x); };
}

}  // namespace cmilab
