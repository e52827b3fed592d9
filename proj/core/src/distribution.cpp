#include "cmilab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cmilab {

Distribution::Distribution(std::vector<int> sites, std::vector<int> dims, std::vector<double> probs)
    : sites_(std::move(sites)), dims_(std::move(dims)), probs_(std::move(probs)) {
  if (sites_.size() != dims_.size()) throw std::invalid_argument("Distribution: sites/dims length mismatch");
  std::size_t d = 1;
  for (int k : dims_) {
    if (k < 1) throw std::invalid_argument("Distribution: bad dimension");
    d *= static_cast<std::size_t>(k);
  }
  if (d != probs_.size()) throw std::invalid_argument("Distribution: table size mismatch");
  double sum = 0;
  for (double p : probs_) {
    if (!(p >= 0)) throw std::invalid_argument("Distribution: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-10) throw std::invalid_argument("Distribution: does not sum to 1");
  auto sorted = sites_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("Distribution: repeated site label");
}

double Distribution::prob(const std::vector<int>& digits) const {
  if (sites_.empty()) return probs_.at(0);
  return probs_[index_of(digits, dims_)];
}

int Distribution::position_of(int site) const {
  auto it = std::find(sites_.begin(), sites_.end(), site);
  if (it == sites_.end()) throw std::invalid_argument("Distribution: site not in table");
  return static_cast<int>(it - sites_.begin());
}

std::vector<int> Distribution::positions_of(const std::vector<int>& labels) const {
  std::vector<int> pos;
  pos.reserve(labels.size());
  for (int s : labels) pos.push_back(position_of(s));
  return pos;
}

void Distribution::write_csv(std::ostream& os) const {
  os << "outcome,prob\n";
  const auto old_prec = os.precision(17);
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    for (int d : digits_of(i, dims_)) os << d;
    os << ',' << probs_[i] << '\n';
  }
  os.precision(old_prec);
}

Distribution measurement_distribution(const PureState& state, const std::vector<int>& sites) {
  std::vector<int> dims;
  for (int s : sites) dims.push_back(state.local_dims().at(static_cast<std::size_t>(s)));
  std::size_t m = 1;
  for (int d : dims) m *= static_cast<std::size_t>(d);
  std::vector<double> p(m, 0.0);
  if (sites.empty()) return Distribution({}, {}, {1.0});
  const auto map = subset_index_map(state.local_dims(), sites);
  for (std::size_t i = 0; i < state.dim(); ++i) p[map[i]] += std::norm(state[i]);
  double sum = 0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
  return Distribution(sites, std::move(dims), std::move(p));
}

Distribution measurement_distribution(const PureState& state) {
  std::vector<int> all(static_cast<std::size_t>(state.n_sites()));
  for (int i = 0; i < state.n_sites(); ++i) all[static_cast<std::size_t>(i)] = i;
  return measurement_distribution(state, all);
}

Distribution marginal(const Distribution& dist, const std::vector<int>& target) {
  if (target.empty()) return Distribution({}, {}, {1.0});
  const auto pos = dist.positions_of(target);
  std::vector<int> dims;
  std::size_t m = 1;
  for (int p : pos) {
    dims.push_back(dist.dims()[static_cast<std::size_t>(p)]);
    m *= static_cast<std::size_t>(dims.back());
  }
  std::vector<double> out(m, 0.0);
  if (dist.sites().empty()) throw std::invalid_argument("marginal: empty table");
  const auto map = subset_index_map(dist.dims(), pos);
  for (std::size_t i = 0; i < dist.size(); ++i) out[map[i]] += dist.probs()[i];
  return Distribution(target, std::move(dims), std::move(out));
}

Distribution conditional(const Distribution& dist, const std::vector<int>& target,
                         const std::vector<int>& given, const std::vector<int>& value) {
  if (given.size() != value.size()) throw std::invalid_argument("conditional: value length mismatch");
  std::vector<int> both = given;
  both.insert(both.end(), target.begin(), target.end());
  const Distribution joint = marginal(dist, both);
  std::vector<int> gdims(joint.dims().begin(), joint.dims().begin() + static_cast<long>(given.size()));
  std::vector<int> tdims(joint.dims().begin() + static_cast<long>(given.size()), joint.dims().end());
  std::size_t tsize = 1;
  for (int d : tdims) tsize *= static_cast<std::size_t>(d);
  const std::size_t g = given.empty() ? 0 : index_of(value, gdims);
  std::vector<double> out(joint.probs().begin() + static_cast<long>(g * tsize),
                          joint.probs().begin() + static_cast<long>((g + 1) * tsize));
  double pg = 0;
  for (double x : out) pg += x;
  if (!(pg > 0)) throw std::domain_error("conditional: conditioning event has probability 0");
  for (double& x : out) x /= pg;
  if (target.empty()) return Distribution({}, {}, {1.0});
  return Distribution(target, std::move(tdims), std::move(out));
}

double entropy(const Distribution& dist, LogBase base) { return shannon_entropy(dist.probs(), base); }

namespace {
void check_same_support_space(const Distribution& p, const Distribution& q) {
  if (p.sites() != q.sites() || p.dims() != q.dims())
    throw std::invalid_argument("distributions over different sites");
}
}  // namespace

double kl_divergence(const Distribution& p, const Distribution& q, LogBase base) {
  check_same_support_space(p, q);
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p.probs()[i];
    if (pi <= 0) continue;
    const double qi = q.probs()[i];
    if (qi <= 0) return std::numeric_limits<double>::infinity();
    s += pi * log_in(pi / qi, base);
  }
  return std::max(s, 0.0);
}

double l1_distance(const Distribution& p, const Distribution& q) {
  check_same_support_space(p, q);
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p.probs()[i] - q.probs()[i]);
  return s;
}

double CmiReport::cmi_nats() const { return base == LogBase::E ? cmi : cmi * std::log(2.0); }

CmiReport cmi(const Distribution& dist, const SitePartition& part, LogBase base) {
  if (part.A.empty() || part.C.empty()) throw std::invalid_argument("cmi: A and C must be nonempty");
  {
    std::vector<int> all = part.A;
    all.insert(all.end(), part.B.begin(), part.B.end());
    all.insert(all.end(), part.C.begin(), part.C.end());
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("cmi: overlapping partition");
  }
  std::vector<int> order = part.B;
  order.insert(order.end(), part.A.begin(), part.A.end());
  order.insert(order.end(), part.C.begin(), part.C.end());
  const Distribution bac = marginal(dist, order);

  std::size_t nb = 1, na = 1, nc = 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto d = static_cast<std::size_t>(bac.dims()[k]);
    if (k < part.B.size()) nb *= d;
    else if (k < part.B.size() + part.A.size()) na *= d;
    else nc *= d;
  }
  const auto& p = bac.probs();

  // Entropies of the four marginals from the (b, a, c) table.
  std::vector<double> pb(nb, 0.0), pab(nb * na, 0.0), pbc(nb * nc, 0.0);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t c = 0; c < nc; ++c) {
        const double x = p[(b * na + a) * nc + c];
        pb[b] += x;
        pab[b * na + a] += x;
        pbc[b * nc + c] += x;
      }

  CmiReport r;
  r.base = base;
  r.partition = part;
  r.cmi = shannon_entropy(pab, base) + shannon_entropy(pbc, base) - shannon_entropy(pb, base) -
          shannon_entropy(p, base);

  double kl = 0, l1 = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (pb[b] < kConditioningFloor) continue;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t c = 0; c < nc; ++c) {
        const double joint = p[(b * na + a) * nc + c] / pb[b];
        const double prod = (pab[b * na + a] / pb[b]) * (pbc[b * nc + c] / pb[b]);
        l1 += pb[b] * std::abs(joint - prod);
        if (joint > 0) kl += pb[b] * joint * log_in(joint / prod, base);
      }
  }
  r.cmi_definitional = kl;
  r.pinsker_residual = l1;
  return r;
}

double holevo_avg_entropy(const PureState& state, const SitePartition& part, LogBase base) {
  std::vector<int> keep = part.A;
  if (keep.empty()) return 0.0;
  const auto& dims = state.local_dims();
  std::vector<int> rest;
  {
    std::vector<bool> used(dims.size(), false);
    for (int s : part.A) used.at(static_cast<std::size_t>(s)) = true;
    for (int s : part.B) used.at(static_cast<std::size_t>(s)) = true;
    for (int s = 0; s < state.n_sites(); ++s)
      if (!used[static_cast<std::size_t>(s)]) rest.push_back(s);
  }
  const auto bmap = part.B.empty() ? std::vector<std::uint32_t>(state.dim(), 0)
                                   : subset_index_map(dims, part.B);
  const auto amap = subset_index_map(dims, part.A);
  const auto rmap = rest.empty() ? std::vector<std::uint32_t>(state.dim(), 0) : subset_index_map(dims, rest);
  std::size_t nb = 1, na = 1, nr = 1;
  for (int s : part.B) nb *= static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]);
  for (int s : part.A) na *= static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]);
  for (int s : rest) nr *= static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]);

  std::vector<CMatrix> blocks(nb, CMatrix::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nr)));
  for (std::size_t i = 0; i < state.dim(); ++i) blocks[bmap[i]](amap[i], rmap[i]) = state[i];

  double avg = 0;
  for (const auto& m : blocks) {
    const double pb = m.squaredNorm();
    if (pb < kConditioningFloor) continue;
    CMatrix rho = m * m.adjoint() / pb;
    rho = 0.5 * (rho + CMatrix(rho.adjoint()));
    avg += pb * von_neumann_entropy(DensityMatrix(std::move(rho)), base);
  }
  return avg;
}

DecayFit fit_cmi_length(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_cmi_length: need at least 3 points");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].first > points[i - 1].first))
      throw std::invalid_argument("fit_cmi_length: distances must increase");
  std::vector<double> xs, ys;
  for (const auto& [d, v] : points)
    if (v > kFitFloor) {
      xs.push_back(d);
      ys.push_back(std::log(v));
    }
  DecayFit fit;
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    fit.vanished = true;
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (icpt + slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  fit.alpha = std::exp(icpt);
  if (slope >= -1e-12) {
    fit.diverged = true;
    fit.xi = std::numeric_limits<double>::infinity();
  } else {
    fit.xi = -1.0 / slope;
  }
  return fit;
}

}  // namespace cmilab
