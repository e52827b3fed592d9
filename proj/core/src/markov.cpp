#include "cmilab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cmilab {

namespace {

std::vector<int> set_minus(const std::vector<int>& a, const std::set<int>& b) {
  std::vector<int> out;
  for (int x : a)
    if (!b.count(x)) out.push_back(x);
  return out;
}

}  // namespace

void FactorizationPlan::validate(const std::vector<int>& sites) const {
  if (regions.empty()) throw std::invalid_argument("plan: no regions");
  if (separators.size() + 1 != regions.size())
    throw std::invalid_argument("plan: need exactly one separator per region after the first");
  const std::set<int> universe(sites.begin(), sites.end());
  std::set<int> covered;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto& r = regions[k];
    if (r.empty()) throw std::invalid_argument("plan: empty region");
    if (cap > 0 && static_cast<int>(r.size()) > cap) throw std::invalid_argument("plan: region exceeds cap");
    const std::set<int> rs(r.begin(), r.end());
    if (rs.size() != r.size()) throw std::invalid_argument("plan: repeated site in region");
    for (int s : r)
      if (!universe.count(s)) throw std::invalid_argument("plan: region site not in distribution");
    if (k > 0) {
      const auto& sep = separators[k - 1];
      if (cap > 0 && static_cast<int>(sep.size()) > cap) throw std::invalid_argument("plan: separator exceeds cap");
      for (int s : sep) {
        if (!rs.count(s)) throw std::invalid_argument("plan: separator not inside its region");
        if (!covered.count(s)) throw std::invalid_argument("plan: separator not inside earlier regions");
      }
      const std::set<int> ss(sep.begin(), sep.end());
      for (int s : r)
        if (!ss.count(s) && covered.count(s))
          throw std::invalid_argument("plan: region overlaps earlier regions outside its separator");
    }
    covered.insert(r.begin(), r.end());
  }
  if (covered != universe) throw std::invalid_argument("plan: regions do not cover all sites");
}

FactorizationPlan FactorizationPlan::uniform_1d(int n, int w) {
  if (n < 1 || w < 1) throw std::invalid_argument("uniform_1d: need n, w >= 1");
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < n; start += w) {
    std::vector<int> b;
    for (int i = start; i < std::min(start + w, n); ++i) b.push_back(i);
    blocks.push_back(std::move(b));
  }
  FactorizationPlan plan;
  plan.block_scale = w;
  if (blocks.size() == 1) {
    plan.regions.push_back(blocks[0]);
    return plan;
  }
  for (std::size_t k = 0; k + 1 < blocks.size(); ++k) {
    auto r = blocks[k];
    r.insert(r.end(), blocks[k + 1].begin(), blocks[k + 1].end());
    plan.regions.push_back(std::move(r));
    if (k > 0) plan.separators.push_back(blocks[k]);
  }
  return plan;
}

FactorizationPlan FactorizationPlan::snake_2d(int rows, int cols, int width) {
  if (rows < 1 || cols < 1 || width < 1) throw std::invalid_argument("snake_2d: bad grid");
  std::vector<int> order;
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < cols; ++j) order.push_back(r * cols + (r % 2 == 0 ? j : cols - 1 - j));
  FactorizationPlan plan;
  plan.block_scale = width;
  plan.regions.push_back({order[0]});
  for (std::size_t k = 1; k < order.size(); ++k) {
    const int s = order[k];
    std::vector<int> sep;
    for (std::size_t j = 0; j < k; ++j) {
      const int t = order[j];
      if (std::abs(t / cols - s / cols) <= width && std::abs(t % cols - s % cols) <= width) sep.push_back(t);
    }
    std::sort(sep.begin(), sep.end());
    auto region = sep;
    region.push_back(s);
    plan.regions.push_back(std::move(region));
    plan.separators.push_back(std::move(sep));
  }
  return plan;
}

std::vector<double> FactorizedDistribution::evaluate_all() const {
  std::size_t dim = 1;
  for (int d : source_dims) dim *= static_cast<std::size_t>(d);
  std::vector<double> q(dim, 1.0);
  auto positions = [&](const std::vector<int>& labels) {
    std::vector<int> pos;
    for (int s : labels)
      pos.push_back(static_cast<int>(std::find(source_sites.begin(), source_sites.end(), s) - source_sites.begin()));
    return pos;
  };
  for (const auto& t : region_tables) {
    const auto map = subset_index_map(source_dims, positions(t.sites()));
    for (std::size_t i = 0; i < dim; ++i) q[i] *= t.probs()[map[i]];
  }
  for (const auto& t : separator_tables) {
    if (t.sites().empty()) continue;
    const auto map = subset_index_map(source_dims, positions(t.sites()));
    for (std::size_t i = 0; i < dim; ++i) {
      const double den = t.probs()[map[i]];
      q[i] = den > 0 ? q[i] / den : 0.0;
    }
  }
  return q;
}

FactorizedDistribution chain_factorize(const Distribution& dist, const FactorizationPlan& plan) {
  plan.validate(dist.sites());
  FactorizedDistribution f;
  f.plan = plan;
  f.source_sites = dist.sites();
  f.source_dims = dist.dims();
  for (const auto& r : plan.regions) f.region_tables.push_back(marginal(dist, r));
  for (const auto& s : plan.separators) f.separator_tables.push_back(marginal(dist, s));

  const auto q = f.evaluate_all();
  f.tv_error = 0;
  for (std::size_t i = 0; i < q.size(); ++i) f.tv_error += std::abs(dist.probs()[i] - q[i]);

  // Telescoping: swapping in one conditional at a time changes the product
  // by exactly the L1 defect of cut k.
  std::set<int> past(plan.regions[0].begin(), plan.regions[0].end());
  f.certificate = 0;
  for (std::size_t k = 1; k < plan.regions.size(); ++k) {
    const auto& sep = plan.separators[k - 1];
    const std::set<int> sep_set(sep.begin(), sep.end());
    SitePartition cut;
    cut.A = set_minus(std::vector<int>(past.begin(), past.end()), sep_set);
    cut.B = sep;
    cut.C = set_minus(plan.regions[k], sep_set);
    double term = 0;
    if (!cut.A.empty() && !cut.C.empty()) term = cmi(dist, cut, LogBase::E).pinsker_residual;
    f.cut_terms.push_back(term);
    f.certificate += term;
    past.insert(plan.regions[k].begin(), plan.regions[k].end());
  }
  return f;
}

FactorizedDistribution markov_conditionals(const Distribution& dist, int block) {
  const int n = static_cast<int>(dist.sites().size());
  if (block < 1 || block >= n) throw std::invalid_argument("markov_conditionals: need 1 <= block < n");
  FactorizationPlan plan = FactorizationPlan::uniform_1d(n, block);
  auto relabel = [&](std::vector<int>& v) {
    for (int& s : v) s = dist.sites()[static_cast<std::size_t>(s)];
  };
  for (auto& r : plan.regions) relabel(r);
  for (auto& s : plan.separators) relabel(s);
  return chain_factorize(dist, plan);
}

// ------------------------------------------------------------------ gadget

double relu(double x) { return x > 0 ? x : 0.0; }

double sawtooth_g(double x) { return 2 * relu(x) - 4 * relu(x - 0.5) + 2 * relu(x - 1); }

double sawtooth_h(double x) { return x - sawtooth_g(x) / 4; }

int relu_product_gadget(int x, int y) {
  if ((x != 0 && x != 1) || (y != 0 && y != 1)) throw std::invalid_argument("relu_product_gadget: bits only");
  const double m = (x + y) / 2.0;
  return static_cast<int>(std::lround(2 * sawtooth_h(m) - m));
}

bool relu_gadget_self_test() {
  if (sawtooth_h(0.0) != 0.0 || sawtooth_h(0.5) != 0.25 || sawtooth_h(1.0) != 1.0) return false;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y) {
      const double m = (x + y) / 2.0;
      if (2 * sawtooth_h(m) - m != static_cast<double>(x * y)) return false;
      if (relu_product_gadget(x, y) != x * y) return false;
    }
  return true;
}

// ----------------------------------------------------- coherent Markov state

CoherentMarkovState coherent_markov_state(const Distribution& dist, const SitePartition& partition) {
  const int n = static_cast<int>(dist.sites().size());
  SitePartition pos;
  pos.A = dist.positions_of(partition.A);
  pos.B = dist.positions_of(partition.B);
  pos.C = dist.positions_of(partition.C);
  pos.distance = partition.distance;
  pos.validate(n);
  if (static_cast<int>(pos.A.size() + pos.B.size() + pos.C.size()) != n)
    throw std::invalid_argument("coherent_markov_state: partition must cover every site");

  std::vector<int> ab = pos.A, bc = pos.B;
  ab.insert(ab.end(), pos.B.begin(), pos.B.end());
  bc.insert(bc.end(), pos.C.begin(), pos.C.end());
  const auto& dims = dist.dims();
  auto table = [&](const std::vector<int>& positions) {
    std::vector<double> t;
    std::size_t m = 1;
    for (int p : positions) m *= static_cast<std::size_t>(dims[static_cast<std::size_t>(p)]);
    t.assign(m, 0.0);
    const auto map = positions.empty() ? std::vector<std::uint32_t>(dist.size(), 0) : subset_index_map(dims, positions);
    for (std::size_t i = 0; i < dist.size(); ++i) t[map[i]] += dist.probs()[i];
    return std::make_pair(t, map);
  };
  const auto [pab, mab] = table(ab);
  const auto [pbc, mbc] = table(bc);
  const auto [pb, mb] = table(pos.B);

  CVector amp(static_cast<Eigen::Index>(dist.size()));
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double b = pb[mb[i]];
    amp[static_cast<Eigen::Index>(i)] = b > 0 ? std::sqrt(pab[mab[i]] * pbc[mbc[i]] / b) : 0.0;
  }
  return {PureState(dims, std::move(amp), true), pos};
}

bool AreaLawReport::holds(double tol) const {
  return s_sigma_a <= boundary_bound + tol && overlap >= overlap_floor - tol &&
         trace_distance <= trace_bound + tol;
}

AreaLawReport area_law_check(const PureState& state, const SitePartition& partition) {
  partition.validate(state.n_sites());
  CVector mag(static_cast<Eigen::Index>(state.dim()));
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const cplx a = state[i];
    if (a.real() < -1e-10 || std::abs(a.imag()) > 1e-10)
      throw std::invalid_argument("area_law_check: state is not sign-free");
    mag[static_cast<Eigen::Index>(i)] = std::max(a.real(), 0.0);
  }
  const PureState psi(state.local_dims(), std::move(mag), true);
  const Distribution dist = measurement_distribution(psi);
  const CoherentMarkovState cms = coherent_markov_state(dist, partition);

  AreaLawReport r;
  r.overlap = psi.amplitudes().dot(cms.phi.amplitudes()).real();
  r.cmi_nats = cmi(dist, partition, LogBase::E).cmi;
  r.overlap_floor = 1.0 - std::sqrt(std::max(r.cmi_nats, 0.0) / 2.0);

  const DensityMatrix rho = partial_trace(psi, partition.A);
  const DensityMatrix sigma = partial_trace(cms.phi, partition.A);
  r.s_rho_a = von_neumann_entropy(rho, LogBase::E);
  r.s_sigma_a = von_neumann_entropy(sigma, LogBase::E);
  for (int b : partition.B) r.boundary_bound += std::log(static_cast<double>(state.local_dims()[static_cast<std::size_t>(b)]));

  const CMatrix diff = rho.matrix() - sigma.matrix();
  r.trace_distance = Eigen::SelfAdjointEigenSolver<CMatrix>(diff, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().sum();
  r.trace_bound = 2.0 * std::sqrt(std::max(0.0, 1.0 - r.overlap * r.overlap));
  r.fannes_gap = std::abs(r.s_rho_a - r.s_sigma_a);
  const double t = r.trace_distance / 2;
  const double da = static_cast<double>(rho.dim());
  r.fannes_bound = (da > 1 ? t * std::log(da - 1) : 0.0) + binary_entropy(std::min(t, 1.0)) * std::log(2.0);
  return r;
}

}  // namespace cmilab
