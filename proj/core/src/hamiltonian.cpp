#include "cmilab/hamiltonians.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cmilab/errors.hpp"

namespace cmilab {

std::uint64_t PauliTerm::x_mask(int n) const {
  std::uint64_t m = 0;
  for (auto [site, op] : ops)
    if (op == 'X' || op == 'Y') m |= std::uint64_t{1} << (n - 1 - site);
  return m;
}

std::uint64_t PauliTerm::z_mask(int n) const {
  std::uint64_t m = 0;
  for (auto [site, op] : ops)
    if (op == 'Z' || op == 'Y') m |= std::uint64_t{1} << (n - 1 - site);
  return m;
}

int PauliTerm::y_count() const {
  return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](const auto& p) { return p.second == 'Y'; }));
}

cplx pauli_phase(std::uint64_t z_mask, int y_count, std::uint64_t x) {
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx s = ipow[y_count & 3];
  return (std::popcount(x & z_mask) & 1) ? -s : s;
}

void HamiltonianSpec::validate() const {
  if (n < 1 || n > kLanczosMaxSites) throw std::invalid_argument("HamiltonianSpec: n out of range");
  for (const auto& t : terms) {
    if (t.coeff == 0 || !std::isfinite(t.coeff)) throw std::invalid_argument("HamiltonianSpec: zero or non-finite coefficient");
    int prev = -1;
    for (auto [site, op] : t.ops) {
      if (site <= prev || site >= n) throw std::invalid_argument("HamiltonianSpec: sites must be sorted, distinct and in range");
      if (op != 'X' && op != 'Y' && op != 'Z') throw std::invalid_argument("HamiltonianSpec: unknown Pauli");
      prev = site;
    }
  }
}

void HamiltonianSpec::apply(const CVector& x, CVector& y) const {
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (static_cast<std::uint64_t>(x.size()) != dim) throw std::invalid_argument("HamiltonianSpec::apply: size mismatch");
  y.setZero(x.size());
  for (const auto& t : terms) {
    const std::uint64_t xm = t.x_mask(n), zm = t.z_mask(n);
    const int yc = t.y_count();
    for (std::uint64_t b = 0; b < dim; ++b)
      y[static_cast<Eigen::Index>(b ^ xm)] += t.coeff * pauli_phase(zm, yc, b) * x[static_cast<Eigen::Index>(b)];
  }
}

CMatrix HamiltonianSpec::dense() const {
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
  CMatrix h = CMatrix::Zero(dim, dim);
  for (const auto& t : terms) {
    const std::uint64_t xm = t.x_mask(n), zm = t.z_mask(n);
    const int yc = t.y_count();
    for (Eigen::Index b = 0; b < dim; ++b)
      h(static_cast<Eigen::Index>(static_cast<std::uint64_t>(b) ^ xm), b) += t.coeff * pauli_phase(zm, yc, static_cast<std::uint64_t>(b));
  }
  return h;
}

namespace {

using Ops = std::vector<std::pair<int, char>>;

// Merges equal Pauli strings while keeping first-insertion order.
class TermAccumulator {
 public:
  void add(double c, Ops ops) {
    std::sort(ops.begin(), ops.end());
    auto it = index_.find(ops);
    if (it == index_.end()) {
      index_.emplace(ops, terms_.size());
      terms_.push_back({c, std::move(ops)});
    } else {
      terms_[it->second].coeff += c;
    }
  }
  std::vector<PauliTerm> take(double drop_below = 0.0) {
    std::vector<PauliTerm> out;
    for (auto& t : terms_)
      if (std::abs(t.coeff) > drop_below) out.push_back(std::move(t));
    return out;
  }

 private:
  std::map<Ops, std::size_t> index_;
  std::vector<PauliTerm> terms_;
};

std::string fmt_params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (auto [k, v] : kv) {
    os << (first ? "" : ";") << k << "=" << v;
    first = false;
  }
  return os.str();
}

void check_sites(int n) {
  if (n < 1 || n > kMaxHamiltonianSites) throw BudgetError("build: more than 14 spins");
}

std::vector<std::vector<int>> single_site_groups(int n) {
  std::vector<std::vector<int>> g;
  for (int i = 0; i < n; ++i) g.push_back({i});
  return g;
}

}  // namespace

HamiltonianSpec build(const Tfim& m) {
  check_sites(m.n);
  if (m.n < 2) throw std::invalid_argument("build(Tfim): n >= 2");
  HamiltonianSpec s;
  s.n = m.n;
  s.model = "tfim";
  s.geometry = "chain";
  s.params = fmt_params({{"n", m.n}, {"J", m.J}, {"h", m.h}});
  TermAccumulator acc;
  if (m.J != 0)
    for (int i = 0; i + 1 < m.n; ++i) acc.add(m.J, {{i, 'X'}, {i + 1, 'X'}});
  if (m.h != 0)
    for (int i = 0; i < m.n; ++i) acc.add(m.h, {{i, 'Z'}});
  s.terms = acc.take();
  s.groups = single_site_groups(m.n);
  return s;
}

HamiltonianSpec build(const Ladder& m) {
  check_sites(2 * m.rungs);
  if (m.rungs < 2) throw std::invalid_argument("build(Ladder): rungs >= 2");
  HamiltonianSpec s;
  s.n = 2 * m.rungs;
  s.model = "ladder";
  s.geometry = "ladder";
  s.params = fmt_params({{"rungs", m.rungs}, {"J_par", m.J_par}, {"J_perp", m.J_perp}, {"J_cross", m.J_cross}});
  TermAccumulator acc;
  auto dot = [&](double J, int a, int b) {
    if (J == 0) return;
    for (char p : {'X', 'Y', 'Z'}) acc.add(J / 4.0, {{a, p}, {b, p}});
  };
  auto site = [](int i, int j) { return 2 * i + j; };
  for (int i = 0; i + 1 < m.rungs; ++i)
    for (int j = 0; j < 2; ++j) dot(m.J_par, site(i, j), site(i + 1, j));
  for (int i = 0; i < m.rungs; ++i) dot(m.J_perp, site(i, 0), site(i, 1));
  for (int i = 0; i + 1 < m.rungs; ++i) {
    dot(m.J_cross, site(i, 0), site(i + 1, 1));
    dot(m.J_cross, site(i, 1), site(i + 1, 0));
  }
  s.terms = acc.take();
  for (int i = 0; i < m.rungs; ++i) s.groups.push_back({site(i, 0), site(i, 1)});
  return s;
}

HamiltonianSpec build(const Rydberg& m) {
  if (m.rows < 1 || m.cols < 1 || m.rows * m.cols < 2) throw std::invalid_argument("build(Rydberg): grid too small");
  if (std::min(m.rows, m.cols) > 3 || std::max(m.rows, m.cols) > 4) throw BudgetError("build(Rydberg): grid exceeds 3x4");
  const int n = m.rows * m.cols;
  HamiltonianSpec s;
  s.n = n;
  s.model = "rydberg";
  s.geometry = "grid " + std::to_string(m.rows) + "x" + std::to_string(m.cols);
  s.params = fmt_params({{"rows", m.rows}, {"cols", m.cols}, {"omega", m.omega}, {"delta", m.delta}, {"R_b", m.r_b}});
  const double C = m.omega * std::pow(m.r_b, 6);
  TermAccumulator acc;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dr = i / m.cols - j / m.cols, dc = i % m.cols - j % m.cols;
      const double v = C / (4.0 * std::pow(dr * dr + dc * dc, 3));
      acc.add(v, {});
      acc.add(v, {{i, 'Z'}});
      acc.add(v, {{j, 'Z'}});
      acc.add(v, {{i, 'Z'}, {j, 'Z'}});
    }
  for (int i = 0; i < n; ++i) {
    acc.add(-m.delta / 2.0, {});
    acc.add(-m.delta / 2.0, {{i, 'Z'}});
    acc.add(-m.omega / 2.0, {{i, 'X'}});
  }
  s.terms = acc.take();
  for (int c = 0; c < m.cols; ++c) {
    std::vector<int> g;
    for (int r = 0; r < m.rows; ++r) g.push_back(r * m.cols + c);
    s.groups.push_back(std::move(g));
  }
  return s;
}

HamiltonianSpec cluster_es_hamiltonian(int n) {
  check_sites(n);
  if (n < 4) throw std::invalid_argument("cluster_es_hamiltonian: n >= 4");
  HamiltonianSpec s;
  s.n = n;
  s.model = "rotated-cluster";
  s.geometry = "chain";
  s.params = fmt_params({{"n", n}, {"theta", 0.0}});
  // Sites are 0-based here: the bulk terms are X_{k-1} Z_k X_{k+1} for k = 1 .. n - 3.
  for (int k = 1; k <= n - 3; ++k) s.terms.push_back({-1.0, {{k - 1, 'X'}, {k, 'Z'}, {k + 1, 'X'}}});
  s.terms.push_back({-1.0, {{0, 'Z'}, {1, 'X'}}});
  s.terms.push_back({-1.0, {{n - 2, 'X'}, {n - 1, 'X'}}});
  s.terms.push_back({-1.0, {{n - 3, 'X'}, {n - 2, 'Z'}, {n - 1, 'Z'}}});
  s.groups = single_site_groups(n);
  return s;
}

HamiltonianSpec build(const RotatedCluster& m) {
  const HamiltonianSpec base = cluster_es_hamiltonian(m.n);
  if (m.theta == 0.0) return base;
  // R P R^dagger for a single-site Pauli, expanded back in the Pauli basis.
  const CMatrix R = gates::Ry(m.theta);
  const CMatrix paulis[3] = {gates::X(), gates::Y(), gates::Z()};
  const char names[3] = {'X', 'Y', 'Z'};
  auto expand = [&](char op) {
    const CMatrix& P = paulis[op == 'X' ? 0 : op == 'Y' ? 1 : 2];
    const CMatrix conj = R * P * R.adjoint();
    std::vector<std::pair<char, double>> out;
    for (int q = 0; q < 3; ++q) {
      const cplx c = (paulis[q] * conj).trace() / 2.0;
      if (std::abs(c) > 1e-15) out.emplace_back(names[q], c.real());
    }
    return out;
  };
  TermAccumulator acc;
  for (const auto& t : base.terms) {
    std::vector<std::pair<double, Ops>> partial{{t.coeff, {}}};
    for (auto [site, op] : t.ops) {
      std::vector<std::pair<double, Ops>> next;
      for (const auto& [c, ops] : partial)
        for (auto [q, w] : expand(op)) {
          Ops o = ops;
          o.emplace_back(site, q);
          next.emplace_back(c * w, std::move(o));
        }
      partial = std::move(next);
    }
    for (auto& [c, ops] : partial) acc.add(c, std::move(ops));
  }
  HamiltonianSpec s = base;
  s.params = fmt_params({{"n", m.n}, {"theta", m.theta}});
  s.terms = acc.take(1e-15);
  return s;
}

HamiltonianSpec build(const ModelSpec& m) {
  return std::visit([](const auto& x) { return build(x); }, m);
}

SitePartition CmiSchedule::partition(const HamiltonianSpec& spec, int dist) const {
  const int ng = static_cast<int>(spec.groups.size());
  if (a_groups < 1 || c_groups < 1 || dist < 1 || a_groups + dist - 1 + c_groups > ng)
    throw std::invalid_argument("CmiSchedule: regions do not fit");
  SitePartition p;
  const int c0 = a_groups + dist - 1;
  for (int g = 0; g < c0 + c_groups; ++g)
    for (int site : spec.groups[static_cast<std::size_t>(g)]) {
      if (g < a_groups) p.A.push_back(site);
      else if (g < c0) p.B.push_back(site);
      else p.C.push_back(site);
    }
  std::sort(p.A.begin(), p.A.end());
  std::sort(p.B.begin(), p.B.end());
  std::sort(p.C.begin(), p.C.end());
  p.distance = dist;
  return p;
}

}  // namespace cmilab
