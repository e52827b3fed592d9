#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmilab/cmilab.hpp"

namespace cmilab::cli {

std::string RunContext::unit(const std::string& stem) const {
  return stem + (base == LogBase::Two ? "_bits" : "_nats");
}

double RunContext::in_base(double bits) const { return base == LogBase::Two ? bits : bits * std::log(2.0); }

void RunContext::check(bool ok, const std::string& what) {
  if (!ok) violations.push_back(what);
}

namespace {

std::uint64_t index(std::size_t i) { return static_cast<std::uint64_t>(i); }

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

json fit_json(const DecayFit& f) {
  return {{"xi", f.xi},
          {"alpha", f.alpha},
          {"residual", f.residual},
          {"diverged", f.diverged},
          {"vanished", f.vanished},
          {"points_used", f.points_used}};
}

// {"model": "tfim" | "ladder" | "rydberg" | "rotated-cluster", ...}
HamiltonianSpec parse_model(Params p) {
  const auto name = p.require<std::string>("model");
  HamiltonianSpec spec;
  if (name == "tfim") {
    spec = build(Tfim{p.require<int>("n"), p.get("J", 1.0), p.get("h", 1.0)});
  } else if (name == "ladder") {
    const Ladder d;
    spec = build(Ladder{p.require<int>("rungs"), p.get("J_par", d.J_par), p.get("J_perp", d.J_perp),
                        p.get("J_cross", d.J_cross)});
  } else if (name == "rydberg") {
    const Rydberg d;
    spec = build(Rydberg{p.require<int>("rows"), p.require<int>("cols"), p.get("omega", d.omega),
                         p.get("delta", d.delta), p.get("r_b", d.r_b)});
  } else if (name == "rotated-cluster") {
    spec = build(RotatedCluster{p.require<int>("n"), p.get("theta", 0.0)});
  } else {
    throw SchemaError(p.where() + ".model: unknown model '" + name + "'");
  }
  p.finish();
  return spec;
}

std::vector<int> positive_list(Params& p, const std::string& key, std::vector<int> fallback) {
  auto v = p.list<int>(key, std::move(fallback));
  if (v.empty()) throw SchemaError(p.where() + "." + key + ": empty list");
  for (int x : v)
    if (x < 1) throw SchemaError(p.where() + "." + key + ": entries must be positive");
  return v;
}

int positive(Params& p, const std::string& key, int fallback) {
  const int v = p.get(key, fallback);
  if (v < 1) throw SchemaError(p.where() + "." + key + ": must be positive");
  return v;
}

int positive_required(Params& p, const std::string& key) {
  const int v = p.require<int>(key);
  if (v < 1) throw SchemaError(p.where() + "." + key + ": must be positive");
  return v;
}

void cluster_rotate(Params& p, RunContext& ctx) {
  const auto ns = p.list<int>("n", {});
  if (ns.empty()) throw SchemaError(p.where() + ": missing required parameter 'n'");
  for (int n : ns)
    if (n < 4 || n % 2) throw SchemaError(p.where() + ".n: even and at least 4");
  std::vector<double> thetas;
  if (p.has("thetas") && p.has("theta_steps")) throw SchemaError(p.where() + ": give thetas or theta_steps, not both");
  if (p.has("thetas")) {
    thetas = p.list<double>("thetas", {});
  } else {
    const int steps = p.get("theta_steps", 7);
    if (steps < 2) throw SchemaError(p.where() + ".theta_steps: at least 2");
    for (int k = 0; k < steps; ++k) thetas.push_back(std::numbers::pi / 2 * k / (steps - 1));
  }
  p.finish();

  std::vector<RotatedClusterResult> res(ns.size() * thetas.size());
  parallel_for(res.size(), [&](std::size_t i) {
    res[i] = rotated_cluster_experiment(ns[i / thetas.size()], thetas[i % thetas.size()]);
  });

  Csv csv({"theta", "n", ctx.unit("cmi"), "bound", ctx.unit("avg_entropy"), "seed"});
  for (const auto& r : res) {
    csv.row(r.theta, r.n, ctx.in_base(r.cmi.cmi), ctx.in_base(r.bound), ctx.in_base(r.avg_entropy), ctx.seed);
    ctx.check(r.cmi.cmi <= r.bound + 1e-9,
              "cluster-rotate: n=" + std::to_string(r.n) + " theta=" + num(r.theta) + " CMI above cos(theta)^(n-2)");
  }
  ctx.artifacts.add("cluster_rotate.csv", csv.str());
  ctx.summary["rows"] = csv.rows();
}

void entswap_chain(Params& p, RunContext& ctx) {
  const auto ns = positive_list(p, "n", {2, 3, 4, 5});
  const auto a0s = p.list<double>("a0_squared", {0.5, 0.7, 0.9});
  const int sequences = positive(p, "sequences", 20);
  const auto mode_name = p.get<std::string>("mode", "enumerate");
  if (mode_name != "enumerate" && mode_name != "sample") throw SchemaError(p.where() + ".mode: enumerate or sample");
  const ChainMode mode = mode_name == "enumerate" ? ChainMode::Enumerate : ChainMode::Sample;
  const int samples = mode == ChainMode::Sample ? positive(p, "samples", 4096) : 0;
  p.finish();
  for (int n : ns)
    if (n < 2) throw SchemaError(p.where() + ".n: at least 2");
  for (double a : a0s)
    if (!(a >= 0 && a <= 1)) throw SchemaError(p.where() + ".a0_squared: must lie in [0, 1]");

  struct Job {
    int n;
    double a0;
    int seq;
    Rng rng;
    ChainSwapResult r;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (std::size_t j = 0; j < a0s.size(); ++j)
      for (int s = 0; s < sequences; ++s)
        jobs.push_back({ns[i], a0s[j], s,
                        ctx.root.substream(index(static_cast<std::size_t>(ns[i])))
                            .substream(index(j))
                            .substream(index(static_cast<std::size_t>(s))),
                        {}});
  parallel_for(jobs.size(), [&](std::size_t k) {
    Job& job = jobs[k];
    std::vector<Unitary> bases;
    for (int b = 0; b + 1 < job.n; ++b) bases.push_back(haar_unitary(4, job.rng));
    job.r = chain_swap(job.n, SchmidtPair::qubit(job.a0), bases, mode, &job.rng, static_cast<std::size_t>(samples));
  });

  Csv csv({"n", "a0_squared", "sequence", "seed", ctx.unit("avg_entropy"), "avg_concurrence", "bound", "std_error"});
  double worst = -1e300;
  for (const Job& job : jobs) {
    // The bound is on entropy in bits; it is rescaled with the entropy column.
    csv.row(job.n, job.a0, job.seq, job.rng.key(), ctx.in_base(job.r.avg_entropy), job.r.avg_concurrence,
            ctx.in_base(job.r.bound), job.r.std_error);
    worst = std::max(worst, job.r.avg_entropy - job.r.bound);
    if (mode == ChainMode::Enumerate)
      ctx.check(job.r.avg_entropy <= job.r.bound + 1e-10,
                "entswap-chain: n=" + std::to_string(job.n) + " a0^2=" + num(job.a0) + " sequence " +
                    std::to_string(job.seq) + " entropy above |2 a0 a1|^n");
  }
  ctx.artifacts.add("entswap_chain.csv", csv.str());
  ctx.summary["rows"] = csv.rows();
  ctx.summary["max_entropy_minus_bound_bits"] = worst;
}

void haar_f(Params& p, RunContext& ctx) {
  const auto circuit = p.get<std::string>("circuit", "haar");
  if (circuit != "haar" && circuit != "triangular") throw SchemaError(p.where() + ".circuit: haar or triangular");
  const int d = positive(p, "d", 2);
  const int depth = circuit == "triangular" ? p.get("depth", 2) : 0;
  if (circuit == "triangular" && depth < 2) throw SchemaError(p.where() + ".depth: at least 2");
  const auto sigma_name = p.get<std::string>("sigma", circuit == "haar" ? "mixed" : "pure");
  if (sigma_name != "mixed" && sigma_name != "pure") throw SchemaError(p.where() + ".sigma: mixed or pure");
  const int samples = positive(p, "samples", 100000);
  p.finish();
  if (d < 2) throw SchemaError(p.where() + ".d: at least 2");

  // B and C each carry d0 levels: one qudit for a Haar gate, D - 1 qudits for a triangular circuit.
  int d0 = d;
  for (int k = 2; k < depth; ++k) d0 *= d;
  if (static_cast<double>(d0) * d0 > 4096) throw BudgetError("haar-f: BC dimension above 4096");
  CMatrix sigma = CMatrix::Zero(d0, d0);
  if (sigma_name == "mixed") {
    sigma = CMatrix::Identity(d0, d0) / static_cast<double>(d0);
  } else {
    sigma(0, 0) = 1.0;
  }

  std::vector<double> f(static_cast<std::size_t>(samples));
  parallel_for(f.size(), [&](std::size_t s) {
    Rng rng = ctx.root.substream(index(s));
    const CMatrix U =
        circuit == "haar" ? haar_unitary(d0 * d0, rng).matrix() : random_triangular_unitary(d, depth, rng).matrix();
    f[s] = imperfectness_f_value(U, sigma, 0, 0, 1);
  });

  // Haar: exact mean (d0 - 1) / (d0^4 - 1) tr sigma^2. Triangular: lower bound ((d^2 + 1)(d + 1))^-(D-1).
  double reference = 0;
  if (circuit == "haar") {
    const double q = d0, purity = (sigma * sigma).trace().real();
    reference = (q - 1) / (q * q * q * q - 1) * purity;
  } else {
    reference = std::pow(1.0 / ((d * d + 1.0) * (d + 1.0)), depth - 1);
  }
  const double m = mean_of(f), se = std_error(f);
  Csv csv({"circuit", "d", "depth", "sigma", "samples", "seed", "mean_f", "std_error", "reference"});
  csv.row(circuit, d, depth, sigma_name, samples, ctx.root.key(), m, se, reference);
  ctx.artifacts.add("haar_f.csv", csv.str());
  ctx.summary["mean_f"] = m;
  ctx.summary["std_error"] = se;
  ctx.summary["reference"] = reference;
  ctx.summary["deviation_in_std_errors"] = se > 0 ? (m - reference) / se : 0.0;
}

void brickwork_cmi(Params& p, RunContext& ctx) {
  const int n = positive_required(p, "n");
  const int D = positive(p, "D", 2);
  const int d = positive(p, "d", 2);
  const int L = positive(p, "L", 2);
  const auto seps = positive_list(p, "separations", {2, 4, 6});
  const int trials = positive(p, "trials", 100);
  p.finish();

  const RegionScan r = region_cmi_scan(n, D, d, L, seps, trials, ctx.root.key());
  Csv csv({"trial", "seed", "separation", ctx.unit("cmi")});
  for (std::size_t t = 0; t < r.cmi_bits.size(); ++t)
    for (std::size_t s = 0; s < r.separations.size(); ++s)
      csv.row(static_cast<int>(t), r.seeds[t], r.separations[s], ctx.in_base(r.cmi_bits[t][s]));
  ctx.artifacts.add("brickwork_cmi.csv", csv.str());
  ctx.summary["n"] = n;
  ctx.summary["D"] = D;
  ctx.summary["d"] = d;
  ctx.summary["L"] = L;
  ctx.summary["trials"] = trials;
  json med = json::array();
  for (double v : r.median) med.push_back(ctx.in_base(v));
  ctx.summary["median_" + ctx.unit("cmi")] = med;
  ctx.summary["fit"] = fit_json(r.fit);
}

void tn_cmi(Params& p, RunContext& ctx) {
  const auto fam = p.get<std::string>("family", "mps");
  if (fam != "mps" && fam != "peps") throw SchemaError(p.where() + ".family: mps or peps");
  const TnFamily family = fam == "mps" ? TnFamily::MPS : TnFamily::PEPS;
  const auto rs = positive_list(p, "r", {8});
  const auto mus = p.list<double>("mu", {0.0, 2.0});
  const int samples = positive(p, "samples", 10);
  TnGeometry g;
  g.rows = family == TnFamily::MPS ? 1 : positive(p, "rows", 4);
  g.cols = positive(p, "cols", family == TnFamily::MPS ? 12 : 4);
  g.width = positive(p, "width", 1);
  g.distances = positive_list(p, "distances", family == TnFamily::MPS ? std::vector<int>{1, 2, 3, 4, 5, 6}
                                                                      : std::vector<int>{1, 2});
  p.finish();

  Csv csv({"family", "r", "mu", "seed", "dist", ctx.unit("cmi"), "positive_fraction"});
  json fits = json::array();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = 0; j < mus.size(); ++j) {
      const TnCmiResult res =
          tn_cmi_experiment(family, rs[i], mus[j], samples, ctx.root.substream(index(i)).substream(index(j)).key(), g);
      for (std::size_t s = 0; s < res.seeds.size(); ++s)
        for (std::size_t k = 0; k < g.distances.size(); ++k)
          csv.row(fam, rs[i], mus[j], res.seeds[s], g.distances[k], ctx.in_base(res.cmi_bits[s][k]),
                  res.positive_fraction[s]);
      json f = fit_json(res.fit);
      f["r"] = rs[i];
      f["mu"] = mus[j];
      fits.push_back(f);
    }
  }
  ctx.artifacts.add("tn_cmi.csv", csv.str());
  ctx.summary["geometry"] = {{"rows", g.rows}, {"cols", g.cols}, {"width", g.width}, {"distances", g.distances}};
  ctx.summary["samples"] = samples;
  ctx.summary["fits"] = fits;
}

void hamiltonian_cmi(Params& p, RunContext& ctx) {
  if (!p.has("models")) throw SchemaError(p.where() + ": missing required parameter 'models'");
  const json models = p.raw("models");
  if (!models.is_array() || models.empty()) throw SchemaError(p.where() + ".models: non-empty array of models");
  CmiSchedule schedule;
  schedule.a_groups = positive(p, "a_groups", 1);
  schedule.c_groups = positive(p, "c_groups", 1);
  schedule.distances = positive_list(p, "distances", schedule.distances);
  p.finish();

  std::vector<HamiltonianSpec> specs;
  for (std::size_t i = 0; i < models.size(); ++i)
    specs.push_back(parse_model(Params(models[i], p.where() + ".models[" + std::to_string(i) + "]")));
  const auto rows = cmi_decay_scan(specs, schedule);

  Csv csv({"model", "params", "dist", ctx.unit("cmi"), "gap", "xi"});
  json fits = json::array();
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.distances.size(); ++k)
      csv.row(r.model, r.params, r.distances[k], ctx.in_base(r.cmi_bits[k]), r.gap, r.fit.xi);
    json f = fit_json(r.fit);
    f["model"] = r.model;
    f["params"] = r.params;
    fits.push_back(f);
  }
  ctx.artifacts.add("hamiltonian_cmi.csv", csv.str());
  ctx.summary["schedule"] = {
      {"a_groups", schedule.a_groups}, {"c_groups", schedule.c_groups}, {"distances", schedule.distances}};
  ctx.summary["fits"] = fits;
}

void markov_factorize(Params& p, RunContext& ctx) {
  const HamiltonianSpec spec = parse_model(p.child("model"));
  if (p.has("width") == p.has("plan")) throw SchemaError(p.where() + ": give exactly one of width or plan");
  FactorizationPlan plan;
  if (p.has("width")) {
    plan = FactorizationPlan::uniform_1d(spec.n, positive_required(p, "width"));
  } else {
    const json& j = p.raw("plan");
    try {
      plan.regions = j.at("regions").get<std::vector<std::vector<int>>>();
      plan.separators = j.at("separators").get<std::vector<std::vector<int>>>();
    } catch (const json::exception& e) {
      throw SchemaError(p.where() + ".plan: " + e.what());
    }
  }
  p.finish();

  const GroundStateResult gs = ground_state(spec);
  const FactorizedDistribution f = chain_factorize(measurement_distribution(gs.state), plan);
  json out = {{"model", spec.model},
              {"params", spec.params},
              {"regions", plan.regions},
              {"separators", plan.separators},
              {"tv_error", f.tv_error},
              {"certificate", f.certificate},
              {"cut_terms", f.cut_terms}};
  ctx.artifacts.add("factorization.json", out.dump(2) + "\n");
  ctx.check(f.tv_error <= f.certificate + 1e-9, "markov-factorize: TV error above the telescoping certificate");
  ctx.summary["tv_error"] = f.tv_error;
  ctx.summary["certificate"] = f.certificate;
}

void area_law(Params& p, RunContext& ctx) {
  const HamiltonianSpec spec = parse_model(p.child("model"));
  const int a = positive_required(p, "a"), b = positive_required(p, "b"), c = positive_required(p, "c");
  p.finish();
  if (static_cast<std::size_t>(a + b + c) > spec.groups.size())
    throw SchemaError(p.where() + ": a + b + c exceeds the model's " + std::to_string(spec.groups.size()) + " groups");

  SitePartition part;
  for (int g = 0; g < a + b + c; ++g) {
    auto& dst = g < a ? part.A : g < a + b ? part.B : part.C;
    for (int s : spec.groups[static_cast<std::size_t>(g)]) dst.push_back(s);
  }
  part.distance = b + 1;
  const GroundStateResult gs = ground_state(spec);
  const AreaLawReport r = area_law_check(gs.state, part);

  // Each row asserts lhs <= rhs + 1e-9.
  Csv csv({"check", "lhs", "rhs"});
  csv.row("overlap", r.overlap_floor, r.overlap);
  csv.row("entropy_sigma_a_nats", r.s_sigma_a, r.boundary_bound);
  csv.row("trace_distance", r.trace_distance, r.trace_bound);
  csv.row("fannes", r.fannes_gap, r.fannes_bound);
  ctx.artifacts.add("area_law.csv", csv.str());
  ctx.check(r.holds(1e-9), "area-law: a certified inequality failed");
  ctx.summary = {{"model", spec.model},
                 {"params", spec.params},
                 {"s_rho_a_nats", r.s_rho_a},
                 {"s_sigma_a_nats", r.s_sigma_a},
                 {"cmi_nats", r.cmi_nats},
                 {"overlap", r.overlap}};
}

void vmc_train(Params& p, RunContext& ctx) {
  const HamiltonianSpec spec = parse_model(p.child("model"));
  VmcConfig cfg;
  cfg.steps = positive(p, "steps", cfg.steps);
  cfg.batch = positive(p, "batch", cfg.batch);
  cfg.lr = p.get("lr", cfg.lr);
  cfg.lr_step = positive(p, "lr_step", cfg.lr_step);
  cfg.init_scale = p.get("init_scale", cfg.init_scale);
  cfg.n_hidden = p.get("n_hidden", cfg.n_hidden);
  cfg.sampler.burn_in_sweeps = p.get("burn_in_sweeps", cfg.sampler.burn_in_sweeps);
  cfg.sampler.sweeps_between = p.get("sweeps_between", cfg.sampler.sweeps_between);
  const auto mode = p.get<std::string>("mode", to_string(cfg.mode));
  if (mode != "free-phase" && mode != "phase-informed") throw SchemaError(p.where() + ".mode: free-phase or phase-informed");
  cfg.mode = mode == "free-phase" ? VmcMode::FreePhase : VmcMode::PhaseInformed;
  const auto opt = p.get<std::string>("optimizer", to_string(cfg.optimizer));
  if (opt != "sgd" && opt != "sr") throw SchemaError(p.where() + ".optimizer: sgd or sr");
  cfg.optimizer = opt == "sgd" ? Optimizer::Sgd : Optimizer::Sr;
  cfg.sr_shift = p.get("sr_shift", cfg.sr_shift);
  cfg.divergence_threshold = p.get("divergence_threshold", cfg.divergence_threshold);
  p.finish();
  cfg.seed = ctx.root.key();
  cfg.validate();

  const double e0 = ground_state(spec).energy;
  const TrainingTrace tr = train(spec, cfg, e0);
  Csv csv({"step", "energy_mean", "energy_var", "acceptance"});
  for (const auto& s : tr.steps) csv.row(s.step, s.energy_mean, s.energy_var, s.acceptance);
  ctx.artifacts.add("vmc_trace.csv", csv.str());
  ctx.summary = {{"model", spec.model},
                 {"params", spec.params},
                 {"e0", e0},
                 {"final_energy", tr.final_energy},
                 {"relative_error", tr.relative_error},
                 {"aborted", tr.aborted},
                 {"abort_reason", tr.abort_reason},
                 {"sr_shift_events", tr.sr_shift_events}};
  if (tr.aborted) ctx.failures.push_back("vmc-train: " + tr.abort_reason);
}

}  // namespace

const std::map<std::string, Runner>& experiments() {
  static const std::map<std::string, Runner> table = {
      {"cluster-rotate", cluster_rotate}, {"entswap-chain", entswap_chain},
      {"haar-f", haar_f},                 {"brickwork-cmi", brickwork_cmi},
      {"tn-cmi", tn_cmi},                 {"hamiltonian-cmi", hamiltonian_cmi},
      {"markov-factorize", markov_factorize}, {"area-law", area_law},
      {"vmc-train", vmc_train},
  };
  return table;
}

}  // namespace cmilab::cli
