#include <benchmark/benchmark.h>

#include "cmilab/cmilab.hpp"

using namespace cmilab;

static void BM_ApplyTwoQubitGate(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(1);
  PureState psi(std::vector<int>(static_cast<std::size_t>(n), 2), haar_state(std::size_t{1} << n, rng));
  const Unitary U = haar_unitary(4, rng);
  for (auto _ : st) {
    psi = apply_gate(psi, U, {n / 2 - 1, n / 2});
    benchmark::DoNotOptimize(psi[0]);
  }
  st.SetItemsProcessed(st.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_ApplyTwoQubitGate)->Arg(10)->Arg(14)->Arg(18);

static void BM_MeasurementCmi(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(2);
  const PureState psi(std::vector<int>(static_cast<std::size_t>(n), 2), haar_state(std::size_t{1} << n, rng));
  const Distribution p = measurement_distribution(psi);
  const SitePartition part = SitePartition::chain(0, 2, n - 2, 2);
  for (auto _ : st) benchmark::DoNotOptimize(cmi(p, part).cmi);
}
BENCHMARK(BM_MeasurementCmi)->Arg(8)->Arg(12)->Arg(16);

static void BM_PepsAmplitude(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  const PepsState peps = random_peps(side, side, 2, 1.0, 3);
  std::vector<int> x(static_cast<std::size_t>(side * side));
  std::uint64_t k = 0;
  for (auto _ : st) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<int>((k >> i) & 1U);
    ++k;
    benchmark::DoNotOptimize(amplitude(peps, x));
  }
}
BENCHMARK(BM_PepsAmplitude)->Arg(3)->Arg(4);

static void BM_MpsAmplitude(benchmark::State& st) {
  const MpsState mps = random_mps(20, static_cast<int>(st.range(0)), 1.0, 4);
  std::vector<int> x(20, 0);
  for (auto _ : st) benchmark::DoNotOptimize(amplitude(mps, x));
}
BENCHMARK(BM_MpsAmplitude)->Arg(4)->Arg(16);

static void BM_VmcGradientStep(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const HamiltonianSpec H = build(RotatedCluster{n, 0.4});
  Rng rng(5);
  Ansatz psi{RbmParams::random(n, 2 * n, 0.05, rng), VmcMode::FreePhase, {}};
  const auto log_psi = psi.oracle();
  const SampleBatch batch = metropolis_sample(log_psi, n, 512, {}, rng);
  for (auto _ : st) {
    const GradientReport g = gradient(psi, batch.configs, H, true);
    Ansatz next = psi;
    apply_update(next, g, Optimizer::Sr, 0.05, 1e-3);
    benchmark::DoNotOptimize(next.params.a[0]);
  }
}
BENCHMARK(BM_VmcGradientStep)->Arg(6)->Arg(10);

static void BM_GroundStateLanczos(benchmark::State& st) {
  const HamiltonianSpec H = build(Tfim{static_cast<int>(st.range(0)), 1.0, 2.0});
  for (auto _ : st) benchmark::DoNotOptimize(ground_state(H).energy);
}
BENCHMARK(BM_GroundStateLanczos)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
