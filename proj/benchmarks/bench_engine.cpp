#include <benchmark/benchmark.h>

#include <random>

#include "twotime/ensemble.hpp"
#include "twotime/rules.hpp"
#include "twotime/scenarios.hpp"

namespace {

using namespace twotime;

SelectionContext random_context(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const auto ket = [&] {
    CVector v(static_cast<Eigen::Index>(d));
    for (auto& x : v) x = Complex(g(rng), g(rng));
    return StateVector::normalized(v);
  };
  std::vector<StateVector> basis;
  CMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (auto& x : m.reshaped()) x = Complex(g(rng), g(rng));
  const CMatrix qm = m.householderQr().householderQ();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < d; ++i) {
    basis.push_back(StateVector::normalized(CVector(qm.col(static_cast<Eigen::Index>(i)))));
    labels.push_back("q" + std::to_string(i));
  }
  return SelectionContext(ket(), ket(), Observable::from_basis(basis, labels));
}

void BM_abl(benchmark::State& state) {
  const auto ctx = random_context(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(abl(ctx));
}
BENCHMARK(BM_abl)->Arg(2)->Arg(8)->Arg(32);

void BM_estimate_abl_three_box(benchmark::State& state) {
  const auto ctx = three_box().context_for("fullQ");
  const auto trials = static_cast<std::uint64_t>(state.range(0));
  const unsigned threads = static_cast<unsigned>(state.range(1));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_abl(ctx, trials, ++seed, {threads}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
}
BENCHMARK(BM_estimate_abl_three_box)
    ->Args({100000, 1})
    ->Args({100000, 0})
    ->Unit(benchmark::kMillisecond);

void BM_estimate_abl_dim(benchmark::State& state) {
  const auto ctx = random_context(static_cast<std::size_t>(state.range(0)), 2);
  const std::uint64_t trials = 20000;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_abl(ctx, trials, ++seed, {1}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trials));
}
BENCHMARK(BM_estimate_abl_dim)->Arg(2)->Arg(6)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_decomposition_check(benchmark::State& state) {
  const auto s = spin_half_default();
  const Observable b_obs = Observable::from_basis(
      std::vector{spin_up({1, 0, 0}), spin_down({1, 0, 0})}, {"x+", "x-"});
  for (auto _ : state)
    benchmark::DoNotOptimize(decomposition_check(s.context.pre(), s.context.intervening(), b_obs));
}
BENCHMARK(BM_decomposition_check);

}  // namespace

BENCHMARK_MAIN();
