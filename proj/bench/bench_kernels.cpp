#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "hetcomm/collectives.hpp"
#include "hetcomm/fitting.hpp"
#include "hetcomm/topology.hpp"

using namespace hetcomm;

namespace {

std::vector<TimingSample> noisy_tiers(int points) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> jitter(0.97, 1.03);
  const ProtocolTable t({3.5e-7, 2.6e-10}, {4.7e-6, 7e-11}, {2.5e-5, 3.3e-11});
  std::vector<TimingSample> xs;
  for (int i = 0; i < points; ++i) {
    const double s = std::floor(std::pow(2.0, 26.0 * i / (points - 1)));
    xs.push_back({s, postal_time(select_protocol(t, s), s) * jitter(gen)});
  }
  return xs;
}

void BM_BreakpointSearchSerial(benchmark::State& state) {
  const auto xs = noisy_tiers(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_protocol_table_serial(xs));
}

void BM_BreakpointSearchParallel(benchmark::State& state) {
  const auto xs = noisy_tiers(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_protocol_table(xs));
}

CollectiveSpec dense_alltoallv(Count p) {
  std::mt19937_64 gen(9);
  CollectiveSpec spec{CollectiveOp::Alltoallv, p, 0, std::vector<Bytes>(p * p, 0.0), 0.0};
  for (Count i = 0; i < p; ++i)
    for (Count j = 0; j < p; ++j)
      if (i != j) spec.matrix[i * p + j] = double(gen() % 100000);
  return spec;
}

void BM_CollectiveCostSerial(benchmark::State& state) {
  const auto m = builtin_machine("summit");
  const auto spec = dense_alltoallv(Count(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(collective_cost_serial(m, spec, Strategy::DupDevptr));
}

void BM_CollectiveCostParallel(benchmark::State& state) {
  const auto m = builtin_machine("summit");
  const auto spec = dense_alltoallv(Count(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(collective_cost(m, spec, Strategy::DupDevptr));
}

std::vector<Bytes> sweep_sizes() {
  std::vector<Bytes> sizes;
  for (int k = 0; k <= 30; ++k) sizes.push_back(std::ldexp(1.0, k));
  return sizes;
}

void BM_SweepSerial(benchmark::State& state) {
  const auto m = builtin_machine("summit");
  const CollectiveSpec spec{CollectiveOp::Alltoall, Count(state.range(0)), 0, {}, 0.0};
  const auto sizes = sweep_sizes();
  for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(m, spec, sizes));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto m = builtin_machine("summit");
  const CollectiveSpec spec{CollectiveOp::Alltoall, Count(state.range(0)), 0, {}, 0.0};
  const auto sizes = sweep_sizes();
  for (auto _ : state) benchmark::DoNotOptimize(sweep(m, spec, sizes));
}

}  // namespace

BENCHMARK(BM_BreakpointSearchSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_BreakpointSearchParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_CollectiveCostSerial)->Arg(48)->Arg(192);
BENCHMARK(BM_CollectiveCostParallel)->Arg(48)->Arg(192);
BENCHMARK(BM_SweepSerial)->Arg(96);
BENCHMARK(BM_SweepParallel)->Arg(96);

BENCHMARK_MAIN();
