// OpenMP kernels against their serial references. Arg is the grid side.

#include <benchmark/benchmark.h>

#include <random>

#include "namer/assignment.hpp"
#include "namer/hungarian.hpp"
#include "namer/kernels.hpp"
#include "namer/tensor.hpp"

namespace {

using namespace namer;

constexpr std::size_t kChannels = 64;

Grid random_grid(std::size_t side) {
  std::mt19937_64 rng(side);
  std::uniform_real_distribution<float> u(0.01F, 1.0F);
  Grid g(kChannels, side, side);
  for (float& x : g.data) x = u(rng);
  return g;
}

std::vector<ClassId> random_target(std::size_t cells) {
  std::mt19937_64 rng(cells);
  std::uniform_int_distribution<int> d(0, static_cast<int>(kChannels) - 1);
  std::vector<ClassId> t(cells);
  for (auto& c : t) c = static_cast<ClassId>(d(rng));
  return t;
}

template <auto Fn>
void argmax(benchmark::State& state) {
  Grid g = random_grid(static_cast<std::size_t>(state.range(0)));
  std::vector<ClassId> best;
  std::vector<float> score;
  for (auto _ : state) {
    Fn(g, best, score);
    benchmark::DoNotOptimize(best.data());
  }
}

template <auto Fn>
void softmax(benchmark::State& state) {
  const Grid base = random_grid(static_cast<std::size_t>(state.range(0)));
  Grid g = base;
  for (auto _ : state) {
    state.PauseTiming();
    g = base;
    state.ResumeTiming();
    Fn(g);
    benchmark::DoNotOptimize(g.data.data());
  }
}

template <auto Fn>
void window(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Grid g = random_grid(side);
  std::vector<Cell> pos;
  std::vector<ClassId> cls;
  for (std::size_t i = 0; i < side; ++i) {
    pos.push_back({static_cast<int>(i), static_cast<int>((i * 7) % side)});
    cls.push_back(static_cast<ClassId>(i % kChannels));
  }
  CostMatrix out;
  for (auto _ : state) {
    Fn(g, pos, cls, 5, kBigM, out);
    benchmark::DoNotOptimize(out.data.data());
  }
}

template <auto Fn>
void nll(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Grid g = random_grid(side);
  auto t = random_target(side * side);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(g, t));
}

}  // namespace

BENCHMARK(argmax<kernels::cell_argmax>)->Arg(32)->Arg(128);
BENCHMARK(argmax<kernels::serial::cell_argmax>)->Arg(32)->Arg(128);
BENCHMARK(softmax<kernels::softmax_cells>)->Arg(32)->Arg(128);
BENCHMARK(softmax<kernels::serial::softmax_cells>)->Arg(32)->Arg(128);
BENCHMARK(window<kernels::window_cost>)->Arg(32)->Arg(128);
BENCHMARK(window<kernels::serial::window_cost>)->Arg(32)->Arg(128);
BENCHMARK(nll<kernels::nll_sum>)->Arg(32)->Arg(128);
BENCHMARK(nll<kernels::serial::nll_sum>)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
