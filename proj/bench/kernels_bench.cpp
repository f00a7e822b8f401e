// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "loopsurro/kernels.hpp"
#include "loopsurro/rng.hpp"

using loopsurro::Matrix;
namespace k = loopsurro::kernels;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  loopsurro::Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

k::Exec exec_of(const benchmark::State& state) {
  return state.range(1) ? k::Exec::Parallel : k::Exec::Serial;
}

void BM_Affine(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix w = random_matrix(160, 160, 1);
  const Matrix x = random_matrix(160, batch, 2);
  const std::vector<double> b(160, 0.1);
  Matrix z;
  for (auto _ : state) {
    k::affine(w, b, x, z, exec_of(state));
    benchmark::DoNotOptimize(z.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

void BM_WeightGrad(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix dz = random_matrix(160, batch, 3);
  const Matrix x = random_matrix(160, batch, 4);
  Matrix dw(160, 160);
  std::vector<double> db(160);
  for (auto _ : state) {
    k::weight_grad(dz, x, dw, db, exec_of(state));
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

void BM_InputGrad(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix w = random_matrix(160, 160, 5);
  const Matrix dz = random_matrix(160, batch, 6);
  Matrix dx;
  for (auto _ : state) {
    k::input_grad(w, dz, dx, exec_of(state));
    benchmark::DoNotOptimize(dx.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

void batch_args(benchmark::internal::Benchmark* b) {
  for (int batch : {100, 1000, 10000})
    for (int par : {0, 1}) b->Args({batch, par});
  b->ArgNames({"batch", "parallel"});
}

}  // namespace

BENCHMARK(BM_Affine)->Apply(batch_args);
BENCHMARK(BM_WeightGrad)->Apply(batch_args);
BENCHMARK(BM_InputGrad)->Apply(batch_args);

BENCHMARK_MAIN();
