// Compares the blocked/parallel kernels against the serial reference
// implementations at the shapes the production network actually runs.

#include <benchmark/benchmark.h>

#include <vector>

#include "scfn/kernels.hpp"
#include "scfn/kernels_ref.hpp"
#include "scfn/layers.hpp"
#include "scfn/rng.hpp"

namespace {

// Second conv block: im2col rows = 124*124, k = 9*32, n = 32.
constexpr int kM = 124 * 124;
constexpr int kK = 288;
constexpr int kN = 32;

std::vector<float> random_buffer(size_t n, uint64_t slot) {
  scfn::RngStream s = scfn::RngStream::root(42).derive(slot);
  std::vector<float> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<float>(s.next_normal(0.0, 1.0));
  return out;
}

void BM_GemmReference(benchmark::State& state) {
  auto a = random_buffer(static_cast<size_t>(kM) * kK, 1);
  auto b = random_buffer(static_cast<size_t>(kK) * kN, 2);
  std::vector<float> c(static_cast<size_t>(kM) * kN);
  for (auto _ : state) {
    scfn::ref::gemm(a.data(), b.data(), c.data(), kM, kK, kN, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * kM * kK * kN);
}

void BM_GemmBlocked(benchmark::State& state) {
  auto a = random_buffer(static_cast<size_t>(kM) * kK, 1);
  auto b = random_buffer(static_cast<size_t>(kK) * kN, 2);
  std::vector<float> c(static_cast<size_t>(kM) * kN);
  for (auto _ : state) {
    scfn::kernels::gemm(a.data(), b.data(), c.data(), kM, kK, kN, false, true);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * kM * kK * kN);
}

void BM_ConvReference(benchmark::State& state) {
  auto x = random_buffer(126u * 126 * 32, 3);
  auto w = random_buffer(9u * 32 * 32, 4);
  auto b = random_buffer(32, 5);
  std::vector<float> y(124u * 124 * 32);
  for (auto _ : state) {
    scfn::ref::conv2d_forward(x.data(), w.data(), b.data(), y.data(), 126, 126, 32, 32);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_ConvIm2col(benchmark::State& state) {
  scfn::Tensor<float> x({1, 126, 126, 32}, random_buffer(126u * 126 * 32, 3));
  scfn::ConvParams<float> p{scfn::Tensor<float>({3, 3, 32, 32}, random_buffer(9u * 32 * 32, 4)),
                            scfn::Tensor<float>({32}, random_buffer(32, 5))};
  for (auto _ : state) {
    scfn::Tensor<float> y = scfn::conv2d_forward(x, p);
    benchmark::DoNotOptimize(y.data());
  }
}

BENCHMARK(BM_GemmReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GemmBlocked)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvIm2col)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
