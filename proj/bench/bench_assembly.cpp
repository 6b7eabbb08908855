// Serial reference loops against the OpenMP assembly kernels.
//
//   ./bench_assembly --benchmark_filter=Dense
//   OMP_NUM_THREADS=4 ./bench_assembly

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "nscov/assembly.hpp"

using namespace nscov;

namespace {

struct Sites {
  Eigen::MatrixX2d loc;
  std::vector<LocalKernel> kernels;
  std::vector<ScalarKernel> scalar;
};

Sites make_sites(int n, bool anisotropic) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sites s;
  s.loc.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    s.loc.row(i) << u(rng), u(rng);
    const double rho = 0.05 + 0.05 * u(rng);
    const KernelGeometry g{rho, anisotropic ? 0.5 + u(rng) : 1.0, anisotropic ? 1.0 + u(rng) : 1.5707963267948966};
    s.kernels.push_back({0.8 + 0.4 * u(rng), kernel_matrix(g), 0.5 + 2.0 * u(rng)});
  }
  s.scalar = scalar_kernels(s.kernels);
  return s;
}

void BM_DenseReference(benchmark::State& st) {
  const auto s = make_sites(static_cast<int>(st.range(0)), true);
  for (auto _ : st) benchmark::DoNotOptimize(reference::assemble_dense(s.loc, s.kernels));
  st.SetComplexityN(st.range(0));
}

void BM_DenseParallel(benchmark::State& st) {
  const auto s = make_sites(static_cast<int>(st.range(0)), true);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_dense(s.loc, s.kernels));
  st.SetComplexityN(st.range(0));
}

void BM_TaperedReference(benchmark::State& st) {
  const auto s = make_sites(static_cast<int>(st.range(0)), false);
  const TaperSpec taper{TaperFamily::Wendland1, 0.1};
  for (auto _ : st) benchmark::DoNotOptimize(reference::assemble_tapered(s.loc, s.scalar, taper));
}

void BM_TaperedParallel(benchmark::State& st) {
  const auto s = make_sites(static_cast<int>(st.range(0)), false);
  const TaperSpec taper{TaperFamily::Wendland1, 0.1};
  const auto pattern = SparsePattern::build(s.loc, taper.delta);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_tapered(pattern, s.scalar, taper));
}

}  // namespace

BENCHMARK(BM_DenseReference)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseParallel)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TaperedReference)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TaperedParallel)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
