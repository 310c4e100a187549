// Serial reference vs OpenMP kernels on synthetic point clouds.
#include <benchmark/benchmark.h>

#include <random>

#include "mfindex/manifold.hpp"
#include "mfindex/selection.hpp"
#include "mfindex/spectral.hpp"

using namespace mfindex;

namespace {

PointMatrix cloud(std::size_t n, std::size_t dim) {
    std::mt19937_64 rng(n * 31 + dim);
    std::normal_distribution<double> g;
    PointMatrix p(n, dim);
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = g(rng);
    return p;
}

std::vector<double> field(std::size_t n) {
    std::mt19937_64 rng(n);
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

void BM_KnnSerial(benchmark::State& state) {
    const PointMatrix p = cloud(static_cast<std::size_t>(state.range(0)), 244);
    for (auto _ : state) benchmark::DoNotOptimize(knn_graph_serial(p, 10));
}

void BM_KnnParallel(benchmark::State& state) {
    const PointMatrix p = cloud(static_cast<std::size_t>(state.range(0)), 244);
    for (auto _ : state) benchmark::DoNotOptimize(knn_graph(p, 10));
}

void BM_ExtremaSerial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const AdjacencyGraph g = knn_graph(cloud(n, 16), 10);
    const auto phi = field(n);
    for (auto _ : state) benchmark::DoNotOptimize(detect_extrema_serial(phi, g));
}

void BM_ExtremaParallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const AdjacencyGraph g = knn_graph(cloud(n, 16), 10);
    const auto phi = field(n);
    for (auto _ : state) benchmark::DoNotOptimize(detect_extrema(phi, g));
}

void BM_OperatorAssembly(benchmark::State& state) {
    const AdjacencyGraph g = knn_graph(cloud(static_cast<std::size_t>(state.range(0)), 16), 10);
    for (auto _ : state) benchmark::DoNotOptimize(build_operator(g, 0.0, OperatorMode::Balanced));
}

void BM_Lanczos64(benchmark::State& state) {
    const AdjacencyGraph g = knn_graph(cloud(static_cast<std::size_t>(state.range(0)), 16), 10);
    const DiscreteOperator op = build_operator(g, 0.0, OperatorMode::Balanced);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_generalized(op.weights, op.mass, 64, {.method = EigenMethod::Lanczos}));
}

}  // namespace

BENCHMARK(BM_KnnSerial)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnParallel)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExtremaSerial)->Arg(1500)->Arg(20000);
BENCHMARK(BM_ExtremaParallel)->Arg(1500)->Arg(20000);
BENCHMARK(BM_OperatorAssembly)->Arg(1500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Lanczos64)->Arg(1500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
