#include "atg/adaptivity.hpp"
#include "atg/assembly.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace atg;

namespace {

std::shared_ptr<const FeSpace> space_of(int n) {
    return build_space(std::make_shared<const Mesh>(build_initial_uniform(n)));
}

FeFunction random_function(const std::shared_ptr<const FeSpace>& s) {
    std::mt19937_64 rng(1);
    std::vector<double> c(s->n_dofs());
    for (auto& v : c) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    return FeFunction(s, c);
}

Exec exec_of(const benchmark::State& st) { return st.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_Dot(benchmark::State& st) {
    std::vector<double> a(static_cast<std::size_t>(st.range(0)), 1.5), b(a.size(), -0.5);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::dot(a, b, exec_of(st)));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_SpMV(benchmark::State& st) {
    const auto s = space_of(static_cast<int>(st.range(0)));
    const auto a = assemble_AS(*s, [](Vec2) { return Mat2::identity(); });
    const auto x = random_function(s);
    std::vector<double> y(s->n_dofs());
    for (auto _ : st) {
        a.multiply(x.coefficients(), y, exec_of(st));
        benchmark::DoNotOptimize(y.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(a.nnz()));
}

void BM_AssembleJacobian(benchmark::State& st) {
    const auto s = space_of(static_cast<int>(st.range(0)));
    const auto p = make_test2();
    const auto w = random_function(s);
    for (auto _ : st) benchmark::DoNotOptimize(assemble_linearized(*s, w, *p.general, kMatrixQuadOrder, exec_of(st)));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s->mesh().n_triangles()));
}

void BM_Estimator(benchmark::State& st) {
    const auto s = space_of(static_cast<int>(st.range(0)));
    const auto p = make_test1();
    const auto u = random_function(s);
    const EstimatorOptions opts{kLoadQuadOrder, kLoadQuadOrder, exec_of(st)};
    for (auto _ : st) benchmark::DoNotOptimize(estimate_mild(u, u, *p.mild, opts));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s->mesh().n_triangles()));
}

}  // namespace

BENCHMARK(BM_Dot)->ArgsProduct({{1 << 16, 1 << 20}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_SpMV)->ArgsProduct({{128, 512}, {0, 1}})->ArgNames({"grid", "parallel"});
BENCHMARK(BM_AssembleJacobian)->ArgsProduct({{64, 256}, {0, 1}})->ArgNames({"grid", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Estimator)->ArgsProduct({{64, 256}, {0, 1}})->ArgNames({"grid", "parallel"})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
