#include <benchmark/benchmark.h>

#include "qpjacobi/frequency.hpp"
#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/transfer.hpp"

using namespace qpj;

namespace {

const SamplingPair& am3() {
    static SamplingPair pair = SamplingPair::almost_mathieu(3.0);
    return pair;
}

void BM_transfer_product_a(benchmark::State& state) {
    long n = state.range(0);
    double omega = golden_mean();
    cplx E(1.3, 0.0);
    for (auto _ : state) {
        auto m = transfer_product(am3(), cplx(0.37, 0.0), omega, n, E, Variant::a);
        benchmark::DoNotOptimize(m.log_norm());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_transfer_product_a)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

void BM_transfer_renorm_cadence(benchmark::State& state) {
    int cadence = static_cast<int>(state.range(0));
    double omega = golden_mean();
    cplx E(1.3, 0.0);
    for (auto _ : state) {
        auto m = transfer_product(am3(), cplx(0.37, 0.0), omega, 1024, E, Variant::a,
                                  {.renorm_cadence = cadence});
        benchmark::DoNotOptimize(m.log_norm());
    }
}
BENCHMARK(BM_transfer_renorm_cadence)->Arg(1)->Arg(4)->Arg(16);

void BM_determinant_recursion(benchmark::State& state) {
    long n = state.range(0);
    double omega = golden_mean();
    for (auto _ : state) {
        auto f = determinant(am3(), cplx(0.41, 0.0), omega, Interval::first(n), cplx(0.9, 0.0));
        benchmark::DoNotOptimize(f.log_mag);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_determinant_recursion)->Arg(256)->Arg(4096);

void BM_eigensystem(benchmark::State& state) {
    long n = state.range(0);
    double omega = golden_mean();
    auto w = build_window(am3(), cplx(0.11, 0.0), omega, Interval::first(n));
    for (auto _ : state) {
        auto sd = eigensystem(w);
        benchmark::DoNotOptimize(sd.eigenvalues.data());
    }
}
BENCHMARK(BM_eigensystem)->Arg(16)->Arg(64)->Arg(256);

void BM_eigenvalues_only(benchmark::State& state) {
    long n = state.range(0);
    double omega = golden_mean();
    auto w = build_window(am3(), cplx(0.11, 0.0), omega, Interval::first(n));
    for (auto _ : state) {
        auto e = eigenvalues_only(w);
        benchmark::DoNotOptimize(e.data());
    }
}
BENCHMARK(BM_eigenvalues_only)->Arg(16)->Arg(64)->Arg(256)->Arg(1024);

void BM_lyapunov_grid(benchmark::State& state) {
    double omega = golden_mean();
    for (auto _ : state) {
        auto est = lyapunov(am3(), 0.0, omega, cplx(1.3, 0.0), 64, 233, Variant::a);
        benchmark::DoNotOptimize(est.value);
    }
}
BENCHMARK(BM_lyapunov_grid);

}  // namespace

BENCHMARK_MAIN();
