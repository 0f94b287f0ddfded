// Microbenchmarks for the hot paths: banded apply, one stochastic step at the
// production cutoffs, frame displacement, and the periodogram.

#include <benchmark/benchmark.h>

#include <vector>

#include "qduff/diagnostics.hpp"
#include "qduff/model.hpp"
#include "qduff/qsd.hpp"

using namespace qduff;

namespace {

FockState random_state(std::size_t n, std::uint64_t seed) {
    NoiseStream rng(seed);
    FockState s(n);
    for (auto& a : s.amplitudes) a = rng.sample(1.0);
    renormalize(s);
    return s;
}

void BM_banded_apply(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    const ShiftedModelOps ops = build_shifted_model(ModelParams{}, n, 0.0, 0.0);
    const FockState psi = random_state(n, 1);
    std::vector<Complex> y(n);
    for (auto _ : state) {
        ops.h0.apply(psi.amplitudes, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void BM_qsd_step(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    const double beta = state.range(1) / 10.0;
    const ModelParams params{0.3, 0.3, 1.0, beta};
    const ShiftedModelOps ops = build_shifted_model(params, n, 0.0, 0.0);
    const double dt = 2.0 * 3.141592653589793 / (params.Omega * 4096.0);
    NoiseStream noise(7);
    FockState psi = coherent_state(Complex{0.7, -0.2}, n).state;
    double t = 0.0;
    for (auto _ : state) {
        qsd_step(psi, t, ops, dt, noise.sample(dt));
        t += dt;
    }
}

void BM_displace_frame(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    const FockState base = coherent_state(Complex{0.2, 0.1}, n).state;
    for (auto _ : state) {
        FockState s = base;
        displace_frame(s, 0.4, -0.3, 1e-12, 1.0);
        benchmark::DoNotOptimize(s.amplitudes.data());
    }
}

void BM_periodogram(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    NoiseStream rng(3);
    std::vector<double> series(n);
    for (auto& v : series) v = rng.sample(1.0).real();
    for (auto _ : state) {
        PowerSpectrum ps = periodogram(series, 0.1);
        benchmark::DoNotOptimize(ps.s_raw.data());
    }
}

}  // namespace

BENCHMARK(BM_banded_apply)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_qsd_step)->Args({64, 10})->Args({128, 3})->Args({256, 1});
BENCHMARK(BM_displace_frame)->Arg(64)->Arg(256);
BENCHMARK(BM_periodogram)->Arg(512)->Arg(16384);

BENCHMARK_MAIN();
