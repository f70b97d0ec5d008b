// Serial reference vs OpenMP solvers on the same noise.
#include <benchmark/benchmark.h>

#include <cmath>

#include "hjm/mild_solver.hpp"
#include "hjm/volatility.hpp"

namespace {

hjm::HjmModel gamma_model() {
    hjm::GammaGeometricFamily fam{1.0, 0.5, 2.0, 3};
    return hjm::HjmModel(hjm::tanh_bounded({0.1, 0.05, 0.025}, 1.0), hjm::build_gamma_geometric(fam, 0.5, 1.5),
                         hjm::make_grid(8.0, 257, 0.1));
}

hjm::Curve initial(const hjm::WeightGrid& g) {
    hjm::Curve u(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = 0.03 + 0.01 * (1.0 - std::exp(-g.nodes()[i]));
    return u;
}

hjm::SolverConfig config(std::size_t paths) {
    hjm::SolverConfig c;
    c.T = 0.5;
    c.n_steps = 8;
    c.n_paths = paths;
    c.n_picard = 30;
    c.picard_tol = 1e-10;
    return c;
}

void BM_EulerParallel(benchmark::State& st) {
    const auto m = gamma_model();
    const auto u0 = initial(m.grid());
    const auto cfg = config(static_cast<std::size_t>(st.range(0)));
    const auto noise = hjm::default_noise(m.driver(), cfg);
    for (auto _ : st) benchmark::DoNotOptimize(hjm::euler_solve(m, u0, cfg, noise).values.data());
}

void BM_EulerSerial(benchmark::State& st) {
    const auto m = gamma_model();
    const auto u0 = initial(m.grid());
    const auto cfg = config(static_cast<std::size_t>(st.range(0)));
    const auto noise = hjm::default_noise(m.driver(), cfg);
    for (auto _ : st) benchmark::DoNotOptimize(hjm::reference::euler_solve(m, u0, cfg, noise).values.data());
}

void BM_PicardParallel(benchmark::State& st) {
    const auto m = gamma_model();
    const auto u0 = initial(m.grid());
    const auto cfg = config(static_cast<std::size_t>(st.range(0)));
    const auto noise = hjm::default_noise(m.driver(), cfg);
    for (auto _ : st) benchmark::DoNotOptimize(hjm::picard_solve(m, u0, cfg, noise).sweeps);
}

void BM_PicardSerial(benchmark::State& st) {
    const auto m = gamma_model();
    const auto u0 = initial(m.grid());
    const auto cfg = config(static_cast<std::size_t>(st.range(0)));
    const auto noise = hjm::default_noise(m.driver(), cfg);
    for (auto _ : st) benchmark::DoNotOptimize(hjm::reference::picard_solve(m, u0, cfg, noise).sweeps);
}

}  // namespace

BENCHMARK(BM_EulerParallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EulerSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PicardParallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PicardSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
