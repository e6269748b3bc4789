#include "ipop/annealer.hpp"
#include "ipop/curvefit.hpp"
#include "ipop/dispatch.hpp"
#include "ipop/oracle.hpp"
#include "ipop/profile.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace ipop;

namespace {

std::vector<ModuleProfile> make_fleet(int count) {
    std::mt19937_64 eng(7);
    auto uniform = [&eng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(eng() >> 11) * 0x1.0p-53;
    };
    std::vector<ModuleProfile> fleet;
    for (int i = 0; i < count; ++i) {
        fleet.push_back(quadratic_loss_profile("m" + std::to_string(i + 1),
                                               uniform(2.0, 12.0), uniform(5e-4, 5e-3),
                                               uniform(5.0, 20.0), uniform(200.0, 400.0)));
    }
    return fleet;
}

ActiveSet all_of(const std::vector<ModuleProfile>& fleet) {
    ActiveSet set;
    for (const ModuleProfile& m : fleet) {
        set.module_ids.push_back(m.module_id());
    }
    return set;
}

double mid_demand(const std::vector<ModuleProfile>& fleet) {
    double lo = 0.0;
    double hi = 0.0;
    for (const ModuleProfile& m : fleet) {
        lo += m.p_out_min();
        hi += m.p_out_max();
    }
    return 0.5 * (lo + hi);
}

void bm_solve_equal_incremental(benchmark::State& state) {
    const auto fleet = make_fleet(static_cast<int>(state.range(0)));
    const ActiveSet set = all_of(fleet);
    const double demand = mid_demand(fleet);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_equal_incremental(set, demand, fleet));
    }
}
BENCHMARK(bm_solve_equal_incremental)->Arg(2)->Arg(4)->Arg(8);

void bm_build_dispatch_schedule(benchmark::State& state) {
    const auto fleet = make_fleet(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_dispatch_schedule(fleet, 50.0, 900.0, 10.0));
    }
}
BENCHMARK(bm_build_dispatch_schedule);

void bm_anneal(benchmark::State& state) {
    const auto fleet = make_fleet(3);
    const ActiveSet set = all_of(fleet);
    const double demand = mid_demand(fleet);
    AnnealerConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(anneal(fleet, set, demand, cfg));
    }
}
BENCHMARK(bm_anneal);

void bm_grid_search(benchmark::State& state) {
    const auto fleet = make_fleet(2);
    const ActiveSet set = all_of(fleet);
    const double demand = mid_demand(fleet);
    const double step = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(grid_search(set, demand, step, fleet));
    }
}
BENCHMARK(bm_grid_search)->Arg(1)->Arg(10);

void bm_fit_polynomial(benchmark::State& state) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (int i = 0; i < 64; ++i) {
        const double x = 0.5 + 0.05 * i;
        xs.push_back(x);
        ys.push_back(5.0 + 90.0 * x + 2.0 * x * x + 0.2 * x * x * x);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_polynomial(xs, ys, 3));
    }
}
BENCHMARK(bm_fit_polynomial);

} // namespace

BENCHMARK_MAIN();
