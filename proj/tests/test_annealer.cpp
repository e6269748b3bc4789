#include "ipop/annealer.hpp"
#include "ipop/dispatch.hpp"
#include "ipop/errors.hpp"
#include "ipop/oracle.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <vector>

using namespace ipop;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("config validation names the offending field") {
    AnnealerConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    cfg.t0 = 0.0;
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("t0"));
    cfg = {};
    cfg.cooling = 1.0;
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("cooling"));
    cfg = {};
    cfg.iters_per_temp = 0;
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("iters_per_temp"));
    cfg = {};
    cfg.t_thres = 2.0;
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("t_thres"));
    cfg = {};
    cfg.boltzmann = -1.0;
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("boltzmann"));
    cfg = {};
    cfg.max_transfer_frac = 1.5;
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("max_transfer_frac"));
}

TEST_CASE("config JSON accepts partial documents and rejects typos") {
    const AnnealerConfig cfg = AnnealerConfig::from_json(
        nlohmann::json{{"cooling", 0.9}, {"seed", 77}});
    CHECK_THAT(cfg.cooling, WithinAbs(0.9, 1e-15));
    CHECK(cfg.seed == 77);
    CHECK_THAT(cfg.t0, WithinAbs(1.0, 1e-15));
    CHECK(cfg.iters_per_temp == 100);

    CHECK_THROWS_AS(AnnealerConfig::from_json(nlohmann::json{{"cooIing", 0.9}}), InputError);
    CHECK_THROWS_WITH(AnnealerConfig::from_json(nlohmann::json{{"cooIing", 0.9}}),
                      ContainsSubstring("cooIing"));
    CHECK_THROWS_AS(AnnealerConfig::from_json(nlohmann::json{{"cooling", "fast"}}), InputError);
    CHECK_THROWS_AS(AnnealerConfig::from_json(nlohmann::json::array()), InputError);
    // Values are validated after parsing.
    CHECK_THROWS_AS(AnnealerConfig::from_json(nlohmann::json{{"t0", -1.0}}), InputError);

    const AnnealerConfig back = AnnealerConfig::from_json(cfg.to_json());
    CHECK(back.cooling == cfg.cooling);
    CHECK(back.seed == cfg.seed);
    CHECK(back.max_transfer_frac == cfg.max_transfer_frac);
}

TEST_CASE("improvements are accepted without consuming randomness") {
    const AnnealerConfig cfg;
    Rng used(5);
    Rng fresh(5);
    CHECK(metropolis_accept(0.01, 0.5, cfg, used));
    CHECK(used.uniform01() == fresh.uniform01());
}

TEST_CASE("zero delta is always accepted") {
    const AnnealerConfig cfg;
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        CHECK(metropolis_accept(0.0, 0.3, cfg, rng));
    }
}

TEST_CASE("metropolis acceptance rate matches the analytic probability") {
    // P(accept) = exp(-0.01 / (1 * 0.1)) = exp(-0.1).
    AnnealerConfig cfg;
    cfg.boltzmann = 1.0;
    Rng rng(12345);
    const int draws = 100000;
    int accepted = 0;
    for (int i = 0; i < draws; ++i) {
        if (metropolis_accept(-0.01, 0.1, cfg, rng)) {
            ++accepted;
        }
    }
    const double rate = static_cast<double>(accepted) / draws;
    CHECK_THAT(rate, WithinAbs(std::exp(-0.1), 0.005));
}

TEST_CASE("perturbation conserves the total exactly") {
    const auto fleet = ipoptest::identical_fleet(2);
    const ActiveSet set = ipoptest::full_set(fleet);
    Allocation alloc = solve_equal_incremental(set, 400.0, fleet);
    const double total = alloc.total_p_out;
    const AnnealerConfig cfg;
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        alloc = perturb(alloc, 0.5, cfg, rng, fleet);
        CHECK(alloc.total_p_out == total);
    }
}

TEST_CASE("a fleet pinned at its maximum cannot be perturbed") {
    const auto fleet = ipoptest::identical_fleet(2);
    const ActiveSet set = ipoptest::full_set(fleet);
    const Allocation alloc = solve_equal_incremental(set, 800.0, fleet);
    const AnnealerConfig cfg;
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const Allocation next = perturb(alloc, 1.0, cfg, rng, fleet);
        CHECK(next.modules[0].p_out == alloc.modules[0].p_out);
        CHECK(next.modules[1].p_out == alloc.modules[1].p_out);
    }
}

TEST_CASE("single-module allocations pass through untouched") {
    std::vector<ModuleProfile> fleet;
    fleet.push_back(quadratic_loss_profile("solo", 5.0, 0.001, 10.0, 400.0));
    const Allocation alloc = solve_equal_incremental(ActiveSet{{"solo"}}, 123.0, fleet);
    const AnnealerConfig cfg;
    Rng used(6);
    Rng fresh(6);
    const Allocation next = perturb(alloc, 1.0, cfg, used, fleet);
    CHECK(next.modules[0].p_out == alloc.modules[0].p_out);
    CHECK(used.uniform01() == fresh.uniform01());
}

TEST_CASE("perturbations from random states respect bounds and totals") {
    const auto fleet = ipoptest::random_quadratic_fleet(31, 3);
    const ActiveSet set = ipoptest::full_set(fleet);
    const AnnealerConfig cfg;
    Rng rng(8);
    const double demand = ipoptest::spread_demands(fleet)[2];
    Allocation alloc = random_feasible_allocation(set, demand, fleet, rng);
    for (int i = 0; i < 10000; ++i) {
        alloc = perturb(alloc, 0.7, cfg, rng, fleet);
        CHECK_THAT(alloc.total_p_out, WithinRel(demand, 1e-9));
        for (std::size_t k = 0; k < alloc.modules.size(); ++k) {
            CHECK(alloc.modules[k].p_out >= fleet[k].p_out_min() - 1e-9);
            CHECK(alloc.modules[k].p_out <= fleet[k].p_out_max() + 1e-9);
        }
    }
}

TEST_CASE("random initial allocations are feasible across seeds and demands") {
    const auto fleet = ipoptest::random_quadratic_fleet(77, 3);
    const ActiveSet set = ipoptest::full_set(fleet);
    double sum_min = 0.0;
    double sum_max = 0.0;
    for (const ModuleProfile& m : fleet) {
        sum_min += m.p_out_min();
        sum_max += m.p_out_max();
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        for (double f : {0.001, 0.2, 0.5, 0.8, 0.999}) {
            const double demand = sum_min + f * (sum_max - sum_min);
            const Allocation alloc = random_feasible_allocation(set, demand, fleet, rng);
            CHECK_THAT(alloc.total_p_out, WithinRel(demand, 1e-9));
            for (std::size_t k = 0; k < alloc.modules.size(); ++k) {
                CHECK(alloc.modules[k].p_out >= fleet[k].p_out_min() - 1e-9);
                CHECK(alloc.modules[k].p_out <= fleet[k].p_out_max() + 1e-9);
            }
        }
    }
}

TEST_CASE("annealing a symmetric pair lands near the even split") {
    const auto fleet = ipoptest::identical_fleet(2);
    const AnnealerConfig cfg;
    const Allocation best = anneal(fleet, ipoptest::full_set(fleet), 400.0, cfg);
    CHECK_THAT(best.modules[0].p_out, WithinAbs(200.0, 0.5));
    CHECK_THAT(best.modules[1].p_out, WithinAbs(200.0, 0.5));
}

TEST_CASE("annealing the closed-form pair approaches the known optimum") {
    const auto fleet = ipoptest::closed_form_fleet();
    const AnnealerConfig cfg;
    const Allocation best = anneal(fleet, ipoptest::full_set(fleet), 300.0, cfg);
    CHECK_THAT(best.eta, WithinAbs(300.0 / 369.0, 1e-3));
}

TEST_CASE("the same seed reproduces the run bit for bit") {
    const auto fleet = ipoptest::random_quadratic_fleet(55, 3);
    const ActiveSet set = ipoptest::full_set(fleet);
    const double demand = ipoptest::spread_demands(fleet)[1];
    AnnealerConfig cfg;
    cfg.seed = 2024;
    const Allocation a = anneal(fleet, set, demand, cfg);
    const Allocation b = anneal(fleet, set, demand, cfg);
    REQUIRE(a.modules.size() == b.modules.size());
    CHECK(a.eta == b.eta);
    CHECK(a.total_p_in == b.total_p_in);
    for (std::size_t i = 0; i < a.modules.size(); ++i) {
        CHECK(a.modules[i].p_out == b.modules[i].p_out);
        CHECK(a.modules[i].current == b.modules[i].current);
    }
}

TEST_CASE("the result never falls below the random starting point") {
    const auto fleet = ipoptest::random_quadratic_fleet(91, 2);
    const ActiveSet set = ipoptest::full_set(fleet);
    const double demand = ipoptest::spread_demands(fleet)[3];
    AnnealerConfig cfg;
    cfg.seed = 5;
    Rng probe(cfg.seed);
    const Allocation start = random_feasible_allocation(set, demand, fleet, probe);
    const Allocation best = anneal(fleet, set, demand, cfg);
    CHECK(best.eta >= start.eta);
}

TEST_CASE("cooling is geometric and the observer sees every level") {
    const auto fleet = ipoptest::identical_fleet(2);
    AnnealerConfig cfg;
    std::vector<double> temperatures;
    std::vector<double> bests;
    int last_level = 0;
    const LevelObserver observer = [&](int level, double temperature, double best_eta) {
        CHECK(level == last_level + 1);
        last_level = level;
        temperatures.push_back(temperature);
        bests.push_back(best_eta);
    };
    (void)anneal(fleet, ipoptest::full_set(fleet), 400.0, cfg, std::nullopt, observer);

    // 1.0 * 0.95^n falls to 1e-4 after 180 steps.
    REQUIRE(temperatures.size() == 180);
    for (std::size_t i = 0; i + 1 < temperatures.size(); ++i) {
        CHECK(temperatures[i + 1] < temperatures[i]);
        CHECK_THAT(temperatures[i + 1] / temperatures[i], WithinRel(cfg.cooling, 1e-12));
        CHECK(bests[i + 1] >= bests[i]);
    }
    CHECK(temperatures.back() <= cfg.t_thres);
}

TEST_CASE("a warm start is honored and validated") {
    const auto fleet = ipoptest::closed_form_fleet();
    const ActiveSet set = ipoptest::full_set(fleet);
    const Allocation opt = solve_equal_incremental(set, 300.0, fleet);
    const AnnealerConfig cfg;

    const Allocation best = anneal(fleet, set, 300.0, cfg, opt);
    CHECK(best.eta >= opt.eta - 1e-12);

    Allocation wrong_total = opt;
    wrong_total.modules[0].p_out += 40.0;
    CHECK_THROWS_AS(anneal(fleet, set, 300.0, cfg, wrong_total), InputError);

    Allocation wrong_ids = opt;
    wrong_ids.modules.pop_back();
    CHECK_THROWS_AS(anneal(fleet, set, 300.0, cfg, wrong_ids), InputError);
}

TEST_CASE("infeasible demands fail before any iteration") {
    const auto fleet = ipoptest::closed_form_fleet();
    const ActiveSet set = ipoptest::full_set(fleet);
    const AnnealerConfig cfg;
    bool observed = false;
    const LevelObserver observer = [&](int, double, double) { observed = true; };
    CHECK_THROWS_AS(anneal(fleet, set, 5000.0, cfg, std::nullopt, observer),
                    FeasibilityError);
    CHECK_THROWS_WITH(anneal(fleet, set, 5000.0, cfg), ContainsSubstring("feasible range"));
    CHECK_FALSE(observed);
}

TEST_CASE("annealing keeps pace with a coarse grid oracle") {
    for (std::uint64_t seed = 301; seed <= 310; ++seed) {
        const auto fleet = ipoptest::random_quadratic_fleet(seed, 2 + seed % 2);
        const ActiveSet set = ipoptest::full_set(fleet);
        const auto demands = ipoptest::spread_demands(fleet, 3);
        for (double demand : demands) {
            AnnealerConfig cfg;
            cfg.seed = seed;
            const Allocation sa = anneal(fleet, set, demand, cfg);
            const OracleResult oracle = grid_search(set, demand, 0.5, fleet);
            CHECK(sa.eta >= oracle.best.eta - 1e-3);
        }
    }
}
