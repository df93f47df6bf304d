#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dsa/error.hpp"
#include "dsa/metrics.hpp"
#include "dsa/rng.hpp"

using namespace dsa;
using namespace dsa::metrics;

namespace {

RunTrace trace_of(std::initializer_list<std::pair<std::size_t, std::size_t>> windows) {
    RunTrace t;
    std::size_t tau = 1;
    for (auto [ok, feasible] : windows) t.windows.push_back(WindowStats{tau++, ok, feasible, 100, 100});
    return t;
}

} // namespace

TEST_CASE("window statistics") {
    SUBCASE("perfect window") {
        WindowStats w;
        for (int i = 0; i < 100; ++i) w = update(w, 1, true);
        CHECK(w.complete());
        CHECK(w.eta() == 1.0);
        CHECK(w.eta_bound() == 1.0);
        CHECK(relative_throughput(w) == 1.0);
    }
    SUBCASE("counts from a synthetic log") {
        WindowStats w;
        // 73 ACKs, 17 NACKs on feasible slots, 10 infeasible slots with a NACK.
        for (int i = 0; i < 73; ++i) w = update(w, 1, true);
        for (int i = 0; i < 17; ++i) w = update(w, -1, true);
        for (int i = 0; i < 10; ++i) w = update(w, -1, false);
        CHECK(w.successes == 73);
        CHECK(w.feasible_steps == 90);
        CHECK(relative_throughput(w) == 73.0 / 90.0);
        CHECK(w.eta() == 0.73);
        CHECK(w.eta_bound() == 0.9);
    }
    SUBCASE("idle slots count toward the length only") {
        WindowStats w;
        w = update(w, std::nullopt, true);
        w = update(w, 1, true);
        w = update(w, -1, true);
        CHECK(w.successes == 1);
        CHECK(w.feasible_steps == 2);
        CHECK(w.steps == 3);
        CHECK(relative_throughput(w) == 0.5);
    }
    SUBCASE("boundary values") {
        CHECK(relative_throughput(WindowStats{1, 40, 40, 100, 100}) == 1.0);
        CHECK(relative_throughput(WindowStats{1, 0, 40, 100, 100}) == 0.0);
        CHECK_THROWS_AS(relative_throughput(WindowStats{1, 0, 0, 100, 100}), NoFeasibleSteps);
        CHECK_FALSE(try_relative_throughput(WindowStats{1, 0, 0, 100, 100}));
    }
}

TEST_CASE("window accumulator") {
    WindowAccumulator acc(10);
    std::size_t closed = 0;
    for (int i = 0; i < 25; ++i)
        if (auto w = acc.record(i % 2 ? 1 : -1, true)) {
            ++closed;
            CHECK(w->tau == closed);
            CHECK(w->successes == 5);
        }
    CHECK(closed == 2);
    const auto all = acc.finish();
    REQUIRE(all.size() == 3);
    CHECK(all[2].tau == 3);
    CHECK(all[2].length == 5);
    CHECK(all[2].complete());
    CHECK(all[2].eta() == 2.0 / 5.0);
    CHECK_THROWS_AS(WindowAccumulator(0), InvalidArgument);
}

TEST_CASE("averaging replicas") {
    SUBCASE("identical traces") {
        const auto t = trace_of({{50, 100}, {70, 100}});
        const std::vector<RunTrace> ts{t, t, t};
        const auto a = average_runs(ts);
        REQUIRE(a.size() == 2);
        CHECK(a[0].rho_mean == 0.5);
        CHECK(a[1].rho_mean == doctest::Approx(0.7).epsilon(1e-15));
        CHECK(a[0].rho_std == 0.0);
        CHECK(a[0].n_replicas == 3);
    }
    SUBCASE("mean and population deviation") {
        const std::vector<RunTrace> ts{trace_of({{20, 100}}), trace_of({{40, 100}})};
        const auto a = average_runs(ts);
        CHECK(a[0].rho_mean == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(a[0].rho_std == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("undefined windows are left out") {
        const std::vector<RunTrace> ts{trace_of({{20, 100}, {0, 0}}), trace_of({{40, 100}, {0, 0}}),
                                       trace_of({{10, 0}, {0, 0}})};
        const auto a = average_runs(ts);
        CHECK(a[0].n_replicas == 2);
        CHECK(a[0].rho_mean == doctest::Approx(0.3));
        CHECK(a[1].n_replicas == 0);
        CHECK(std::isnan(a[1].rho_mean));
    }
    SUBCASE("length mismatch") {
        const std::vector<RunTrace> ts{trace_of({{20, 100}}), trace_of({{20, 100}, {1, 100}})};
        CHECK_THROWS_AS(average_runs(ts), LengthMismatch);
        CHECK(average_runs(std::vector<RunTrace>{}).empty());
    }
    SUBCASE("spread of Bernoulli replicas matches the binomial prediction") {
        Rng rng(1);
        const double p = 0.6;
        std::vector<RunTrace> ts(30);
        for (auto& t : ts) {
            WindowAccumulator acc(100);
            for (int i = 0; i < 5000; ++i) acc.record(uniform01(rng) < p ? 1 : -1, true);
            t.windows = acc.finish();
        }
        const auto a = average_runs(ts);
        const double predicted = std::sqrt(p * (1 - p) / 100.0);
        double mean_std = 0.0;
        for (const auto& pt : a) {
            CHECK(pt.rho_std <= 3.0 * predicted);
            CHECK(pt.rho_std >= predicted / 3.0);
            mean_std += pt.rho_std / static_cast<double>(a.size());
        }
        CHECK(std::abs(mean_std - predicted) <= 0.15 * predicted);
    }
}

TEST_CASE("tail statistics") {
    const auto t = trace_of({{10, 100}, {50, 100}, {70, 100}, {0, 0}});
    CHECK(final_mean_rho(t, 2) == 0.7);
    CHECK(final_mean_rho(t, 3) == doctest::Approx(0.6));
    CHECK(final_rho_variance(t, 3) == doctest::Approx(0.01));
    CHECK(final_mean_rho(t, 100) == doctest::Approx((0.1 + 0.5 + 0.7) / 3));
    CHECK_THROWS_AS(final_mean_rho(t, 1), NoFeasibleSteps);
}

TEST_CASE("CSV output") {
    auto t = trace_of({{73, 90}, {0, 0}});
    t.seed = 42;
    std::ostringstream w;
    write_window_csv(w, std::vector<RunTrace>{t});
    CHECK(w.str() == "replica,seed,tau,eta,eta_bound,rho\n"
                     "0,42,1,0.73,0.9,0.8111111111\n"
                     "0,42,2,0,0,nan\n");
    std::ostringstream a;
    write_aggregate_csv(a, average_runs(std::vector<RunTrace>{t}));
    CHECK(a.str() == "tau,rho_mean,rho_std,n_replicas\n"
                     "1,0.8111111111,0,1\n"
                     "2,nan,nan,0\n");
}
