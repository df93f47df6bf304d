#include <doctest.h>

#include <cmath>

#include "dsa/baselines.hpp"
#include "dsa/error.hpp"

using namespace dsa;
using namespace dsa::baselines;

TEST_CASE("random access is uniform") {
    Rng rng(1);
    std::vector<std::size_t> counts(4, 0);
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) ++counts[random_access_action(4, rng)];
    for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / n - 0.25) <= 0.01);
    CHECK_THROWS_AS(random_access_action(0, rng), InvalidArgument);
}

TEST_CASE("sensing schedules") {
    Rng rng(2);
    SUBCASE("alternating, two subsets") {
        std::vector<std::size_t> seen;
        for (std::size_t t = 1; t <= 4; ++t)
            seen.push_back(fixed_sensing_schedule(BaselineKind::alternating_sensing, t, 4, 2, rng));
        CHECK(seen == std::vector<std::size_t>{1, 0, 1, 0});
    }
    SUBCASE("alternating, four subsets") {
        for (std::size_t t = 1; t <= 12; ++t)
            CHECK(fixed_sensing_schedule(BaselineKind::alternating_sensing, t, 8, 2, rng) == t % 4);
    }
    SUBCASE("random sensing is uniform") {
        std::size_t ones = 0;
        const std::size_t n = 100000;
        for (std::size_t t = 1; t <= n; ++t) ones += fixed_sensing_schedule(BaselineKind::random_sensing, t, 4, 2, rng);
        CHECK(std::abs(static_cast<double>(ones) / n - 0.5) <= 0.01);
    }
    SUBCASE("random access has no schedule") {
        CHECK_THROWS_AS(fixed_sensing_schedule(BaselineKind::random_access, 1, 4, 2, rng), InvalidArgument);
        CHECK_THROWS_AS(make_schedule(BaselineKind::random_access, 4, 2), InvalidArgument);
    }
}

TEST_CASE("access-only agents have one output per channel") {
    agent::Hyperparams hp;
    Rng rng(3);
    CHECK(access_only_agent(hp, rng).n_actions() == 4);
    CHECK(agent::Learner(hp, hp.n_extended_actions(), rng).n_actions() == 8);
}

TEST_CASE("access-only agent follows its schedule") {
    agent::Hyperparams hp;
    hp.hidden = {8};
    hp.batch_size = 4;
    hp.replay_capacity = 100;
    auto rngs = RngStreams::from_seed(4);
    env::Environment e(env::CyclicParams{4, 0.1, 0.1, 0.8}, 2);
    auto learner = access_only_agent(hp, rngs.init);
    const auto res = run_access_only(e, learner, BaselineKind::alternating_sensing, 50, rngs);
    REQUIRE(res.steps.size() == 50);
    // Slot t = step + 1 senses subset (step + 1) mod 2.
    for (std::size_t i = 0; i < res.steps.size(); ++i) {
        CHECK(res.steps[i].subset == (i + 2) % 2);
        CHECK(res.steps[i].action < 4);
    }
}

TEST_CASE("random access never senses and reaches the uniform rate") {
    auto rngs = RngStreams::from_seed(5);
    env::Environment e(env::CyclicParams{4, 0.1, 0.1, 0.8}, 2);
    const auto res = run_random_access(e, 1.0, 100000, rngs);
    CHECK(e.sense_calls() == 0);
    std::size_t ok = 0, feasible = 0;
    for (const auto& s : res.steps) {
        ok += s.reward && *s.reward == 1;
        feasible += s.free_exists;
    }
    CHECK(feasible == 100000);
    CHECK(std::abs(static_cast<double>(ok) / feasible - 0.25) <= 0.01);
    CHECK(res.trace.windows.size() == 1000);
}

TEST_CASE("random access with idle slots") {
    auto rngs = RngStreams::from_seed(6);
    env::Environment e(env::CyclicParams{4, 0.1, 0.1, 0.8}, 2);
    const auto res = run_random_access(e, 0.5, 4000, rngs);
    std::size_t sent = 0;
    for (const auto& s : res.steps) sent += s.reward.has_value();
    CHECK(std::abs(static_cast<double>(sent) - 2000.0) <= 3 * std::sqrt(1000.0));
    CHECK_THROWS_AS(run_random_access(e, 1.0, 0, rngs), InvalidArgument);
}
