#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dsa/error.hpp"
#include "dsa/oracle.hpp"

using namespace dsa;
using namespace dsa::oracle;

namespace {

ObsRecord rec(std::size_t l, int x0, int x1) { return ObsRecord{l, x0, x1}; }

// Independent walk over (true state, sensed subset) trajectories: for every
// start in the initial set, follow sense_for_state on the true state for a few
// slots and collect which states each observation pair was produced by.
std::map<std::tuple<std::size_t, int, int, std::size_t, int, int>, std::set<std::size_t>>
simulate_pairs(std::size_t n, std::size_t depth) {
    std::map<std::tuple<std::size_t, int, int, std::size_t, int, int>, std::set<std::size_t>> out;
    auto observe = [](std::size_t u, std::size_t l) {
        return rec(l, u == 2 * l ? -1 : 1, u == 2 * l + 1 ? -1 : 1);
    };
    struct Path {
        std::size_t u;
        ObsRecord x;
        std::size_t left;
    };
    std::vector<Path> stack;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t l = 0; l < n / 2; ++l)
            if (in_init_set(observe(u, l))) stack.push_back({u, observe(u, l), depth});
    while (!stack.empty()) {
        const Path p = stack.back();
        stack.pop_back();
        if (p.left == 0) continue;
        const std::size_t l = sense_for_state(p.u, n);
        for (std::size_t shift = 0; shift < 3; ++shift) {
            const std::size_t u2 = (p.u + shift) % n;
            const ObsRecord x2 = observe(u2, l);
            out[{p.x.subset, p.x.x0, p.x.x1, x2.subset, x2.x0, x2.x1}].insert(u2);
            stack.push_back({u2, x2, p.left - 1});
        }
    }
    return out;
}

} // namespace

TEST_CASE("state inference examples") {
    CHECK(infer_state(std::nullopt, rec(0, -1, 1), 4) == std::optional<std::size_t>(0));
    CHECK(infer_state(rec(1, 1, 1), rec(0, -1, 1), 4) == std::optional<std::size_t>(0));
    CHECK(infer_state(rec(0, -1, 1), rec(0, 1, 1), 4) == std::optional<std::size_t>(2));
    CHECK(infer_state(rec(1, -1, 1), rec(1, 1, 1), 6) == std::optional<std::size_t>(4));
    CHECK(infer_state(rec(1, 1, -1), rec(0, 1, 1), 4) == std::optional<std::size_t>(3));
    CHECK_FALSE(infer_state(std::nullopt, rec(0, 1, 1), 4));
    CHECK_FALSE(infer_state(rec(0, 1, -1), rec(0, 1, 1), 4));
    CHECK_THROWS_AS(infer_state(std::nullopt, rec(0, -1, 1), 5), UnsupportedGeometry);
}

TEST_CASE("optimal sensing examples") {
    CHECK(optimal_sense(std::nullopt, rec(0, 1, -1), 4) == 1);
    CHECK(optimal_sense(rec(1, 1, -1), rec(0, 1, 1), 4) == 0);
    CHECK(optimal_sense(std::nullopt, rec(0, -1, 1), 4) == 0);
    CHECK_THROWS_AS(optimal_sense(std::nullopt, rec(0, 1, 1), 4), UnknownState);
    // Left channel of a subset stays in it; right channel moves on to the next subset.
    for (std::size_t n : {4u, 6u, 8u})
        for (std::size_t u = 0; u < n; ++u) CHECK(sense_for_state(u, n) == (u % 2 == 0 ? u / 2 : ((u + 1) / 2) % (n / 2)));
}

TEST_CASE("optimal access and throughput") {
    const env::CyclicParams reference{4, 0.1, 0.1, 0.8};
    CHECK(optimal_access(3, reference) == 1);
    for (std::size_t u = 0; u < 4; ++u) CHECK(optimal_access(u, env::CyclicParams{4, 1, 0, 0}) == u);
    CHECK(optimal_access(0, env::CyclicParams{4, 1.0 / 3, 1.0 / 3, 1.0 / 3}) == 0);
    CHECK(optimal_access(1, env::CyclicParams{4, 0.2, 0.6, 0.2}) == 2);
    CHECK(optimal_throughput(reference) == 0.8);
    CHECK(optimal_throughput(env::CyclicParams{4, 1, 0, 0}) == 1.0);
}

TEST_CASE("value iteration") {
    SUBCASE("greedy policy equals the analytic access rule") {
        for (std::size_t n : {4u, 6u})
            for (int heavy = 0; heavy < 3; ++heavy)
                for (double gamma : {0.0, 0.8}) {
                    double pr[3] = {0.1, 0.1, 0.1};
                    pr[heavy] = 0.8;
                    const env::CyclicParams p{n, pr[0], pr[1], pr[2]};
                    const auto t = value_iteration(p, gamma);
                    for (std::size_t s = 0; s < n; ++s) CHECK(t.policy[s] == optimal_access(s, p));
                }
    }
    SUBCASE("gamma 0 gives the one-step values") {
        const env::CyclicParams p{4, 0.1, 0.1, 0.8};
        const auto t = value_iteration(p, 0.0);
        const auto P = transition_matrix(p);
        for (std::size_t s = 0; s < 4; ++s)
            for (std::size_t a = 0; a < 4; ++a) CHECK(t.q[s][a] == doctest::Approx(2 * P[s][a] - 1).epsilon(1e-14));
    }
    SUBCASE("uniform moves are symmetric and tie-broken to staying") {
        const env::CyclicParams p{4, 1.0 / 3, 1.0 / 3, 1.0 / 3};
        const auto t = value_iteration(p, 0.8);
        for (std::size_t s = 1; s < 4; ++s) CHECK(t.v[s] == doctest::Approx(t.v[0]).epsilon(1e-9));
        CHECK(t.q[0][0] == doctest::Approx(t.q[0][1]).epsilon(1e-12));
        CHECK(t.q[0][0] == doctest::Approx(t.q[0][2]).epsilon(1e-12));
        CHECK(t.policy[0] == 0);
    }
    SUBCASE("argmax does not depend on gamma") {
        Rng rng(1);
        for (int trial = 0; trial < 50; ++trial) {
            double a = uniform01(rng), b = uniform01(rng), c = uniform01(rng);
            const double s = a + b + c;
            const env::CyclicParams p{6, a / s, b / s, 1.0 - a / s - b / s};
            const auto base = value_iteration(p, 0.0).policy;
            for (double g : {0.3, 0.8, 0.95}) CHECK(value_iteration(p, g).policy == base);
        }
    }
    SUBCASE("fixed point satisfies the Bellman equation") {
        const env::CyclicParams p{6, 0.25, 0.15, 0.6};
        const auto t = value_iteration(p, 0.8, 1e-12);
        const auto P = transition_matrix(p);
        const double v_max = 2.0 * 0.6 - 1.0;
        for (std::size_t s = 0; s < 6; ++s) {
            double next = 0;
            for (std::size_t s2 = 0; s2 < 6; ++s2) next += P[s][s2] * t.v[s2];
            CHECK(t.v[s] == doctest::Approx(0.8 * next + v_max).epsilon(1e-9));
            // Geometric series of the per-step optimum.
            CHECK(t.v[s] == doctest::Approx(v_max / (1 - 0.8)).epsilon(1e-9));
        }
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(value_iteration(env::CyclicParams{4, 0.1, 0.1, 0.8}, 1.0), InvalidArgument);
        CHECK_THROWS_AS(value_iteration(env::CyclicParams{4, 0.1, 0.1, 0.8}, 0.5, 0.0), InvalidArgument);
    }
}

TEST_CASE("sensing table for four channels") {
    std::ostringstream out;
    print_sensing_table(out, sensing_table(4));
    const std::string expect = "X(t-1) | X(t) | U(t) | pi_s\n"
                               "don't care | [0,(-1,1)] | 0 | 0\n"
                               "don't care | [0,(1,-1)] | 1 | 1\n"
                               "don't care | [1,(-1,1)] | 2 | 1\n"
                               "don't care | [1,(1,-1)] | 3 | 0\n"
                               "[0,(-1,1)] | [0,(1,1)] | 2 | 1\n"
                               "[1,(-1,1)] | [1,(1,1)] | 0 | 0\n"
                               "[1,(1,-1)] | [0,(1,1)] | 3 | 0\n"
                               "[0,(1,-1)] | [1,(1,1)] | 1 | 1\n"
                               "[1,(1,1)] | [1,(1,1)] | 1 | 1\n"
                               "[0,(1,1)] | [0,(1,1)] | 3 | 0\n"
                               "[0,(1,1)] | [1,(1,1)] | 0 | 0\n"
                               "[1,(1,1)] | [0,(1,1)] | 2 | 1\n";
    CHECK(out.str() == expect);
}

TEST_CASE("inference is one-to-one on every reachable pair") {
    for (std::size_t n : {4u, 6u, 8u}) {
        CAPTURE(n);
        const auto sim = simulate_pairs(n, 2 * n);
        for (const auto& [key, states] : sim) {
            CHECK(states.size() == 1);
            const auto& [l0, a0, b0, l1, a1, b1] = key;
            const auto u = infer_state(rec(l0, a0, b0), rec(l1, a1, b1), n);
            REQUIRE(u);
            CHECK(*u == *states.begin());
        }
        // The library enumeration finds the same set of pairs.
        const auto pairs = enumerate_reachable_pairs(n);
        CHECK(pairs.size() == sim.size());
        for (const auto& p : pairs) {
            const auto it = sim.find({p.prev.subset, p.prev.x0, p.prev.x1, p.curr.subset, p.curr.x0, p.curr.x1});
            REQUIRE(it != sim.end());
            CHECK(*it->second.begin() == p.state);
        }
        // Two nodes per channel in the observation graph, three moves each.
        CHECK(pairs.size() == 6 * n);
        // Every table row is an inferable pair; every reachable pair with a
        // (1,1) observation appears in the table.
        const auto rows = sensing_table(n);
        CHECK(rows.size() == 3 * n);
        std::size_t both_busy = 0;
        for (const auto& p : pairs) both_busy += p.curr.x0 == 1 && p.curr.x1 == 1;
        std::size_t table_both_busy = 0;
        for (const auto& r : rows) {
            table_both_busy += r.prev.has_value();
            CHECK(r.sense == sense_for_state(r.state, n));
        }
        CHECK(table_both_busy == both_busy);
    }
}

TEST_CASE("oracle play") {
    const env::CyclicParams reference{4, 0.1, 0.1, 0.8};
    SUBCASE("starting inside the initial set needs no random slots") {
        auto rngs = RngStreams::from_seed(3);
        env::Environment e(reference, 2);
        OraclePolicy pol(reference);
        e.reset(rngs.env, 0);
        e.set_free_channel(1);
        const auto d = pol.decide(to_record(env::sense(e.state(), 0, 2), 0), rngs.explore);
        CHECK_FALSE(d.random);
        CHECK(d.inferred_state == std::optional<std::size_t>(1));
        CHECK(d.subset == 1);
        CHECK(d.channel == 3);
        CHECK(pol.random_steps() == 0);
    }
    SUBCASE("throughput approaches the most likely move probability") {
        auto rngs = RngStreams::from_seed(4);
        env::Environment e(reference, 2);
        const auto run = run_oracle(e, 100000, rngs);
        CHECK(run.inference_errors == 0);
        CHECK(std::abs(run.throughput() - 0.8) <= 0.01);
    }
    SUBCASE("hand-off is quick") {
        std::vector<std::size_t> waits;
        for (std::uint64_t seed = 0; seed < 101; ++seed) {
            auto rngs = RngStreams::from_seed(seed);
            env::Environment e(reference, 2);
            const auto run = run_oracle(e, 200, rngs);
            CHECK(run.inference_errors == 0);
            waits.push_back(run.handoff_steps);
        }
        std::nth_element(waits.begin(), waits.begin() + 50, waits.end());
        CHECK(waits[50] <= 10);
    }
    SUBCASE("works for six channels") {
        const env::CyclicParams p6{6, 0.2, 0.5, 0.3};
        auto rngs = RngStreams::from_seed(5);
        env::Environment e(p6, 2);
        const auto run = run_oracle(e, 50000, rngs);
        CHECK(run.inference_errors == 0);
        CHECK(std::abs(run.throughput() - 0.5) <= 0.015);
    }
    SUBCASE("rejects other scenarios") {
        auto rngs = RngStreams::from_seed(6);
        env::Environment e(env::LowestIndex{{4, env::reference_pu_chains()}}, 2);
        CHECK_THROWS_AS(run_oracle(e, 10, rngs), InvalidArgument);
    }
}
