#include "dsa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>

#include "dsa/error.hpp"

namespace dsa::oracle {

namespace {

constexpr std::size_t kWidth = 2;

void check_geometry(std::size_t n_channels) {
    if (n_channels < 4 || n_channels % 2 != 0)
        throw UnsupportedGeometry("the cyclic oracle needs an even channel count >= 4, got " +
                                  std::to_string(n_channels));
}

std::size_t wrap(long long x, std::size_t n) {
    const auto m = static_cast<long long>(n);
    return static_cast<std::size_t>(((x % m) + m) % m);
}

ObsRecord observe_state(std::size_t u, std::size_t subset) {
    return ObsRecord{subset, u == kWidth * subset ? -1 : 1, u == kWidth * subset + 1 ? -1 : 1};
}

std::string format_record(const ObsRecord& x) {
    return "[" + std::to_string(x.subset) + ",(" + std::to_string(x.x0) + "," + std::to_string(x.x1) + ")]";
}

} // namespace

bool in_init_set(const ObsRecord& x) { return x.x0 == -1 || x.x1 == -1; }

ObsRecord to_record(const env::FullObservation& obs, std::size_t subset) {
    if (kWidth * subset + 1 >= obs.size()) throw SubsetOutOfRange("subset out of range");
    return ObsRecord{subset, obs[kWidth * subset], obs[kWidth * subset + 1]};
}

std::optional<std::size_t> infer_state(const std::optional<ObsRecord>& x_prev, const ObsRecord& x_curr,
                                       std::size_t n_channels) {
    check_geometry(n_channels);
    const std::size_t n_subsets = n_channels / kWidth;
    const std::size_t l = x_curr.subset;
    if (l >= n_subsets) return std::nullopt;
    const auto left = static_cast<long long>(kWidth * l);

    if (x_curr.x0 == -1 && x_curr.x1 == 1) return wrap(left, n_channels);
    if (x_curr.x0 == 1 && x_curr.x1 == -1) return wrap(left + 1, n_channels);
    if (x_curr.x0 != 1 || x_curr.x1 != 1 || !x_prev) return std::nullopt;

    // Both sensed channels busy: the previous observation tells whether the
    // free channel jumped past this subset or stayed just left of it.
    const ObsRecord& p = *x_prev;
    const std::size_t before = (l + n_subsets - 1) % n_subsets;
    const bool prev_left_free = p.x0 == -1 && p.x1 == 1;
    const bool prev_right_free = p.x0 == 1 && p.x1 == -1;
    const bool prev_none_free = p.x0 == 1 && p.x1 == 1;
    if ((p.subset == l && prev_left_free) || (p.subset == before && prev_none_free))
        return wrap(left + 2, n_channels);
    if ((p.subset == before && prev_right_free) || (p.subset == l && prev_none_free))
        return wrap(left - 1, n_channels);
    return std::nullopt;
}

std::size_t sense_for_state(std::size_t u, std::size_t n_channels) {
    check_geometry(n_channels);
    const std::size_t n_subsets = n_channels / kWidth;
    return ((u + 1) / kWidth) % n_subsets;
}

std::size_t optimal_sense(const std::optional<ObsRecord>& x_prev, const ObsRecord& x_curr,
                          std::size_t n_channels) {
    const auto u = infer_state(x_prev, x_curr, n_channels);
    if (!u) throw UnknownState("observation pair does not determine the free channel");
    return sense_for_state(*u, n_channels);
}

std::size_t optimal_access(std::size_t u, const env::CyclicParams& params) {
    const double probs[] = {params.p_stay, params.p_switch, params.p_dswitch};
    std::size_t shift = 0;
    for (std::size_t k = 1; k < 3; ++k)
        if (probs[k] > probs[shift]) shift = k;
    return (u + shift) % params.n_channels;
}

double optimal_throughput(const env::CyclicParams& params) {
    return std::max({params.p_stay, params.p_switch, params.p_dswitch});
}

std::vector<std::vector<double>> transition_matrix(const env::CyclicParams& params) {
    const std::size_t n = params.n_channels;
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
        p[s][s] += params.p_stay;
        p[s][(s + 1) % n] += params.p_switch;
        p[s][(s + 2) % n] += params.p_dswitch;
    }
    return p;
}

ValueTable value_iteration(const env::CyclicParams& params, double gamma, double tol) {
    params.validate();
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0,1)");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    const std::size_t n = params.n_channels;
    const auto p = transition_matrix(params);

    ValueTable table;
    table.v.assign(n, 0.0);
    table.q.assign(n, std::vector<double>(n, 0.0));

    auto backup = [&](const std::vector<double>& v) {
        for (std::size_t s = 0; s < n; ++s) {
            double expected_next = 0.0;
            for (std::size_t s2 = 0; s2 < n; ++s2) expected_next += p[s][s2] * v[s2];
            for (std::size_t a = 0; a < n; ++a) table.q[s][a] = gamma * expected_next + 2.0 * p[s][a] - 1.0;
        }
    };

    for (;;) {
        backup(table.v);
        ++table.iterations;
        double change = 0.0;
        std::vector<double> next(n);
        for (std::size_t s = 0; s < n; ++s) {
            next[s] = *std::max_element(table.q[s].begin(), table.q[s].end());
            change = std::max(change, std::abs(next[s] - table.v[s]));
        }
        table.v = std::move(next);
        if (change < tol) break;
    }
    backup(table.v);

    table.policy.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < n; ++a)
            if (table.q[s][a] > table.q[s][best]) best = a;
        table.policy[s] = best;
    }
    return table;
}

std::vector<TableRow> sensing_table(std::size_t n_channels) {
    check_geometry(n_channels);
    const std::size_t n_subsets = n_channels / kWidth;
    const ObsRecord left_free{0, -1, 1}, right_free{0, 1, -1}, none_free{0, 1, 1};
    auto at = [](ObsRecord x, std::size_t l) {
        x.subset = l;
        return x;
    };
    auto before = [&](std::size_t l) { return (l + n_subsets - 1) % n_subsets; };

    std::vector<std::pair<std::optional<ObsRecord>, ObsRecord>> pairs;
    for (std::size_t l = 0; l < n_subsets; ++l) {
        pairs.emplace_back(std::nullopt, at(left_free, l));
        pairs.emplace_back(std::nullopt, at(right_free, l));
    }
    for (std::size_t l = 0; l < n_subsets; ++l) pairs.emplace_back(at(left_free, l), at(none_free, l));
    for (std::size_t l = 0; l < n_subsets; ++l) pairs.emplace_back(at(right_free, before(l)), at(none_free, l));
    for (std::size_t l = n_subsets; l-- > 0;) pairs.emplace_back(at(none_free, l), at(none_free, l));
    for (std::size_t l = n_subsets; l-- > 0;) pairs.emplace_back(at(none_free, before(l)), at(none_free, l));

    std::vector<TableRow> rows;
    rows.reserve(pairs.size());
    for (const auto& [prev, curr] : pairs) {
        const auto u = infer_state(prev, curr, n_channels);
        if (!u) throw UnknownState("sensing table pair is not inferable");
        rows.push_back({prev, curr, *u, sense_for_state(*u, n_channels)});
    }
    return rows;
}

void print_sensing_table(std::ostream& out, const std::vector<TableRow>& rows) {
    out << "X(t-1) | X(t) | U(t) | pi_s\n";
    for (const auto& r : rows)
        out << (r.prev ? format_record(*r.prev) : std::string("don't care")) << " | " << format_record(r.curr)
            << " | " << r.state << " | " << r.sense << '\n';
}

std::vector<ReachablePair> enumerate_reachable_pairs(std::size_t n_channels) {
    check_geometry(n_channels);
    const std::size_t n_subsets = n_channels / kWidth;

    using Node = std::pair<std::size_t, ObsRecord>; // (true state, its observation)
    auto key = [](const Node& n) { return std::make_tuple(n.first, n.second.subset, n.second.x0, n.second.x1); };
    std::set<std::tuple<std::size_t, std::size_t, int, int>> seen;
    std::vector<Node> frontier;
    for (std::size_t u = 0; u < n_channels; ++u)
        for (std::size_t l = 0; l < n_subsets; ++l) {
            const auto x = observe_state(u, l);
            if (in_init_set(x) && seen.insert(key({u, x})).second) frontier.push_back({u, x});
        }

    std::map<std::tuple<std::size_t, int, int, std::size_t, int, int, std::size_t>, ReachablePair> pairs;
    while (!frontier.empty()) {
        const Node node = frontier.back();
        frontier.pop_back();
        const std::size_t l_next = sense_for_state(node.first, n_channels);
        for (std::size_t shift = 0; shift < 3; ++shift) {
            const std::size_t u_next = (node.first + shift) % n_channels;
            const ObsRecord x_next = observe_state(u_next, l_next);
            const ReachablePair rp{node.second, x_next, u_next};
            pairs.emplace(std::make_tuple(rp.prev.subset, rp.prev.x0, rp.prev.x1, rp.curr.subset, rp.curr.x0,
                                          rp.curr.x1, u_next),
                          rp);
            if (seen.insert(key({u_next, x_next})).second) frontier.push_back({u_next, x_next});
        }
    }
    std::vector<ReachablePair> out;
    out.reserve(pairs.size());
    for (auto& [k, v] : pairs) out.push_back(v);
    return out;
}

OraclePolicy::OraclePolicy(env::CyclicParams params) : params_(params) {
    params_.validate();
    check_geometry(params_.n_channels);
}

OraclePolicy::Decision OraclePolicy::decide(const ObsRecord& x_curr, Rng& rng) {
    const std::size_t n = params_.n_channels;
    std::optional<std::size_t> u;
    if (handed_off_) {
        u = infer_state(prev_, x_curr, n);
        if (!u) throw UnknownState("state inference failed after the hand-off");
    } else if (in_init_set(x_curr)) {
        u = infer_state(std::nullopt, x_curr, n);
        handed_off_ = true;
    }
    prev_ = x_curr;
    if (!u) {
        ++random_steps_;
        const std::size_t subset = uniform_index(rng, n / kWidth);
        const std::size_t channel = uniform_index(rng, n);
        return {subset, channel, true, std::nullopt};
    }
    return {sense_for_state(*u, n), optimal_access(*u, params_), false, u};
}

OracleRun run_oracle(env::Environment& env, std::size_t total_steps, RngStreams& rngs,
                     std::optional<std::size_t> initial_subset, std::size_t window) {
    const auto* params = std::get_if<env::CyclicParams>(&env.scenario());
    if (!params) throw InvalidArgument("the oracle runs only on the cyclic scenario");
    if (env.sensing_width() != kWidth) throw UnsupportedGeometry("the oracle needs sensing width 2");

    OraclePolicy policy(*params);
    OracleRun run;
    metrics::WindowAccumulator windows(window);
    std::size_t subset = initial_subset.value_or(uniform_index(rngs.explore, env.n_subsets()));
    auto obs = env.reset(rngs.env, subset);
    for (std::size_t step = 1; step <= total_steps; ++step) {
        const auto d = policy.decide(to_record(obs, subset), rngs.explore);
        if (d.inferred_state) {
            const auto& truth = env.state();
            if (truth[*d.inferred_state] != env::kFree) ++run.inference_errors;
        }
        const auto res = env.step(d.subset, d.channel, true, rngs.env);
        if (*res.reward == 1) ++run.successes;
        if (res.diagnostics.free_exists) ++run.feasible_steps;
        windows.record(res.reward, res.diagnostics.free_exists);
        obs = res.observation;
        subset = d.subset;
    }
    run.handoff_steps = policy.random_steps();
    run.trace.windows = windows.finish();
    return run;
}

} // namespace dsa::oracle
