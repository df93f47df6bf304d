#pragma once

// Optimal sensing and access for the cyclic network with sensing width 2:
// state inference from two consecutive observations, the sensing rule that
// keeps the state inferable, the greedy access rule, and a value-iteration
// solver for the fully observed access MDP used as an independent check.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dsa/env.hpp"
#include "dsa/metrics.hpp"
#include "dsa/rng.hpp"

namespace dsa::oracle {

// Outcome of sensing subset `subset` = channels (2l, 2l+1).
struct ObsRecord {
    std::size_t subset = 0;
    int x0 = 1;
    int x1 = 1;

    bool operator==(const ObsRecord&) const = default;
};

// Member of the initial set iff one of the two sensed channels is free.
bool in_init_set(const ObsRecord& x);

ObsRecord to_record(const env::FullObservation& obs, std::size_t subset);

// Free channel at time t, or nullopt when the pair does not determine it.
// Valid for pairs produced while following optimal_sense.
std::optional<std::size_t> infer_state(const std::optional<ObsRecord>& x_prev, const ObsRecord& x_curr,
                                       std::size_t n_channels);

// Subset to sense next when the free channel is u: the subset holding u if u
// is its left channel, otherwise the following subset.
std::size_t sense_for_state(std::size_t u, std::size_t n_channels);

// Throws UnknownState when the pair is not inferable.
std::size_t optimal_sense(const std::optional<ObsRecord>& x_prev, const ObsRecord& x_curr,
                          std::size_t n_channels);

// u shifted by the most likely move; ties go to the smaller shift.
std::size_t optimal_access(std::size_t u, const env::CyclicParams& params);

double optimal_throughput(const env::CyclicParams& params);

// Pr(s' | s) of the cyclic chain.
std::vector<std::vector<double>> transition_matrix(const env::CyclicParams& params);

struct ValueTable {
    std::vector<double> v;              // v*(s)
    std::vector<std::vector<double>> q; // q*(s, a)
    std::vector<std::size_t> policy;    // argmax_a q*(s, a), lowest index on ties
    std::size_t iterations = 0;
};

// Bellman iteration for q(s,a) = gamma * sum_s' P(s'|s) v(s') + 2 P(s'=a|s) - 1
// until the sup-norm change of v drops below tol.
ValueTable value_iteration(const env::CyclicParams& params, double gamma, double tol = 1e-10);

struct TableRow {
    std::optional<ObsRecord> prev; // nullopt = don't care
    ObsRecord curr;
    std::size_t state = 0;
    std::size_t sense = 0;
};

// Every inferable (X(t-1), X(t)) pair with its state and next sensing subset.
// For N = 4 the rows come out in the reference order.
std::vector<TableRow> sensing_table(std::size_t n_channels);

void print_sensing_table(std::ostream& out, const std::vector<TableRow>& rows);

struct ReachablePair {
    ObsRecord prev;
    ObsRecord curr;
    std::size_t state = 0;
};

// Brute-force enumeration, driven by the true state rather than by inference,
// of every consecutive observation pair reachable under sense_for_state from
// any start in the initial set. Does not call infer_state.
std::vector<ReachablePair> enumerate_reachable_pairs(std::size_t n_channels);

// Random sensing and access until the first observation in the initial set,
// then optimal_sense / optimal_access on the inferred state.
class OraclePolicy {
public:
    explicit OraclePolicy(env::CyclicParams params);

    struct Decision {
        std::size_t subset;
        std::size_t channel;
        bool random;
        std::optional<std::size_t> inferred_state;
    };

    Decision decide(const ObsRecord& x_curr, Rng& rng);
    bool handed_off() const { return handed_off_; }
    std::size_t random_steps() const { return random_steps_; }

private:
    env::CyclicParams params_;
    std::optional<ObsRecord> prev_;
    bool handed_off_ = false;
    std::size_t random_steps_ = 0;
};

struct OracleRun {
    metrics::RunTrace trace;
    std::size_t successes = 0;
    std::size_t feasible_steps = 0;
    std::size_t handoff_steps = 0;    // random slots before the hand-off
    std::size_t inference_errors = 0; // inferred state != true state after hand-off
    double throughput() const {
        return feasible_steps ? static_cast<double>(successes) / static_cast<double>(feasible_steps) : 0.0;
    }
};

// Plays OraclePolicy on a cyclic environment. `initial_subset` is the subset
// observed at t = 1 (uniform when nullopt).
OracleRun run_oracle(env::Environment& env, std::size_t total_steps, RngStreams& rngs,
                     std::optional<std::size_t> initial_subset = std::nullopt,
                     std::size_t window = metrics::kDefaultWindow);

} // namespace dsa::oracle
