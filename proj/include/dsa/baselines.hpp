#pragma once

// Reference policies: random access without sensing, and access-only DDQN
// learners whose sensing follows a fixed schedule.

#include <cstddef>
#include <string_view>

#include "dsa/agent.hpp"

namespace dsa::baselines {

enum class BaselineKind { random_access, random_sensing, alternating_sensing };

std::size_t random_access_action(std::size_t n_channels, Rng& rng);

// Subset sensed at slot t (t >= 1). Alternating visits t mod (N/L).
std::size_t fixed_sensing_schedule(BaselineKind kind, std::size_t t, std::size_t n_channels,
                                   std::size_t sensing_width, Rng& rng);

agent::SensingSchedule make_schedule(BaselineKind kind, std::size_t n_channels, std::size_t sensing_width);

// Same learner as DDQSA, but with one output per channel.
agent::Learner access_only_agent(const agent::Hyperparams& hp, Rng& init_rng);

// Trains an access-only agent under the given sensing schedule.
agent::TrainingResult run_access_only(env::Environment& env, agent::Learner& learner, BaselineKind kind,
                                      std::size_t total_steps, RngStreams& rngs,
                                      const agent::Hooks& hooks = {}, agent::RunOptions options = {});

// Uniform channel choice every transmitting slot; the environment is never sensed.
agent::TrainingResult run_random_access(env::Environment& env, double p_access, std::size_t total_steps,
                                        RngStreams& rngs, std::size_t window = metrics::kDefaultWindow,
                                        const agent::Hooks& hooks = {});

} // namespace dsa::baselines
