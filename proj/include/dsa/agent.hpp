#pragma once

// DDQSA learner: history state, extended sensing+access actions, epsilon-greedy
// exploration, experience replay and double-DQN targets.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dsa/env.hpp"
#include "dsa/metrics.hpp"
#include "dsa/nn.hpp"
#include "dsa/rng.hpp"

namespace dsa::agent {

struct Hyperparams {
    double gamma = 0.8;
    double learning_rate = 1e-4;
    std::size_t replay_capacity = 30000;
    std::size_t target_sync = 20; // J, in training iterations
    std::size_t batch_size = 64;
    std::size_t history = 2; // H
    double p_access = 1.0;   // probability that the SU has data in a slot
    std::size_t n_channels = 4;
    std::size_t sensing_width = 2; // L
    std::vector<std::size_t> hidden{128, 128};

    void validate() const;
    std::size_t n_subsets() const { return n_channels / sensing_width; }
    std::size_t n_extended_actions() const { return n_channels * n_subsets(); }
    std::size_t input_dim() const { return n_channels * history; }
    std::vector<std::size_t> layer_dims(std::size_t n_actions) const;
};

// 1 / (1 + 0.01 t), t counting transmitting slots.
double epsilon(std::size_t transmit_steps);

struct SplitAction {
    std::size_t subset;
    std::size_t channel;
};

SplitAction decompose_action(std::size_t action, std::size_t n_channels, std::size_t sensing_width);

// Tabular Q-learning backup Q + alpha * (r + gamma * max_next - Q). With
// gamma = 0 it reduces to (1 - alpha) Q + alpha r.
double q_learning_update(double q, double reward, double max_next_q, double alpha, double gamma);

// Last H observations, oldest first. Slots before the first observation are zeros.
class HistoryObservation {
public:
    HistoryObservation(std::size_t n_channels, std::size_t length);

    void push(std::span<const std::int8_t> observation);
    std::span<const std::int8_t> values() const { return values_; }
    std::span<const std::int8_t> block(std::size_t i) const;
    std::size_t n_channels() const { return n_channels_; }
    std::size_t length() const { return length_; }

private:
    std::size_t n_channels_;
    std::size_t length_;
    std::vector<std::int8_t> values_;
};

struct Transition {
    std::vector<std::int8_t> obs;
    std::size_t action = 0;
    int reward = 0;
    std::vector<std::int8_t> next_obs;
};

struct Minibatch {
    nn::Matrix obs;
    nn::Matrix next_obs;
    std::vector<std::size_t> actions;
    std::vector<double> rewards;
};

// Fixed-capacity FIFO; the oldest transition is overwritten once full.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_dim);

    void push(const Transition& t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t obs_dim() const { return obs_dim_; }
    // i = 0 is the oldest stored transition.
    Transition at(std::size_t i) const;
    // Uniform sampling with replacement.
    void sample(std::size_t batch, Rng& rng, Minibatch& out) const;

private:
    std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

    std::size_t capacity_;
    std::size_t obs_dim_;
    std::size_t head_ = 0; // oldest entry
    std::size_t size_ = 0;
    std::vector<std::int8_t> obs_;
    std::vector<std::int8_t> next_obs_;
    std::vector<std::uint32_t> actions_;
    std::vector<std::int8_t> rewards_;
};

nn::Matrix to_input_row(std::span<const std::int8_t> obs);

// Lowest index among equal maxima.
std::size_t greedy_action(const nn::MlpParams& params, std::span<const std::int8_t> obs);

struct ActionChoice {
    std::size_t action;
    bool explored;
};

ActionChoice choose_action(const nn::MlpParams& params, std::span<const std::int8_t> obs, double eps,
                           Rng& rng);
std::size_t select_action(const nn::MlpParams& params, std::span<const std::int8_t> obs, double eps,
                          Rng& rng);

// y = r + gamma * Q(o', argmax_a' Q(o', a'; policy); target)
double ddqn_target(const nn::MlpParams& policy, const nn::MlpParams& target, double reward,
                   std::span<const std::int8_t> next_obs, double gamma);
std::vector<double> ddqn_targets(const nn::MlpParams& policy, const nn::MlpParams& target,
                                 std::span<const double> rewards, const nn::Matrix& next_obs,
                                 double gamma);

// Policy/target networks, optimizer state and replay memory of one agent.
class Learner {
public:
    Learner(const Hyperparams& hp, std::size_t n_actions, Rng& init_rng);
    Learner(const Hyperparams& hp, nn::MlpParams initial);

    const Hyperparams& hyperparams() const { return hp_; }
    const nn::MlpParams& policy() const { return policy_; }
    const nn::MlpParams& target() const { return target_; }
    const ReplayBuffer& replay() const { return replay_; }
    std::size_t n_actions() const { return policy_.output_dim(); }
    std::size_t training_steps() const { return training_steps_; }
    std::size_t transmit_steps() const { return transmit_steps_; }
    double last_loss() const { return last_loss_; }

    void count_transmit_step() { ++transmit_steps_; }

    // Pushes the transition and, once the buffer holds a full minibatch, runs
    // one Adam step on the policy net. Returns whether a step happened.
    bool store_and_train(const Transition& transition, Rng& replay_rng);

private:
    Hyperparams hp_;
    nn::MlpParams policy_;
    nn::MlpParams target_;
    nn::AdamState adam_;
    ReplayBuffer replay_;
    Minibatch batch_;
    std::size_t training_steps_ = 0;
    std::size_t transmit_steps_ = 0;
    double last_loss_ = 0.0;
};

// Subset sensed at slot t, for agents whose sensing is not learned.
using SensingSchedule = std::function<std::size_t(std::size_t t, Rng& rng)>;

struct StepRecord {
    std::optional<int> reward;
    bool free_exists = false;
    bool stored = false;
    std::uint32_t action = 0;
    std::uint32_t subset = 0;
};

struct Hooks {
    std::function<void(const metrics::WindowStats&)> on_window;
    std::size_t checkpoint_every = 0;
    std::function<void(std::size_t step, const Learner&)> on_checkpoint;
};

struct RunOptions {
    bool learn = true;
    std::optional<double> fixed_epsilon;
    std::size_t window = metrics::kDefaultWindow;
    std::size_t initial_subset = 0; // ignored when a schedule is given
    const SensingSchedule* schedule = nullptr;
};

struct TrainingResult {
    std::vector<StepRecord> steps;
    metrics::RunTrace trace;
    std::size_t stored_transitions = 0;
    std::size_t training_steps = 0;
};

// Runs the learner against the environment for `total_steps` slots. On idle
// slots (probability 1 - p_access) nothing is stored or trained, but the
// sensed outcome still enters the history.
TrainingResult run_training(env::Environment& env, Learner& learner, std::size_t total_steps,
                            RngStreams& rngs, const Hooks& hooks = {}, const RunOptions& options = {});

} // namespace dsa::agent
