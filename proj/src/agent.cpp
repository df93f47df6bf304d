#include "dsa/agent.hpp"

#include <algorithm>
#include <string>

#include "dsa/error.hpp"

namespace dsa::agent {

void Hyperparams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0,1)");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (batch_size == 0) throw ValidationError("batch_size must be positive");
    if (replay_capacity < batch_size) throw ValidationError("replay_capacity must be >= batch_size");
    if (target_sync == 0) throw ValidationError("target_sync must be positive");
    if (history == 0) throw ValidationError("history must be >= 1");
    if (!(p_access > 0.0 && p_access <= 1.0)) throw ValidationError("p_access must lie in (0,1]");
    if (n_channels == 0 || sensing_width == 0 || n_channels % sensing_width != 0)
        throw ValidationError("sensing_width must divide n_channels");
    for (auto h : hidden)
        if (h == 0) throw ValidationError("hidden layer widths must be positive");
}

std::vector<std::size_t> Hyperparams::layer_dims(std::size_t n_actions) const {
    std::vector<std::size_t> dims{input_dim()};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(n_actions);
    return dims;
}

double epsilon(std::size_t transmit_steps) {
    return 1.0 / (1.0 + 0.01 * static_cast<double>(transmit_steps));
}

SplitAction decompose_action(std::size_t action, std::size_t n_channels, std::size_t sensing_width) {
    if (n_channels == 0 || sensing_width == 0 || n_channels % sensing_width != 0)
        throw InvalidArgument("sensing width must divide the channel count");
    if (action >= n_channels * (n_channels / sensing_width))
        throw ActionOutOfRange("extended action " + std::to_string(action) + " out of range");
    return {action / n_channels, action % n_channels};
}

double q_learning_update(double q, double reward, double max_next_q, double alpha, double gamma) {
    return q + alpha * (reward + gamma * max_next_q - q);
}

HistoryObservation::HistoryObservation(std::size_t n_channels, std::size_t length)
    : n_channels_(n_channels), length_(length), values_(n_channels * length, env::kNotSensed) {
    if (n_channels == 0 || length == 0) throw InvalidArgument("history needs N >= 1 and H >= 1");
}

void HistoryObservation::push(std::span<const std::int8_t> observation) {
    if (observation.size() != n_channels_)
        throw ShapeMismatch("observation length " + std::to_string(observation.size()) +
                            " != channel count " + std::to_string(n_channels_));
    std::copy(values_.begin() + static_cast<std::ptrdiff_t>(n_channels_), values_.end(), values_.begin());
    std::copy(observation.begin(), observation.end(),
              values_.end() - static_cast<std::ptrdiff_t>(n_channels_));
}

std::span<const std::int8_t> HistoryObservation::block(std::size_t i) const {
    if (i >= length_) throw InvalidArgument("history block out of range");
    return std::span<const std::int8_t>(values_).subspan(i * n_channels_, n_channels_);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim)
    : capacity_(capacity),
      obs_dim_(obs_dim),
      obs_(capacity * obs_dim),
      next_obs_(capacity * obs_dim),
      actions_(capacity),
      rewards_(capacity) {
    if (capacity == 0) throw InvalidArgument("replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
    if (t.obs.size() != obs_dim_ || t.next_obs.size() != obs_dim_)
        throw ShapeMismatch("transition observation size does not match the replay buffer");
    std::size_t pos;
    if (size_ < capacity_) {
        pos = slot(size_);
        ++size_;
    } else {
        pos = head_;
        head_ = (head_ + 1) % capacity_;
    }
    std::copy(t.obs.begin(), t.obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(pos * obs_dim_));
    std::copy(t.next_obs.begin(), t.next_obs.end(),
              next_obs_.begin() + static_cast<std::ptrdiff_t>(pos * obs_dim_));
    actions_[pos] = static_cast<std::uint32_t>(t.action);
    rewards_[pos] = static_cast<std::int8_t>(t.reward);
}

Transition ReplayBuffer::at(std::size_t i) const {
    if (i >= size_) throw InvalidArgument("replay index out of range");
    const std::size_t pos = slot(i);
    const auto off = static_cast<std::ptrdiff_t>(pos * obs_dim_);
    const auto len = static_cast<std::ptrdiff_t>(obs_dim_);
    return Transition{{obs_.begin() + off, obs_.begin() + off + len},
                      actions_[pos],
                      rewards_[pos],
                      {next_obs_.begin() + off, next_obs_.begin() + off + len}};
}

void ReplayBuffer::sample(std::size_t batch, Rng& rng, Minibatch& out) const {
    if (size_ == 0) throw InvalidArgument("cannot sample from an empty replay buffer");
    const auto rows = static_cast<Eigen::Index>(batch);
    const auto cols = static_cast<Eigen::Index>(obs_dim_);
    out.obs.resize(rows, cols);
    out.next_obs.resize(rows, cols);
    out.actions.resize(batch);
    out.rewards.resize(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t pos = slot(uniform_index(rng, size_));
        const std::size_t off = pos * obs_dim_;
        const auto r = static_cast<Eigen::Index>(b);
        for (Eigen::Index c = 0; c < cols; ++c) {
            out.obs(r, c) = obs_[off + static_cast<std::size_t>(c)];
            out.next_obs(r, c) = next_obs_[off + static_cast<std::size_t>(c)];
        }
        out.actions[b] = actions_[pos];
        out.rewards[b] = rewards_[pos];
    }
}

nn::Matrix to_input_row(std::span<const std::int8_t> obs) {
    nn::Matrix row(1, static_cast<Eigen::Index>(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = obs[i];
    return row;
}

namespace {

std::size_t argmax_row(const nn::Matrix& q, Eigen::Index row) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < q.cols(); ++c)
        if (q(row, c) > q(row, best)) best = c;
    return static_cast<std::size_t>(best);
}

} // namespace

std::size_t greedy_action(const nn::MlpParams& params, std::span<const std::int8_t> obs) {
    return argmax_row(nn::predict(params, to_input_row(obs)), 0);
}

ActionChoice choose_action(const nn::MlpParams& params, std::span<const std::int8_t> obs, double eps,
                           Rng& rng) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("epsilon must lie in [0,1]");
    if (uniform01(rng) < eps) return {uniform_index(rng, params.output_dim()), true};
    return {greedy_action(params, obs), false};
}

std::size_t select_action(const nn::MlpParams& params, std::span<const std::int8_t> obs, double eps,
                          Rng& rng) {
    return choose_action(params, obs, eps, rng).action;
}

std::vector<double> ddqn_targets(const nn::MlpParams& policy, const nn::MlpParams& target,
                                 std::span<const double> rewards, const nn::Matrix& next_obs,
                                 double gamma) {
    std::vector<double> y(rewards.begin(), rewards.end());
    if (gamma == 0.0) return y;
    const nn::Matrix q_policy = nn::predict(policy, next_obs);
    const nn::Matrix q_target = nn::predict(target, next_obs);
    for (std::size_t b = 0; b < y.size(); ++b) {
        const auto row = static_cast<Eigen::Index>(b);
        const auto best = static_cast<Eigen::Index>(argmax_row(q_policy, row));
        y[b] += gamma * q_target(row, best);
    }
    return y;
}

double ddqn_target(const nn::MlpParams& policy, const nn::MlpParams& target, double reward,
                   std::span<const std::int8_t> next_obs, double gamma) {
    const double r[] = {reward};
    return ddqn_targets(policy, target, r, to_input_row(next_obs), gamma).front();
}

Learner::Learner(const Hyperparams& hp, std::size_t n_actions, Rng& init_rng)
    : Learner(hp, [&] {
          hp.validate();
          const auto dims = hp.layer_dims(n_actions);
          return nn::init_params(dims, init_rng);
      }()) {}

Learner::Learner(const Hyperparams& hp, nn::MlpParams initial)
    : hp_(hp),
      policy_(std::move(initial)),
      target_(nn::copy_params(policy_)),
      adam_(nn::AdamState::zeros_like(policy_)),
      replay_(hp.replay_capacity, hp.input_dim()) {
    hp_.validate();
    if (policy_.input_dim() != hp_.input_dim())
        throw ShapeMismatch("network input dim does not match N * H");
}

bool Learner::store_and_train(const Transition& transition, Rng& replay_rng) {
    if (transition.action >= n_actions())
        throw ActionOutOfRange("transition action " + std::to_string(transition.action) +
                               " out of range");
    replay_.push(transition);
    if (replay_.size() < hp_.batch_size) return false;

    replay_.sample(hp_.batch_size, replay_rng, batch_);
    const auto targets = ddqn_targets(policy_, target_, batch_.rewards, batch_.next_obs, hp_.gamma);
    auto fwd = nn::forward(policy_, batch_.obs);
    auto loss = nn::masked_mse_loss(fwd.q_values, batch_.actions, targets);
    const auto grads = nn::backward(policy_, fwd.cache, loss.output_grad);
    nn::adam_update(policy_, adam_, grads, hp_.learning_rate);
    last_loss_ = loss.loss;

    ++training_steps_;
    if (training_steps_ % hp_.target_sync == 0) target_ = nn::copy_params(policy_);
    return true;
}

TrainingResult run_training(env::Environment& env, Learner& learner, std::size_t total_steps,
                            RngStreams& rngs, const Hooks& hooks, const RunOptions& options) {
    if (total_steps == 0) throw InvalidArgument("total_steps must be >= 1");
    const auto& hp = learner.hyperparams();
    if (env.n_channels() != hp.n_channels || env.sensing_width() != hp.sensing_width)
        throw ShapeMismatch("environment geometry does not match the hyperparameters");
    const bool external = options.schedule != nullptr;
    const std::size_t expected_actions = external ? hp.n_channels : hp.n_extended_actions();
    if (learner.n_actions() != expected_actions)
        throw ShapeMismatch("network output dim does not match the action space");

    TrainingResult result;
    result.steps.reserve(total_steps);
    metrics::WindowAccumulator windows(options.window);

    const std::size_t first_subset =
        external ? (*options.schedule)(1, rngs.explore) : options.initial_subset;
    HistoryObservation history(hp.n_channels, hp.history);
    history.push(env.reset(rngs.env, first_subset));

    std::vector<std::int8_t> prev;
    for (std::size_t step = 1; step <= total_steps; ++step) {
        const bool transmit = hp.p_access >= 1.0 || uniform01(rngs.transmit) < hp.p_access;
        if (transmit) learner.count_transmit_step();
        const double eps = options.fixed_epsilon.value_or(epsilon(learner.transmit_steps()));
        const std::size_t action = select_action(learner.policy(), history.values(), eps, rngs.explore);

        SplitAction split{};
        if (external) {
            split = {(*options.schedule)(env.time() + 1, rngs.explore), action};
        } else {
            split = decompose_action(action, hp.n_channels, hp.sensing_width);
        }
        const auto res = env.step(split.subset, split.channel, transmit, rngs.env);

        prev.assign(history.values().begin(), history.values().end());
        history.push(res.observation);

        StepRecord rec;
        rec.reward = res.reward;
        rec.free_exists = res.diagnostics.free_exists;
        rec.action = static_cast<std::uint32_t>(action);
        rec.subset = static_cast<std::uint32_t>(split.subset);
        if (transmit && options.learn) {
            Transition tr{prev, action, *res.reward, {history.values().begin(), history.values().end()}};
            learner.store_and_train(tr, rngs.replay);
            rec.stored = true;
            ++result.stored_transitions;
        }
        result.steps.push_back(rec);

        if (auto closed = windows.record(res.reward, res.diagnostics.free_exists); closed && hooks.on_window)
            hooks.on_window(*closed);
        if (hooks.on_checkpoint && hooks.checkpoint_every > 0 && step % hooks.checkpoint_every == 0)
            hooks.on_checkpoint(step, learner);
    }
    result.trace.windows = windows.finish();
    result.training_steps = learner.training_steps();
    return result;
}

} // namespace dsa::agent
