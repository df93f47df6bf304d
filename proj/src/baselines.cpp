#include "dsa/baselines.hpp"

#include "dsa/error.hpp"

namespace dsa::baselines {

std::size_t random_access_action(std::size_t n_channels, Rng& rng) {
    if (n_channels == 0) throw InvalidArgument("need at least one channel");
    return uniform_index(rng, n_channels);
}

std::size_t fixed_sensing_schedule(BaselineKind kind, std::size_t t, std::size_t n_channels,
                                   std::size_t sensing_width, Rng& rng) {
    if (sensing_width == 0 || n_channels % sensing_width != 0)
        throw InvalidArgument("sensing width must divide the channel count");
    const std::size_t n_subsets = n_channels / sensing_width;
    switch (kind) {
    case BaselineKind::random_sensing:
        return uniform_index(rng, n_subsets);
    case BaselineKind::alternating_sensing:
        return t % n_subsets;
    case BaselineKind::random_access:
        break;
    }
    throw InvalidArgument("random access has no sensing schedule");
}

agent::SensingSchedule make_schedule(BaselineKind kind, std::size_t n_channels, std::size_t sensing_width) {
    if (kind == BaselineKind::random_access) throw InvalidArgument("random access has no sensing schedule");
    return [=](std::size_t t, Rng& rng) {
        return fixed_sensing_schedule(kind, t, n_channels, sensing_width, rng);
    };
}

agent::Learner access_only_agent(const agent::Hyperparams& hp, Rng& init_rng) {
    return agent::Learner(hp, hp.n_channels, init_rng);
}

agent::TrainingResult run_access_only(env::Environment& env, agent::Learner& learner, BaselineKind kind,
                                      std::size_t total_steps, RngStreams& rngs, const agent::Hooks& hooks,
                                      agent::RunOptions options) {
    const auto schedule = make_schedule(kind, env.n_channels(), env.sensing_width());
    options.schedule = &schedule;
    return agent::run_training(env, learner, total_steps, rngs, hooks, options);
}

agent::TrainingResult run_random_access(env::Environment& env, double p_access, std::size_t total_steps,
                                        RngStreams& rngs, std::size_t window, const agent::Hooks& hooks) {
    if (total_steps == 0) throw InvalidArgument("total_steps must be >= 1");
    agent::TrainingResult result;
    result.steps.reserve(total_steps);
    metrics::WindowAccumulator windows(window);
    env.reset(rngs.env, std::nullopt);
    for (std::size_t step = 1; step <= total_steps; ++step) {
        const bool transmit = p_access >= 1.0 || uniform01(rngs.transmit) < p_access;
        const std::size_t channel = random_access_action(env.n_channels(), rngs.explore);
        const auto res = env.step(std::nullopt, channel, transmit, rngs.env);
        agent::StepRecord rec;
        rec.reward = res.reward;
        rec.free_exists = res.diagnostics.free_exists;
        rec.action = static_cast<std::uint32_t>(channel);
        result.steps.push_back(rec);
        if (auto closed = windows.record(res.reward, res.diagnostics.free_exists); closed && hooks.on_window)
            hooks.on_window(*closed);
    }
    result.trace.windows = windows.finish();
    return result;
}

} // namespace dsa::baselines
