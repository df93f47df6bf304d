#include "dsa/experiment.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "dsa/baselines.hpp"
#include "dsa/checkpoint.hpp"
#include "dsa/error.hpp"

namespace dsa::cli {

namespace {

baselines::BaselineKind baseline_of(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::random_sensing: return baselines::BaselineKind::random_sensing;
    case PolicyKind::alternating: return baselines::BaselineKind::alternating_sensing;
    case PolicyKind::random_access: return baselines::BaselineKind::random_access;
    case PolicyKind::ddqsa: break;
    }
    throw InvalidArgument("ddqsa is not a baseline");
}

std::size_t n_actions(const ExperimentConfig& cfg) {
    return cfg.policy == PolicyKind::ddqsa ? cfg.hp.n_extended_actions() : cfg.hp.n_channels;
}

} // namespace

env::Environment make_environment(const ExperimentConfig& cfg) {
    return env::Environment(cfg.scenario, cfg.hp.sensing_width);
}

ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t replica,
                          const std::optional<std::filesystem::path>& checkpoint_path) {
    cfg.validate();
    const std::uint64_t seed = cfg.base_seed + replica;
    auto rngs = RngStreams::from_seed(seed);
    auto env = make_environment(cfg);

    agent::Hooks hooks;
    hooks.on_window = [&](const metrics::WindowStats& w) {
        if (w.tau % 1000 == 0)
            spdlog::debug("replica {} tau {} eta {:.3f} eta_bound {:.3f}", replica, w.tau, w.eta(), w.eta_bound());
    };

    ReplicaResult out;
    if (cfg.policy == PolicyKind::random_access) {
        auto res = baselines::run_random_access(env, cfg.hp.p_access, cfg.total_steps, rngs, cfg.window, hooks);
        out.trace = std::move(res.trace);
        out.trace.seed = seed;
        return out;
    }

    agent::Learner learner(cfg.hp, n_actions(cfg), rngs.init);
    if (checkpoint_path && cfg.checkpoint_every > 0) {
        hooks.checkpoint_every = cfg.checkpoint_every;
        hooks.on_checkpoint = [&](std::size_t step, const agent::Learner& l) {
            nn::save_checkpoint(*checkpoint_path, l.policy());
            spdlog::info("replica {} step {}: checkpoint written", replica, step);
        };
    }
    agent::RunOptions options;
    options.window = cfg.window;
    agent::TrainingResult res;
    if (cfg.policy == PolicyKind::ddqsa)
        res = agent::run_training(env, learner, cfg.total_steps, rngs, hooks, options);
    else
        res = baselines::run_access_only(env, learner, baseline_of(cfg.policy), cfg.total_steps, rngs, hooks,
                                         options);
    if (checkpoint_path) nn::save_checkpoint(*checkpoint_path, learner.policy());
    out.trace = std::move(res.trace);
    out.trace.seed = seed;
    out.final_params = learner.policy();
    out.stored_transitions = res.stored_transitions;
    return out;
}

namespace {

std::vector<ReplicaResult> run_all(const ExperimentConfig& cfg,
                                   const std::function<std::optional<std::filesystem::path>(std::size_t)>& ckpt) {
    cfg.validate();
    std::vector<ReplicaResult> results(cfg.n_replicas);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < cfg.n_replicas; k = next++) {
            try {
                spdlog::info("replica {} (seed {}) started", k, cfg.base_seed + k);
                results[k] = run_replica(cfg, k, ckpt(k));
                spdlog::info("replica {} finished", k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(cfg.threads, cfg.n_replicas);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

} // namespace

std::vector<ReplicaResult> run_replicas(const ExperimentConfig& cfg) {
    return run_all(cfg, [](std::size_t) { return std::nullopt; });
}

ExperimentOutputs run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create " + cfg.output_dir.string() + ": " + ec.message());

    const bool learns = cfg.policy != PolicyKind::random_access;
    auto ckpt_path = [&](std::size_t k) -> std::optional<std::filesystem::path> {
        if (!learns) return std::nullopt;
        return cfg.output_dir / ("replica_" + std::to_string(k) + ".ckpt");
    };
    auto results = run_all(cfg, ckpt_path);

    ExperimentOutputs out;
    for (std::size_t k = 0; k < results.size(); ++k) {
        out.traces.push_back(results[k].trace);
        if (learns) out.checkpoints.push_back(*ckpt_path(k));
    }
    out.aggregate = metrics::average_runs(out.traces);

    out.windows_csv = cfg.output_dir / "windows.csv";
    out.aggregate_csv = cfg.output_dir / "aggregate.csv";
    std::ostringstream windows, aggregate;
    metrics::write_window_csv(windows, out.traces);
    metrics::write_aggregate_csv(aggregate, out.aggregate);
    nn::write_file_atomic(out.windows_csv, windows.str());
    nn::write_file_atomic(out.aggregate_csv, aggregate.str());
    return out;
}

double EvalResult::rho() const {
    if (feasible_steps == 0) throw NoFeasibleSteps("evaluation saw no feasible slot");
    return static_cast<double>(successes) / static_cast<double>(feasible_steps);
}

EvalResult evaluate_policy(const ExperimentConfig& cfg, const nn::MlpParams& params, std::size_t steps,
                           std::uint64_t seed) {
    cfg.validate();
    if (cfg.policy == PolicyKind::random_access)
        throw InvalidArgument("random access has no network to evaluate");
    if (params.input_dim() != cfg.hp.input_dim() || params.output_dim() != n_actions(cfg))
        throw ShapeMismatch("checkpoint dimensions do not match the config");

    auto rngs = RngStreams::from_seed(seed);
    auto env = make_environment(cfg);
    agent::Learner learner(cfg.hp, params);
    agent::RunOptions options;
    options.learn = false;
    options.fixed_epsilon = 0.0;
    options.window = cfg.window;
    agent::TrainingResult res;
    if (cfg.policy == PolicyKind::ddqsa)
        res = agent::run_training(env, learner, steps, rngs, {}, options);
    else
        res = baselines::run_access_only(env, learner, baseline_of(cfg.policy), steps, rngs, {}, options);

    EvalResult out;
    for (const auto& s : res.steps) {
        if (s.reward && *s.reward == 1) ++out.successes;
        if (s.reward && s.free_exists) ++out.feasible_steps;
    }
    out.trace = std::move(res.trace);
    out.trace.seed = seed;
    return out;
}

} // namespace dsa::cli
