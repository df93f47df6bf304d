#pragma once

// Replica fan-out, CSV emission and checkpointing for one experiment config.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dsa/config.hpp"
#include "dsa/metrics.hpp"
#include "dsa/nn.hpp"

namespace dsa::cli {

struct ReplicaResult {
    metrics::RunTrace trace;
    std::optional<nn::MlpParams> final_params; // empty for random access
    std::size_t stored_transitions = 0;
};

env::Environment make_environment(const ExperimentConfig& cfg);

// Runs replica k with seed base_seed + k. When `checkpoint_path` is set the
// policy network is saved there every checkpoint_every slots and at the end.
ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t replica,
                          const std::optional<std::filesystem::path>& checkpoint_path = std::nullopt);

// Runs all replicas (on up to cfg.threads workers) without touching the disk.
std::vector<ReplicaResult> run_replicas(const ExperimentConfig& cfg);

struct ExperimentOutputs {
    std::filesystem::path windows_csv;
    std::filesystem::path aggregate_csv;
    std::vector<std::filesystem::path> checkpoints;
    std::vector<metrics::RunTrace> traces;
    std::vector<metrics::AggregatePoint> aggregate;
};

// Runs every replica and writes windows.csv, aggregate.csv and
// replica_<k>.ckpt (learning policies only) into cfg.output_dir.
ExperimentOutputs run_experiment(const ExperimentConfig& cfg);

struct EvalResult {
    metrics::RunTrace trace;
    std::size_t successes = 0;
    std::size_t feasible_steps = 0;
    double rho() const;
};

// Greedy play of a frozen network, no exploration and no training.
EvalResult evaluate_policy(const ExperimentConfig& cfg, const nn::MlpParams& params, std::size_t steps,
                           std::uint64_t seed);

} // namespace dsa::cli
