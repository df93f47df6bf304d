#pragma once

// Experiment configuration: a flat `key = value` file, '#' starts a comment.
// See README.md for the list of keys and their defaults.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "dsa/agent.hpp"
#include "dsa/env.hpp"

namespace dsa::cli {

enum class PolicyKind { ddqsa, random_access, random_sensing, alternating };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);

struct ExperimentConfig {
    env::Scenario scenario = env::CyclicParams{};
    PolicyKind policy = PolicyKind::ddqsa;
    agent::Hyperparams hp;
    std::size_t total_steps = 300000;
    std::size_t n_replicas = 30;
    std::uint64_t base_seed = 1;
    std::filesystem::path output_dir = "out";
    std::size_t window = 100;
    std::size_t checkpoint_every = 100000;
    std::size_t threads = 1;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace dsa::cli
