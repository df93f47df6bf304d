// dsa_lab: train DDQSA or a baseline, inspect the cyclic oracle, or evaluate
// a saved policy network.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "dsa/checkpoint.hpp"
#include "dsa/error.hpp"
#include "dsa/experiment.hpp"
#include "dsa/oracle.hpp"

namespace {

void configure_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("DSA_LOG")) {
        const auto parsed = spdlog::level::from_str(level);
        // from_str maps unknown names to "off"; only honor it when asked for.
        if (parsed != spdlog::level::off || std::string(level) == "off") spdlog::set_level(parsed);
    }
}

int run_oracle(std::size_t n, double p_stay, double p_switch, double p_dswitch) {
    dsa::env::CyclicParams params{n, p_stay, p_switch, p_dswitch};
    params.validate();
    dsa::oracle::print_sensing_table(std::cout, dsa::oracle::sensing_table(n));
    std::cout << "P_max = " << dsa::oracle::optimal_throughput(params) << '\n';
    std::cout << "optimal access:";
    for (std::size_t u = 0; u < n; ++u) std::cout << ' ' << u << "->" << dsa::oracle::optimal_access(u, params);
    std::cout << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Joint sensing and access learning for dynamic spectrum access"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "Run an experiment from a config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    std::optional<std::string> out_dir;
    train->add_option("--config", config_path, "Config file")->required();
    train->add_option("--seed", seed, "Base seed (replica k uses seed + k)");
    train->add_option("--replicas", replicas, "Number of replicas");
    train->add_option("--out", out_dir, "Output directory");

    auto* oracle = app.add_subcommand("oracle", "Print the optimal sensing table for the cyclic network");
    std::size_t n = 4;
    double p_stay = 0.1, p_switch = 0.1, p_dswitch = 0.8;
    std::size_t sensing_width = 2;
    oracle->add_option("--n", n, "Number of channels (even)")->capture_default_str();
    oracle->add_option("--p-stay", p_stay)->capture_default_str();
    oracle->add_option("--p-switch", p_switch)->capture_default_str();
    oracle->add_option("--p-dswitch", p_dswitch)->capture_default_str();
    oracle->add_option("--sensing-width", sensing_width, "Only 2 is supported")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Throughput of a frozen policy network");
    std::string ckpt_path, eval_config;
    std::size_t steps = 100000;
    std::uint64_t eval_seed = 12345;
    eval->add_option("--checkpoint", ckpt_path)->required();
    eval->add_option("--config", eval_config)->required();
    eval->add_option("--steps", steps)->capture_default_str();
    eval->add_option("--seed", eval_seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            auto cfg = dsa::cli::load_config(config_path);
            if (seed) cfg.base_seed = *seed;
            if (replicas) cfg.n_replicas = *replicas;
            if (out_dir) cfg.output_dir = *out_dir;
            cfg.validate();
            const auto out = dsa::cli::run_experiment(cfg);
            double tail = 0.0;
            std::size_t defined = 0;
            const std::size_t from = out.aggregate.size() > 100 ? out.aggregate.size() - 100 : 0;
            for (std::size_t i = from; i < out.aggregate.size(); ++i)
                if (out.aggregate[i].n_replicas > 0) {
                    tail += out.aggregate[i].rho_mean;
                    ++defined;
                }
            std::cout << "policy " << dsa::cli::to_string(cfg.policy) << ", " << cfg.n_replicas << " replicas x "
                      << cfg.total_steps << " steps\n";
            if (defined) std::cout << "mean rho over the final " << defined << " windows: " << tail / defined << '\n';
            std::cout << "wrote " << out.windows_csv.string() << " and " << out.aggregate_csv.string() << '\n';
            return 0;
        }
        if (*oracle) {
            if (sensing_width != 2) throw dsa::UnsupportedGeometry("the oracle supports sensing width 2 only");
            if (n % 2 != 0) throw dsa::UnsupportedGeometry("the oracle needs an even channel count");
            return run_oracle(n, p_stay, p_switch, p_dswitch);
        }
        if (*eval) {
            const auto cfg = dsa::cli::load_config(eval_config);
            const auto params = dsa::nn::load_checkpoint(ckpt_path);
            const auto res = dsa::cli::evaluate_policy(cfg, params, steps, eval_seed);
            std::cout << "rho = " << res.rho() << " (" << res.successes << " ACKs over " << res.feasible_steps
                      << " feasible slots)\n";
            return 0;
        }
    } catch (const dsa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
