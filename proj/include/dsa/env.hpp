#pragma once

// Time-slotted simulation of the primary network as seen by a single
// secondary user: channel occupancy dynamics, narrowband sensing, ACK/NACK.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dsa/rng.hpp"

namespace dsa::env {

inline constexpr std::int8_t kBusy = 1;
inline constexpr std::int8_t kFree = -1;
inline constexpr std::int8_t kNotSensed = 0;

// +1 busy, -1 free, one entry per channel.
using ChannelOccupancy = std::vector<std::int8_t>;
// +1 busy, -1 free, 0 not sensed.
using FullObservation = std::vector<std::int8_t>;

// Cyclic network: a single free channel drifts right by 0, 1 or 2 positions.
struct CyclicParams {
    std::size_t n_channels = 4;
    double p_stay = 0.0;
    double p_switch = 0.0;
    double p_dswitch = 1.0;

    void validate() const;
};

// Frame-length Markov chain of one PU. end_prob[j] is the probability of
// returning to idle from frame position j; end_prob[0] is the probability of
// staying idle. The last entry is always 1.
struct PuChain {
    std::vector<double> end_prob;

    std::size_t max_frame_len() const { return end_prob.size() - 1; }
    void validate() const;
};

// Per-PU frame position m_i, 0 meaning idle.
using PuState = std::vector<std::size_t>;
// Per-PU channel, empty while the PU is idle.
using Allocation = std::vector<std::optional<std::size_t>>;

struct FrameTraffic {
    std::size_t n_channels = 4;
    std::vector<PuChain> chains;

    void validate() const;
};

// Scenario 1: pu_i only ever transmits on ch_i.
struct FixedChannel : FrameTraffic {};
// Scenario 2: a new frame takes the lowest-index free channel and keeps it.
struct LowestIndex : FrameTraffic {};
// Scenario 3: as LowestIndex, with the channel map mirrored at every even slot.
struct LowestIndexFlipping : FrameTraffic {};

using Scenario = std::variant<CyclicParams, FixedChannel, LowestIndex, LowestIndexFlipping>;

std::size_t channel_count(const Scenario& scenario);
void validate(const Scenario& scenario);

// Reference frame chains for pu_0..pu_3.
std::vector<PuChain> reference_pu_chains();

std::size_t cyclic_transition(std::size_t u, const CyclicParams& params, Rng& rng);
std::size_t pu_advance(const PuChain& chain, std::size_t m, Rng& rng);

Allocation allocate(const Scenario& scenario, const Allocation& prev_alloc, const PuState& pu_prev,
                    const PuState& pu_new);
Allocation flip_channels(const Allocation& alloc, std::size_t t, std::size_t n_channels);

ChannelOccupancy occupancy_from_allocation(const Allocation& alloc, std::size_t n_channels);
ChannelOccupancy cyclic_occupancy(std::size_t free_channel, std::size_t n_channels);

FullObservation sense(std::span<const std::int8_t> state, std::size_t subset, std::size_t width);

// Ground truth, for metrics and tests. Agents never see it.
struct StepDiagnostics {
    bool free_exists = false;
    ChannelOccupancy true_state;
};

struct StepResult {
    FullObservation observation;
    std::optional<int> reward;
    StepDiagnostics diagnostics;
};

class Environment {
public:
    Environment(Scenario scenario, std::size_t sensing_width);

    // Starts a new run at t = 1 and returns the observation of the initial
    // state on `initial_subset` (all zeros when nullopt).
    FullObservation reset(Rng& rng, std::optional<std::size_t> initial_subset);

    // Extended action a = a_s * N + a_ac.
    StepResult step(std::size_t action, bool transmit, Rng& rng);
    // Sensing is skipped entirely when `subset` is nullopt.
    StepResult step(std::optional<std::size_t> subset, std::size_t channel, bool transmit, Rng& rng);

    std::size_t n_channels() const { return n_channels_; }
    std::size_t sensing_width() const { return width_; }
    std::size_t n_subsets() const { return n_channels_ / width_; }
    std::size_t n_extended_actions() const { return n_channels_ * n_subsets(); }
    std::size_t time() const { return t_; }
    const Scenario& scenario() const { return scenario_; }
    const ChannelOccupancy& state() const { return occupancy_; }
    const PuState& pu_state() const { return pu_; }
    const Allocation& allocation() const { return alloc_; }
    std::size_t sense_calls() const { return sense_calls_; }

    // Test hooks for engineered starts.
    void set_free_channel(std::size_t u);

private:
    FullObservation observe(std::optional<std::size_t> subset);
    void advance(Rng& rng);

    Scenario scenario_;
    std::size_t n_channels_;
    std::size_t width_;
    std::size_t t_ = 1;
    std::size_t free_channel_ = 0;
    PuState pu_;
    Allocation alloc_;
    ChannelOccupancy occupancy_;
    std::size_t sense_calls_ = 0;
};

} // namespace dsa::env
