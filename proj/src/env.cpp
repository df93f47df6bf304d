#include "dsa/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsa/error.hpp"

namespace dsa::env {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

const FrameTraffic& traffic_of(const Scenario& scenario) {
    return std::visit(
        [](const auto& s) -> const FrameTraffic& {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CyclicParams>) {
                throw InvalidArgument("cyclic scenario has no frame traffic");
            } else {
                return s;
            }
        },
        scenario);
}

} // namespace

void CyclicParams::validate() const {
    if (n_channels < 4 || n_channels % 2 != 0)
        throw ValidationError("cyclic network needs an even channel count >= 4, got " +
                              std::to_string(n_channels));
    if (!is_probability(p_stay) || !is_probability(p_switch) || !is_probability(p_dswitch))
        throw ValidationError("cyclic transition probabilities must lie in [0,1]");
    if (std::abs(p_stay + p_switch + p_dswitch - 1.0) > 1e-12)
        throw ValidationError("p_stay + p_switch + p_dswitch must equal 1");
}

void PuChain::validate() const {
    if (end_prob.size() < 2)
        throw ValidationError("PU chain needs a maximal frame length of at least 1");
    for (double p : end_prob)
        if (!is_probability(p)) throw ValidationError("PU chain probabilities must lie in [0,1]");
    if (end_prob.back() != 1.0)
        throw ValidationError("PU chain must end its frame with probability 1 at the maximal length");
}

void FrameTraffic::validate() const {
    if (n_channels < 1) throw ValidationError("at least one channel is required");
    if (chains.size() > n_channels)
        throw ValidationError("more PUs (" + std::to_string(chains.size()) + ") than channels (" +
                              std::to_string(n_channels) + ")");
    for (const auto& c : chains) c.validate();
}

std::size_t channel_count(const Scenario& scenario) {
    return std::visit([](const auto& s) { return s.n_channels; }, scenario);
}

void validate(const Scenario& scenario) {
    std::visit([](const auto& s) { s.validate(); }, scenario);
}

std::vector<PuChain> reference_pu_chains() {
    return {
        PuChain{{0.1, 0.1, 0.15, 1.0}},
        PuChain{{0.2, 0.2, 0.1, 0.2, 1.0}},
        PuChain{{0.15, 0.18, 0.3, 0.1, 1.0}},
        PuChain{{0.28, 0.2, 0.02, 0.15, 0.01, 1.0}},
    };
}

std::size_t cyclic_transition(std::size_t u, const CyclicParams& params, Rng& rng) {
    const double x = uniform01(rng);
    std::size_t shift = 2;
    if (x < params.p_stay)
        shift = 0;
    else if (x < params.p_stay + params.p_switch)
        shift = 1;
    return (u + shift) % params.n_channels;
}

std::size_t pu_advance(const PuChain& chain, std::size_t m, Rng& rng) {
    if (m >= chain.max_frame_len()) return 0;
    return uniform01(rng) < chain.end_prob[m] ? 0 : m + 1;
}

Allocation allocate(const Scenario& scenario, const Allocation& prev_alloc, const PuState& pu_prev,
                    const PuState& pu_new) {
    const FrameTraffic& traffic = traffic_of(scenario);
    const std::size_t n_pu = traffic.chains.size();
    if (prev_alloc.size() != n_pu || pu_prev.size() != n_pu || pu_new.size() != n_pu)
        throw InvalidArgument("allocation and PU state sizes disagree with the scenario");

    Allocation next(n_pu);
    if (std::holds_alternative<FixedChannel>(scenario)) {
        for (std::size_t i = 0; i < n_pu; ++i) {
            if (pu_new[i] == 0) continue;
            if (i >= traffic.n_channels)
                throw AllocationOverflow("pu_" + std::to_string(i) + " has no dedicated channel");
            next[i] = i;
        }
        return next;
    }

    // Release finished frames, keep running ones, then hand out channels.
    std::vector<bool> taken(traffic.n_channels, false);
    for (std::size_t i = 0; i < n_pu; ++i) {
        if (pu_new[i] > 0 && pu_prev[i] > 0 && prev_alloc[i]) {
            next[i] = prev_alloc[i];
            taken[*prev_alloc[i]] = true;
        }
    }
    for (std::size_t i = 0; i < n_pu; ++i) {
        if (pu_new[i] == 0 || next[i]) continue;
        auto it = std::find(taken.begin(), taken.end(), false);
        if (it == taken.end())
            throw AllocationOverflow("no free channel for pu_" + std::to_string(i));
        const auto ch = static_cast<std::size_t>(it - taken.begin());
        *it = true;
        next[i] = ch;
    }
    return next;
}

Allocation flip_channels(const Allocation& alloc, std::size_t t, std::size_t n_channels) {
    if (t % 2 != 0) return alloc;
    Allocation flipped = alloc;
    for (auto& ch : flipped)
        if (ch) ch = n_channels - 1 - *ch;
    return flipped;
}

ChannelOccupancy occupancy_from_allocation(const Allocation& alloc, std::size_t n_channels) {
    ChannelOccupancy occ(n_channels, kFree);
    for (const auto& ch : alloc)
        if (ch) occ[*ch] = kBusy;
    return occ;
}

ChannelOccupancy cyclic_occupancy(std::size_t free_channel, std::size_t n_channels) {
    ChannelOccupancy occ(n_channels, kBusy);
    occ[free_channel] = kFree;
    return occ;
}

FullObservation sense(std::span<const std::int8_t> state, std::size_t subset, std::size_t width) {
    if (width == 0 || (subset + 1) * width > state.size())
        throw SubsetOutOfRange("sensing subset " + std::to_string(subset) + " out of range");
    FullObservation obs(state.size(), kNotSensed);
    std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(subset * width), width,
                obs.begin() + static_cast<std::ptrdiff_t>(subset * width));
    return obs;
}

Environment::Environment(Scenario scenario, std::size_t sensing_width)
    : scenario_(std::move(scenario)), n_channels_(channel_count(scenario_)), width_(sensing_width) {
    validate(scenario_);
    if (width_ == 0 || n_channels_ % width_ != 0)
        throw ValidationError("sensing width must divide the channel count");
}

FullObservation Environment::reset(Rng& rng, std::optional<std::size_t> initial_subset) {
    t_ = 1;
    if (const auto* cyc = std::get_if<CyclicParams>(&scenario_)) {
        free_channel_ = uniform_index(rng, cyc->n_channels);
        occupancy_ = cyclic_occupancy(free_channel_, n_channels_);
    } else {
        const auto n_pu = traffic_of(scenario_).chains.size();
        pu_.assign(n_pu, 0);
        alloc_.assign(n_pu, std::nullopt);
        occupancy_ = occupancy_from_allocation(alloc_, n_channels_);
    }
    return observe(initial_subset);
}

void Environment::set_free_channel(std::size_t u) {
    if (!std::holds_alternative<CyclicParams>(scenario_) || u >= n_channels_)
        throw InvalidArgument("set_free_channel requires a cyclic scenario and a valid channel");
    free_channel_ = u;
    occupancy_ = cyclic_occupancy(u, n_channels_);
}

FullObservation Environment::observe(std::optional<std::size_t> subset) {
    if (!subset) return FullObservation(n_channels_, kNotSensed);
    ++sense_calls_;
    return sense(occupancy_, *subset, width_);
}

void Environment::advance(Rng& rng) {
    ++t_;
    if (const auto* cyc = std::get_if<CyclicParams>(&scenario_)) {
        free_channel_ = cyclic_transition(free_channel_, *cyc, rng);
        occupancy_ = cyclic_occupancy(free_channel_, n_channels_);
        return;
    }
    const auto& chains = traffic_of(scenario_).chains;
    PuState next(pu_.size());
    for (std::size_t i = 0; i < pu_.size(); ++i) next[i] = pu_advance(chains[i], pu_[i], rng);
    alloc_ = allocate(scenario_, alloc_, pu_, next);
    if (std::holds_alternative<LowestIndexFlipping>(scenario_))
        alloc_ = flip_channels(alloc_, t_, n_channels_);
    pu_ = std::move(next);
    occupancy_ = occupancy_from_allocation(alloc_, n_channels_);
}

StepResult Environment::step(std::size_t action, bool transmit, Rng& rng) {
    if (action >= n_extended_actions())
        throw ActionOutOfRange("extended action " + std::to_string(action) + " out of range");
    return step(action / n_channels_, action % n_channels_, transmit, rng);
}

StepResult Environment::step(std::optional<std::size_t> subset, std::size_t channel, bool transmit,
                             Rng& rng) {
    if (channel >= n_channels_)
        throw ActionOutOfRange("access channel " + std::to_string(channel) + " out of range");
    if (subset && *subset >= n_subsets())
        throw SubsetOutOfRange("sensing subset " + std::to_string(*subset) + " out of range");

    advance(rng);

    StepResult result;
    if (transmit) result.reward = occupancy_[channel] == kFree ? 1 : -1;
    result.observation = observe(subset);
    result.diagnostics.free_exists =
        std::find(occupancy_.begin(), occupancy_.end(), kFree) != occupancy_.end();
    result.diagnostics.true_state = occupancy_;
    return result;
}

} // namespace dsa::env
