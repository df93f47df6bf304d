#pragma once

// Windowed throughput bookkeeping: eta (ACK rate), eta_bound (rate of
// transmitting slots with at least one free channel) and their ratio rho.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace dsa::metrics {

inline constexpr std::size_t kDefaultWindow = 100;

struct WindowStats {
    std::size_t tau = 1; // 1-based window index
    std::size_t successes = 0;
    std::size_t feasible_steps = 0;
    std::size_t steps = 0; // slots recorded so far; equals `length` once closed
    std::size_t length = kDefaultWindow;

    double eta() const { return static_cast<double>(successes) / static_cast<double>(length); }
    double eta_bound() const {
        return static_cast<double>(feasible_steps) / static_cast<double>(length);
    }
    bool complete() const { return steps >= length; }
};

// `reward` is empty on idle slots; those count toward the window length only.
WindowStats update(WindowStats stats, std::optional<int> reward, bool free_exists);

// successes / feasible_steps; throws NoFeasibleSteps when no slot had a free channel.
double relative_throughput(const WindowStats& stats);
std::optional<double> try_relative_throughput(const WindowStats& stats);

struct RunTrace {
    std::uint64_t seed = 0;
    std::vector<WindowStats> windows;
};

// Splits a stream of slots into consecutive windows. A trailing partial window
// is closed with its own length by finish().
class WindowAccumulator {
public:
    explicit WindowAccumulator(std::size_t window = kDefaultWindow);

    // Returns the window that this slot closed, if any.
    std::optional<WindowStats> record(std::optional<int> reward, bool free_exists);
    const std::vector<WindowStats>& closed() const { return closed_; }
    std::vector<WindowStats> finish();

private:
    std::size_t window_;
    WindowStats current_;
    std::vector<WindowStats> closed_;
};

struct AggregatePoint {
    std::size_t tau = 0;
    double rho_mean = 0.0;
    double rho_std = 0.0;
    std::size_t n_replicas = 0; // replicas whose rho was defined at this tau
};

// Per-window mean and population standard deviation of rho across replicas.
std::vector<AggregatePoint> average_runs(std::span<const RunTrace> traces);

// Mean rho over the last `n_windows` defined windows of a trace.
double final_mean_rho(const RunTrace& trace, std::size_t n_windows);
// Population variance of the per-window rho over the last `n_windows` windows.
double final_rho_variance(const RunTrace& trace, std::size_t n_windows);

// replica,seed,tau,eta,eta_bound,rho  (rho is "nan" for undefined windows)
void write_window_csv(std::ostream& out, std::span<const RunTrace> traces);
// tau,rho_mean,rho_std,n_replicas
void write_aggregate_csv(std::ostream& out, std::span<const AggregatePoint> points);

} // namespace dsa::metrics
