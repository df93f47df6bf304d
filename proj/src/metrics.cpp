#include "dsa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "dsa/error.hpp"

namespace dsa::metrics {

WindowStats update(WindowStats stats, std::optional<int> reward, bool free_exists) {
    if (reward && *reward == 1) ++stats.successes;
    // Only slots where the SU actually transmitted can be feasible.
    if (reward && free_exists) ++stats.feasible_steps;
    ++stats.steps;
    return stats;
}

double relative_throughput(const WindowStats& stats) {
    if (stats.feasible_steps == 0)
        throw NoFeasibleSteps("window " + std::to_string(stats.tau) + " had no feasible slot");
    return static_cast<double>(stats.successes) / static_cast<double>(stats.feasible_steps);
}

std::optional<double> try_relative_throughput(const WindowStats& stats) {
    if (stats.feasible_steps == 0) return std::nullopt;
    return relative_throughput(stats);
}

WindowAccumulator::WindowAccumulator(std::size_t window) : window_(window) {
    if (window == 0) throw InvalidArgument("window length must be positive");
    current_.length = window_;
}

std::optional<WindowStats> WindowAccumulator::record(std::optional<int> reward, bool free_exists) {
    current_ = update(current_, reward, free_exists);
    if (!current_.complete()) return std::nullopt;
    closed_.push_back(current_);
    const std::size_t next_tau = current_.tau + 1;
    current_ = WindowStats{};
    current_.tau = next_tau;
    current_.length = window_;
    return closed_.back();
}

std::vector<WindowStats> WindowAccumulator::finish() {
    auto out = closed_;
    if (current_.steps > 0) {
        auto partial = current_;
        partial.length = partial.steps;
        out.push_back(partial);
    }
    return out;
}

std::vector<AggregatePoint> average_runs(std::span<const RunTrace> traces) {
    if (traces.empty()) return {};
    const std::size_t n = traces.front().windows.size();
    for (const auto& t : traces)
        if (t.windows.size() != n) throw LengthMismatch("replica traces have different lengths");

    std::vector<AggregatePoint> points(n);
    for (std::size_t w = 0; w < n; ++w) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& t : traces)
            if (auto rho = try_relative_throughput(t.windows[w])) {
                sum += *rho;
                ++count;
            }
        auto& p = points[w];
        p.tau = traces.front().windows[w].tau;
        p.n_replicas = count;
        if (count == 0) {
            p.rho_mean = p.rho_std = std::nan("");
            continue;
        }
        p.rho_mean = sum / static_cast<double>(count);
        double ss = 0.0;
        for (const auto& t : traces)
            if (auto rho = try_relative_throughput(t.windows[w])) ss += (*rho - p.rho_mean) * (*rho - p.rho_mean);
        p.rho_std = std::sqrt(ss / static_cast<double>(count));
    }
    return points;
}

namespace {

std::vector<double> tail_rhos(const RunTrace& trace, std::size_t n_windows) {
    std::vector<double> rhos;
    const auto& w = trace.windows;
    const std::size_t start = w.size() > n_windows ? w.size() - n_windows : 0;
    for (std::size_t i = start; i < w.size(); ++i)
        if (auto rho = try_relative_throughput(w[i])) rhos.push_back(*rho);
    return rhos;
}

} // namespace

double final_mean_rho(const RunTrace& trace, std::size_t n_windows) {
    const auto rhos = tail_rhos(trace, n_windows);
    if (rhos.empty()) throw NoFeasibleSteps("no defined window in the requested tail");
    double sum = 0.0;
    for (double r : rhos) sum += r;
    return sum / static_cast<double>(rhos.size());
}

double final_rho_variance(const RunTrace& trace, std::size_t n_windows) {
    const auto rhos = tail_rhos(trace, n_windows);
    if (rhos.empty()) throw NoFeasibleSteps("no defined window in the requested tail");
    const double mean = final_mean_rho(trace, n_windows);
    double ss = 0.0;
    for (double r : rhos) ss += (r - mean) * (r - mean);
    return ss / static_cast<double>(rhos.size());
}

namespace {

void put_double(std::ostream& out, double v) {
    if (std::isnan(v)) {
        out << "nan";
        return;
    }
    out << v;
}

} // namespace

void write_window_csv(std::ostream& out, std::span<const RunTrace> traces) {
    const auto old_precision = out.precision(10);
    out << "replica,seed,tau,eta,eta_bound,rho\n";
    for (std::size_t r = 0; r < traces.size(); ++r) {
        for (const auto& w : traces[r].windows) {
            out << r << ',' << traces[r].seed << ',' << w.tau << ',';
            put_double(out, w.eta());
            out << ',';
            put_double(out, w.eta_bound());
            out << ',';
            put_double(out, try_relative_throughput(w).value_or(std::nan("")));
            out << '\n';
        }
    }
    out.precision(old_precision);
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregatePoint> points) {
    const auto old_precision = out.precision(10);
    out << "tau,rho_mean,rho_std,n_replicas\n";
    for (const auto& p : points) {
        out << p.tau << ',';
        put_double(out, p.rho_mean);
        out << ',';
        put_double(out, p.rho_std);
        out << ',' << p.n_replicas << '\n';
    }
    out.precision(old_precision);
}

} // namespace dsa::metrics
