#include "dsa/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "dsa/error.hpp"

namespace dsa::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    double number(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_double(it->second.value, key, it->second.line);
    }

    double required_number(const std::string& key) const {
        if (!has(key)) throw ValidationError("missing required key '" + key + "'");
        return number(key, 0.0);
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_count(it->second.value, key, it->second.line);
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto& e = entries_.at(key);
        std::vector<double> out;
        std::string_view rest = e.value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            out.push_back(parse_double(trim(rest.substr(0, comma)), key, e.line));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

    std::size_t line_of(const std::string& key) const { return entries_.at(key).line; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    static double parse_double(const std::string& s, const std::string& key, std::size_t line) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ParseError("line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + s + "'");
        return v;
    }

    static std::size_t parse_count(const std::string& s, const std::string& key, std::size_t line) {
        std::uint64_t n = 0;
        auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc{} && end == s.data() + s.size()) return static_cast<std::size_t>(n);
        // Accept 3e5-style literals as long as they are whole numbers.
        const double v = parse_double(s, key, line);
        if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
            throw ParseError("line " + std::to_string(line) + ": '" + key +
                             "' expects a non-negative integer, got '" + s + "'");
        return static_cast<std::size_t>(v);
    }

    std::map<std::string, Entry> entries_;
};

const std::set<std::string> kKnownKeys = {
    "scenario",     "n_channels", "sensing_width", "p_stay",        "p_switch", "p_dswitch",
    "policy",       "gamma",      "learning_rate", "replay_capacity", "target_sync", "batch_size",
    "history",      "p_access",   "hidden",        "total_steps",   "replicas", "seed",
    "output_dir",   "window",     "checkpoint_every", "threads",
};

bool is_pu_key(const std::string& key) {
    if (key.rfind("pu.", 0) != 0 || key.size() == 3) return false;
    return key.find_first_not_of("0123456789", 3) == std::string::npos;
}

} // namespace

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::ddqsa: return "ddqsa";
    case PolicyKind::random_access: return "random_access";
    case PolicyKind::random_sensing: return "random_sensing";
    case PolicyKind::alternating: return "alternating";
    }
    return "?";
}

PolicyKind parse_policy(std::string_view name) {
    for (auto k : {PolicyKind::ddqsa, PolicyKind::random_access, PolicyKind::random_sensing,
                   PolicyKind::alternating})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown policy '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    env::validate(scenario);
    hp.validate();
    if (env::channel_count(scenario) != hp.n_channels)
        throw ValidationError("scenario channel count does not match n_channels");
    if (total_steps == 0) throw ValidationError("total_steps must be >= 1");
    if (n_replicas == 0) throw ValidationError("replicas must be >= 1");
    if (window == 0) throw ValidationError("window must be >= 1");
    if (threads == 0) throw ValidationError("threads must be >= 1");
}

ExperimentConfig parse_config(std::istream& in) {
    std::map<std::string, Entry> entries;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty key or value");
        if (!kKnownKeys.count(key) && !is_pu_key(key))
            throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (entries.count(key))
            throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        entries.emplace(key, Entry{value, line_no});
    }
    const Reader r(std::move(entries));

    ExperimentConfig cfg;
    const std::string scenario = r.text("scenario", "cyclic");
    const std::size_t n_channels = r.count("n_channels", 4);
    if (scenario == "cyclic") {
        env::CyclicParams p;
        p.n_channels = n_channels;
        p.p_stay = r.required_number("p_stay");
        p.p_switch = r.required_number("p_switch");
        p.p_dswitch = r.required_number("p_dswitch");
        cfg.scenario = p;
    } else {
        env::FrameTraffic traffic;
        traffic.n_channels = n_channels;
        std::map<std::size_t, std::vector<double>> chains;
        for (const auto& [key, e] : r.entries())
            if (is_pu_key(key)) chains[std::stoul(key.substr(3))] = r.numbers(key);
        if (chains.empty()) throw ValidationError("missing required key 'pu.0'");
        for (std::size_t i = 0; i < chains.size(); ++i) {
            auto it = chains.find(i);
            if (it == chains.end()) throw ValidationError("missing required key 'pu." + std::to_string(i) + "'");
            traffic.chains.push_back(env::PuChain{it->second});
        }
        if (scenario == "fixed_channel")
            cfg.scenario = env::FixedChannel{traffic};
        else if (scenario == "lowest_index")
            cfg.scenario = env::LowestIndex{traffic};
        else if (scenario == "lowest_index_flipping")
            cfg.scenario = env::LowestIndexFlipping{traffic};
        else
            throw ValidationError("unknown scenario '" + scenario + "'");
    }

    cfg.policy = parse_policy(r.text("policy", "ddqsa"));
    auto& hp = cfg.hp;
    hp.n_channels = n_channels;
    hp.sensing_width = r.count("sensing_width", 2);
    hp.gamma = r.number("gamma", 0.8);
    hp.learning_rate = r.number("learning_rate", 1e-4);
    hp.replay_capacity = r.count("replay_capacity", 30000);
    hp.target_sync = r.count("target_sync", 20);
    hp.batch_size = r.count("batch_size", 64);
    hp.history = r.count("history", scenario == "cyclic" ? 2 : 6);
    hp.p_access = r.number("p_access", 1.0);
    if (r.has("hidden")) {
        hp.hidden.clear();
        for (double h : r.numbers("hidden")) {
            if (h < 1 || h != static_cast<double>(static_cast<std::size_t>(h)))
                throw ValidationError("hidden layer widths must be positive integers");
            hp.hidden.push_back(static_cast<std::size_t>(h));
        }
    }
    cfg.total_steps = r.count("total_steps", 300000);
    cfg.n_replicas = r.count("replicas", 30);
    cfg.base_seed = r.count("seed", 1);
    cfg.output_dir = r.text("output_dir", "out");
    cfg.window = r.count("window", 100);
    cfg.checkpoint_every = r.count("checkpoint_every", 100000);
    cfg.threads = r.count("threads", 1);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_config(in);
}

} // namespace dsa::cli
