#ifndef M2MDTN_CONFIG_HPP
#define M2MDTN_CONFIG_HPP

// Experiment configuration: a line-oriented file of `[section]` headers and
// `key = value` lines. Sweep keys accept comma lists and `a..b step s`
// ranges; the grid is their cartesian product. Unset keys take the
// baseline simulation settings.
//
//   [traffic]
//   nodes = 10, 20
//   [mobility]
//   speed = 5..8 step 1

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "m2mdtn/analysis.hpp"
#include "m2mdtn/errors.hpp"
#include "m2mdtn/sim/simulator.hpp"

namespace m2mdtn::config {

struct GridPoint {
    std::size_t index = 0;
    int nodes = 10;
    double speed = 6.5;     // mean speed, m/s
    double bandwidth = 15e3; // bit/s
    sim::MacMode mode = sim::MacMode::m2m;
};

struct ExperimentSpec {
    TerrainParams terrain;
    double speed_width = 5.0;
    double epoch_length = 25.0;
    double halt = 0.0;
    int alpha = 4;
    double session_time = 0.1;
    double message_size = 1e3;
    std::optional<int> pair_budget; // default: derived from bandwidth
    int csma_budget = 0;            // 0: alpha * b_BW
    double gen_rate = 0.2;
    double duration = 10000;
    double warmup = 1000;
    double window = 500;
    double tail_guard = 0;
    std::uint64_t seed = 1;
    int replications = 1;
    std::optional<int> n_max;
    bool combinatorial_spread = false;
    std::uint64_t oracle_samples = 100'000;
    double oracle_horizon = 4e5;

    // Sweep axes.
    std::vector<int> nodes{10};
    std::vector<double> speeds{6.5};
    std::vector<double> bandwidths{15e3};
    std::vector<sim::MacMode> modes{sim::MacMode::m2m};

    std::vector<GridPoint> grid() const {
        std::vector<GridPoint> out;
        for (int n : nodes)
            for (double v : speeds)
                for (double bw : bandwidths)
                    for (auto m : modes) out.push_back({out.size(), n, v, bw, m});
        return out;
    }

    std::vector<std::uint64_t> seeds() const {
        std::vector<std::uint64_t> s;
        for (int r = 0; r < replications; ++r) s.push_back(seed + static_cast<std::uint64_t>(r));
        return s;
    }

    MacParams mac_for(const GridPoint &p) const {
        auto mac = MacParams::from_bandwidth(alpha, session_time, p.bandwidth, message_size);
        if (pair_budget) mac.pair_budget = *pair_budget;
        return mac;
    }

    MobilityParams mobility_for(const GridPoint &p) const {
        return MobilityParams::from_mean_speed(p.speed, speed_width, epoch_length, halt);
    }

    ModelInput model_input(const GridPoint &p) const {
        ModelInput in;
        in.terrain = terrain;
        in.mobility = mobility_for(p);
        in.mac = mac_for(p);
        in.traffic = TrafficParams{gen_rate, p.nodes};
        in.n_max = n_max;
        in.contention.combinatorial_spread = combinatorial_spread;
        return in;
    }

    sim::SimConfig sim_config(const GridPoint &p, std::uint64_t run_seed) const {
        sim::SimConfig c;
        c.terrain = terrain;
        c.mobility = mobility_for(p);
        c.mac = mac_for(p);
        c.traffic = TrafficParams{gen_rate, p.nodes};
        c.mode = p.mode;
        c.csma_pair_budget = csma_budget;
        c.duration = duration;
        c.warmup = warmup;
        c.seed = run_seed;
        c.window = window;
        c.tail_guard = tail_guard;
        return c;
    }
};

// ---------------------------------------------------------------------------
// Value parsing

namespace detail {

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double to_number(const std::string &text, const std::string &key, int line) {
    const auto t = trim(text);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception &) {
        throw ConfigError(key + ": expected a number, got '" + t + "'", line);
    }
    if (used != t.size()) throw ConfigError(key + ": expected a number, got '" + t + "'", line);
    if (!std::isfinite(v)) throw ConfigError(key + ": value must be finite", line);
    return v;
}

inline int to_int(const std::string &text, const std::string &key, int line) {
    const double v = to_number(text, key, line);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(key + ": expected an integer", line);
    return static_cast<int>(v);
}

inline bool to_bool(const std::string &text, const std::string &key, int line) {
    const auto t = lower(trim(text));
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + t + "'", line);
}

// `a, b, c` or `a..b step s` (inclusive).
inline std::vector<double> to_number_list(const std::string &text, const std::string &key, int line) {
    const auto t = trim(text);
    std::vector<double> out;
    const auto dots = t.find("..");
    if (dots != std::string::npos) {
        const auto step_at = lower(t).find("step");
        if (step_at == std::string::npos || step_at < dots)
            throw ConfigError(key + ": range needs the form 'a..b step s'", line);
        const double a = to_number(t.substr(0, dots), key, line);
        const double b = to_number(t.substr(dots + 2, step_at - dots - 2), key, line);
        const double s = to_number(t.substr(step_at + 4), key, line);
        if (!(s > 0)) throw ConfigError(key + ": range step must be positive", line);
        if (b < a) throw ConfigError(key + ": range end is below its start", line);
        const auto count = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9)) + 1;
        if (count > 100000) throw ConfigError(key + ": range has too many points", line);
        for (std::size_t k = 0; k < count; ++k) out.push_back(a + static_cast<double>(k) * s);
        return out;
    }
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_number(item, key, line));
    if (out.empty()) throw ConfigError(key + ": empty value", line);
    return out;
}

inline bool is_list(const std::string &text) {
    return text.find(',') != std::string::npos || text.find("..") != std::string::npos;
}

} // namespace detail

// One assignment, before it is applied.
struct Assignment {
    std::string section;
    std::string key;
    std::string value;
    int line = 0; // 0 for command-line overrides
};

namespace detail {

struct KeyInfo {
    const char *section;
    const char *key;
};

inline constexpr KeyInfo kKeys[] = {
    {"terrain", "side"},        {"terrain", "cell"},
    {"mobility", "speed"},      {"mobility", "speed_width"},    {"mobility", "epoch_length"},
    {"mobility", "halt"},
    {"mac", "alpha"},           {"mac", "session"},             {"mac", "bandwidth"},
    {"mac", "message_size"},    {"mac", "pair_budget"},         {"mac", "mode"},
    {"mac", "csma_budget"},
    {"traffic", "nodes"},       {"traffic", "gen_rate"},        {"traffic", "ttl"},
    {"traffic", "buffer"},      {"traffic", "scheduling"},
    {"sim", "duration"},        {"sim", "warmup"},              {"sim", "window"},
    {"sim", "tail_guard"},      {"sim", "seed"},                {"sim", "replications"},
    {"model", "n_max"},         {"model", "combinatorial_spread"},
    {"validate", "samples"},    {"validate", "horizon"},
};

inline std::string resolve_section(const std::string &section, const std::string &key, int line) {
    for (const auto &k : kKeys)
        if (key == k.key && (section.empty() || section == k.section)) return k.section;
    if (!section.empty()) {
        bool known_section = false;
        for (const auto &k : kKeys) known_section |= section == k.section;
        if (!known_section) throw ConfigError("unknown section '" + section + "'", line);
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line);
    }
    throw ConfigError("unknown key '" + key + "'", line);
}

inline void apply(ExperimentSpec &spec, const Assignment &a) {
    const std::string name = a.section + "." + a.key;
    const int line = a.line;
    auto scalar = [&]() {
        if (is_list(a.value)) throw ConfigError(name + ": only sweep keys accept lists or ranges", line);
        return to_number(a.value, name, line);
    };
    auto integer = [&]() {
        if (is_list(a.value)) throw ConfigError(name + ": only sweep keys accept lists or ranges", line);
        return to_int(a.value, name, line);
    };
    auto positive = [&](double v) {
        if (!(v > 0)) throw ConfigError(name + ": must be positive", line);
        return v;
    };
    auto non_negative = [&](double v) {
        if (v < 0) throw ConfigError(name + ": must be non-negative", line);
        return v;
    };
    auto infinite_only = [&]() {
        const auto v = lower(trim(a.value));
        if (v != "inf" && v != "infinite" && v != "none")
            throw ConfigError(name + ": only 'inf' is supported", line);
    };

    if (name == "terrain.side") spec.terrain.side = positive(scalar());
    else if (name == "terrain.cell") spec.terrain.cell = positive(scalar());
    else if (name == "mobility.speed") {
        spec.speeds = to_number_list(a.value, name, line);
        for (double v : spec.speeds) positive(v);
    } else if (name == "mobility.speed_width") spec.speed_width = positive(scalar());
    else if (name == "mobility.epoch_length") spec.epoch_length = positive(scalar());
    else if (name == "mobility.halt") spec.halt = non_negative(scalar());
    else if (name == "mac.alpha") {
        spec.alpha = integer();
        if (spec.alpha < 2) throw ConfigError(name + ": alpha must be at least 2", line);
    } else if (name == "mac.session") spec.session_time = positive(scalar());
    else if (name == "mac.bandwidth") {
        spec.bandwidths = to_number_list(a.value, name, line);
        for (double v : spec.bandwidths) positive(v);
    } else if (name == "mac.message_size") spec.message_size = positive(scalar());
    else if (name == "mac.pair_budget") {
        if (lower(trim(a.value)) == "auto") spec.pair_budget.reset();
        else {
            spec.pair_budget = integer();
            if (*spec.pair_budget < 1) throw ConfigError(name + ": must be at least 1", line);
        }
    } else if (name == "mac.mode") {
        spec.modes.clear();
        std::stringstream ss(a.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto m = lower(trim(item));
            if (m == "m2m") spec.modes.push_back(sim::MacMode::m2m);
            else if (m == "csma") spec.modes.push_back(sim::MacMode::csma);
            else throw ConfigError(name + ": expected m2m or csma, got '" + m + "'", line);
        }
        if (spec.modes.empty()) throw ConfigError(name + ": empty value", line);
    } else if (name == "mac.csma_budget") {
        spec.csma_budget = integer();
        if (spec.csma_budget < 0) throw ConfigError(name + ": must be non-negative", line);
    } else if (name == "traffic.nodes") {
        spec.nodes.clear();
        for (double v : to_number_list(a.value, name, line)) {
            if (v != std::floor(v) || v < 2)
                throw ConfigError(name + ": node counts must be integers >= 2", line);
            spec.nodes.push_back(static_cast<int>(v));
        }
    } else if (name == "traffic.gen_rate") spec.gen_rate = positive(scalar());
    else if (name == "traffic.ttl" || name == "traffic.buffer") infinite_only();
    else if (name == "traffic.scheduling") {
        if (lower(trim(a.value)) != "fcfs") throw ConfigError(name + ": only 'fcfs' is supported", line);
    } else if (name == "sim.duration") spec.duration = positive(scalar());
    else if (name == "sim.warmup") spec.warmup = non_negative(scalar());
    else if (name == "sim.window") spec.window = positive(scalar());
    else if (name == "sim.tail_guard") spec.tail_guard = non_negative(scalar());
    else if (name == "sim.seed") {
        const double v = scalar();
        if (v < 0 || v != std::floor(v)) throw ConfigError(name + ": must be a non-negative integer", line);
        spec.seed = static_cast<std::uint64_t>(v);
    } else if (name == "sim.replications") {
        spec.replications = integer();
        if (spec.replications < 1) throw ConfigError(name + ": must be at least 1", line);
    } else if (name == "model.n_max") {
        if (lower(trim(a.value)) == "auto") spec.n_max.reset();
        else {
            spec.n_max = integer();
            if (*spec.n_max < 0) throw ConfigError(name + ": must be non-negative", line);
        }
    } else if (name == "model.combinatorial_spread") spec.combinatorial_spread = to_bool(a.value, name, line);
    else if (name == "validate.samples") {
        const double v = scalar();
        if (v < 1 || v != std::floor(v)) throw ConfigError(name + ": must be a positive integer", line);
        spec.oracle_samples = static_cast<std::uint64_t>(v);
    } else if (name == "validate.horizon") spec.oracle_horizon = positive(scalar());
    else throw ConfigError("unknown key '" + name + "'", line);
}

} // namespace detail

// Cross-field checks; `lines` maps "section.key" to the line that set it.
inline void validate(const ExperimentSpec &spec, const std::map<std::string, int> &lines = {}) {
    auto at = [&](const std::string &key) {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    };
    try {
        spec.terrain.validate();
    } catch (const DomainError &e) {
        throw ConfigError(e.what(), std::max(at("terrain.cell"), at("terrain.side")));
    }
    if (!(spec.duration > spec.warmup))
        throw ConfigError("sim: duration must exceed warmup", std::max(at("sim.duration"), at("sim.warmup")));
    for (double v : spec.speeds)
        if (!(v - spec.speed_width / 2 > 0))
            throw ConfigError("mobility: mean speed " + std::to_string(v) +
                                  " leaves no positive minimum speed for the configured width",
                              std::max(at("mobility.speed"), at("mobility.speed_width")));
    for (int n : spec.nodes)
        if (spec.n_max && *spec.n_max >= n)
            throw ConfigError("model.n_max must be below every node count", at("model.n_max"));
}

inline std::vector<Assignment> read_assignments(std::istream &in) {
    std::vector<Assignment> out;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto text = raw;
        if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
        text = detail::trim(text);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError("malformed section header", line);
            section = detail::lower(detail::trim(text.substr(1, text.size() - 2)));
            if (section.empty()) throw ConfigError("empty section name", line);
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const auto key = detail::lower(detail::trim(text.substr(0, eq)));
        const auto value = detail::trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key", line);
        if (value.empty()) throw ConfigError(key + ": missing value", line);
        out.push_back({detail::resolve_section(section, key, line), key, value, line});
    }
    return out;
}

// `section.key=value` or `key=value` from the command line.
inline Assignment parse_override(const std::string &text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + text + "'");
    auto name = detail::lower(detail::trim(text.substr(0, eq)));
    const auto value = detail::trim(text.substr(eq + 1));
    if (value.empty()) throw ConfigError("--set " + name + ": missing value");
    std::string section;
    if (const auto dot = name.find('.'); dot != std::string::npos) {
        section = name.substr(0, dot);
        name = name.substr(dot + 1);
    }
    return {detail::resolve_section(section, name, 0), name, value, 0};
}

inline ExperimentSpec parse_config(std::istream &in, const std::vector<std::string> &overrides = {}) {
    ExperimentSpec spec;
    std::map<std::string, int> lines;
    auto assignments = read_assignments(in);
    for (const auto &o : overrides) assignments.push_back(parse_override(o));
    for (const auto &a : assignments) {
        detail::apply(spec, a);
        lines[a.section + "." + a.key] = a.line;
    }
    validate(spec, lines);
    return spec;
}

inline ExperimentSpec parse_config_text(const std::string &text, const std::vector<std::string> &overrides = {}) {
    std::istringstream in(text);
    return parse_config(in, overrides);
}

inline ExperimentSpec parse_config_file(const std::string &path, const std::vector<std::string> &overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(in, overrides);
}

// ---------------------------------------------------------------------------
// Content addressing and CSV cells

inline std::uint64_t fnv1a(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string format_number(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string format_number(const std::optional<double> &v) { return v ? format_number(*v) : "NA"; }

// Canonical text of everything that determines a simulation run except the seed.
inline std::string canonical(const sim::SimConfig &c) {
    std::string s;
    auto put = [&](const char *k, double v) {
        s += k;
        s += '=';
        s += format_number(v);
        s += ';';
    };
    put("side", c.terrain.side);
    put("cell", c.terrain.cell);
    put("vmin", c.mobility.v_min);
    put("vmax", c.mobility.v_max);
    put("epoch", c.mobility.mean_epoch_length);
    put("halt", c.mobility.mean_halt);
    put("alpha", c.mac.alpha);
    put("tau", c.mac.session_time);
    put("budget", c.mac.pair_budget);
    put("csma_budget", c.csma_budget());
    put("nodes", c.traffic.n_tot);
    put("gen", c.traffic.gen_rate);
    put("duration", c.duration);
    put("warmup", c.warmup);
    put("window", c.window);
    put("tail", c.tail_guard);
    s += "mode=";
    s += sim::to_string(c.mode);
    return s;
}

inline std::string config_hash(const sim::SimConfig &c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical(c))));
    return buf;
}

} // namespace m2mdtn::config

#endif
