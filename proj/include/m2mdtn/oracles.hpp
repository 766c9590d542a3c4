#ifndef M2MDTN_ORACLES_HPP
#define M2MDTN_ORACLES_HPP

// Independent Monte Carlo and brute-force oracles. Nothing here calls the
// closed forms, recursions or DP it is compared against; those values are
// passed in by the caller.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "m2mdtn/delay_solver.hpp"
#include "m2mdtn/errors.hpp"
#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/neighbor_chain.hpp"
#include "m2mdtn/sim/mobility.hpp"
#include "m2mdtn/sim/rng.hpp"

namespace m2mdtn::oracle {

using sim::Engine;

struct OracleReport {
    std::string quantity;
    double analytical = 0;
    double empirical = 0;
    double std_error = 0;
    std::uint64_t samples = 0;
    std::string tolerance; // human-readable rule the verdict used
    bool pass = false;
    std::vector<std::string> notes;
};

// Running mean / variance (Welford).
class SampleStats {
  public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double std_error() const { return n_ > 1 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0; }
    double cv() const { return mean_ != 0 ? stddev() / mean_ : 0.0; }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0, m2_ = 0;
};

inline OracleReport within_relative(std::string name, double analytical, const SampleStats &s, double rel) {
    OracleReport r{std::move(name), analytical, s.mean(), s.std_error(), s.count(), {}, false, {}};
    r.tolerance = "within " + std::to_string(static_cast<int>(std::lround(rel * 100))) + "%";
    r.pass = s.count() > 0 && std::abs(s.mean() - analytical) <= rel * std::abs(analytical);
    return r;
}

inline OracleReport within_se(std::string name, double analytical, double empirical, double se,
                              std::uint64_t samples, double k = 3.0) {
    OracleReport r{std::move(name), analytical, empirical, se, samples, {}, false, {}};
    r.tolerance = "within " + std::to_string(static_cast<int>(k)) + " SE";
    r.pass = std::abs(empirical - analytical) <= k * se;
    return r;
}

// ---------------------------------------------------------------------------
// Epoch coverage

// Cells entered by a straight segment from (x, y) with displacement
// (dx, dy) on a grid of side `cell`, counting the start cell. Each wall
// crossing is one floor() difference, so no stepping error accumulates.
inline int segment_cells(double x, double y, double dx, double dy, double cell) {
    const auto cx0 = std::floor(x / cell), cx1 = std::floor((x + dx) / cell);
    const auto cy0 = std::floor(y / cell), cy1 = std::floor((y + dy) / cell);
    return 1 + static_cast<int>(std::abs(cx1 - cx0)) + static_cast<int>(std::abs(cy1 - cy0));
}

struct EpochSampleOverride {
    std::optional<double> heading;      // rad
    std::optional<double> travel;       // m, replaces v * t
};

// Samples start point in a cell, heading, speed and exponential duration,
// and averages the number of cells the epoch covers. Verdict: the mean must
// lie in [n_bar - 1, n_bar].
inline OracleReport mc_epoch_coverage(const MobilityParams &mob, const TerrainParams &terrain,
                                      std::uint64_t samples, Engine &rng, double closed_form,
                                      const EpochSampleOverride &override = {}) {
    const double a = terrain.cell;
    const double mean_duration = mob.mean_epoch_length / mob.mean_speed();
    SampleStats s;
    for (std::uint64_t k = 0; k < samples; ++k) {
        const double x = sim::uniform(rng, 0.0, a);
        const double y = sim::uniform(rng, 0.0, a);
        const double heading = override.heading ? *override.heading : sim::uniform(rng, 0.0, 2 * std::numbers::pi);
        double travel;
        if (override.travel) {
            travel = *override.travel;
        } else {
            const double v = sim::uniform(rng, mob.v_min, mob.v_max);
            travel = v * sim::exponential(rng, mean_duration);
        }
        s.add(segment_cells(x, y, travel * std::cos(heading), travel * std::sin(heading), a));
    }
    OracleReport r{"epoch_cells", closed_form, s.mean(), s.std_error(), s.count(), "in [n_bar - 1, n_bar]",
                   false, {}};
    r.pass = s.mean() >= closed_form - 1.0 && s.mean() <= closed_form;
    return r;
}

// ---------------------------------------------------------------------------
// Pairwise meeting / contact statistics

enum class PairMode {
    two_moving,     // intermeeting and contact times of two RD nodes
    static_contact, // cell-transit time of a mover through a pinned node's cell
    static_hitting, // time for a mover from stationarity to reach a pinned node's cell
};

struct MeetingStats {
    SampleStats intermeeting; // gap between contact end and next contact start
    SampleStats contact;
    SampleStats hitting;
    bool degenerate = false;
    std::vector<std::string> warnings;
};

struct MeetingOptions {
    double dt = 0.01;               // s, co-cell test resolution
    double horizon = 2e5;           // s of simulated time per run
    std::uint64_t min_meetings = 500;
    std::uint64_t hitting_samples = 2000;
    bool pin_both = false;          // both nodes static in one cell
};

inline MeetingStats mc_pairwise_meeting_stats(const MobilityParams &mob, const TerrainParams &terrain,
                                              PairMode mode, const MeetingOptions &opt, Engine &rng) {
    MeetingStats out;
    if (opt.pin_both) {
        // Two static co-located nodes: contact starts and never ends.
        out.degenerate = true;
        out.warnings.push_back("both nodes pinned in one cell: contact never ends");
        return out;
    }

    if (mode == PairMode::static_hitting) {
        for (std::uint64_t k = 0; k < opt.hitting_samples; ++k) {
            auto mover = sim::random_start(mob, terrain, rng);
            const int target = sim::cell_index(sim::uniform(rng, 0.0, terrain.side),
                                               sim::uniform(rng, 0.0, terrain.side), terrain);
            double t = 0;
            while (sim::cell_index(mover, terrain) != target && t < opt.horizon) {
                sim::advance_mobility(mover, opt.dt, mob, terrain, rng);
                t += opt.dt;
            }
            out.hitting.add(t);
        }
        return out;
    }

    auto a = sim::random_start(mob, terrain, rng);
    auto b = sim::random_start(mob, terrain, rng);
    if (mode == PairMode::static_contact) b.pinned = true;

    bool together = sim::cell_index(a, terrain) == sim::cell_index(b, terrain);
    bool seen_gap_start = false; // the first contact/gap is censored
    double since = 0;
    for (double t = 0; t < opt.horizon; t += opt.dt) {
        sim::advance_mobility(a, opt.dt, mob, terrain, rng);
        sim::advance_mobility(b, opt.dt, mob, terrain, rng);
        since += opt.dt;
        const bool now = sim::cell_index(a, terrain) == sim::cell_index(b, terrain);
        if (now == together) continue;
        if (seen_gap_start) {
            if (now)
                out.intermeeting.add(since);
            else
                out.contact.add(since);
        }
        seen_gap_start = true;
        together = now;
        since = 0;
    }
    const auto meetings = mode == PairMode::two_moving ? out.intermeeting.count() : out.contact.count();
    if (meetings < opt.min_meetings)
        out.warnings.push_back("only " + std::to_string(meetings) + " meetings observed (< " +
                               std::to_string(opt.min_meetings) + ")");
    return out;
}

// ---------------------------------------------------------------------------
// Steady state by power iteration

struct PowerIterationResult {
    std::vector<double> v;
    std::uint64_t iterations = 0;
    bool converged = false;
};

inline PowerIterationResult power_iteration(const NeighborChain &chain, std::vector<double> start = {},
                                            std::uint64_t max_iterations = 1'000'000, double tol = 1e-12) {
    const auto states = static_cast<std::size_t>(chain.states());
    PowerIterationResult r;
    r.v = start.empty() ? std::vector<double>(states, 1.0 / static_cast<double>(states)) : std::move(start);
    std::vector<double> next(states);
    for (r.iterations = 0; r.iterations < max_iterations; ++r.iterations) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t from = 0; from < states; ++from)
            for (std::size_t to = 0; to < states; ++to)
                next[to] += r.v[from] * chain.prob(static_cast<int>(from), static_cast<int>(to));
        double diff = 0;
        for (std::size_t k = 0; k < states; ++k) diff = std::max(diff, std::abs(next[k] - r.v[k]));
        r.v.swap(next);
        if (diff < tol) {
            r.converged = true;
            ++r.iterations;
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Session-level experiments behind the spread and delivery probabilities

inline int sample_index(const std::vector<double> &probs, Engine &rng) {
    double u = sim::uniform01(rng);
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (u < probs[k]) return static_cast<int>(k);
        u -= probs[k];
    }
    return static_cast<int>(probs.size()) - 1;
}

// Whether a given member of a cell of `size` nodes is admitted when at
// most `alpha` are chosen uniformly.
inline bool admitted(int size, int alpha, Engine &rng) {
    if (size <= alpha) return true;
    return sim::below(rng, static_cast<std::uint64_t>(size)) < static_cast<std::uint64_t>(alpha);
}

struct SessionSpreadEstimate {
    // spread[k - 1]: estimated probability of gaining exactly k copies (times i).
    std::vector<SampleStats> spread;
    SampleStats deliver;
};

// Per trial: draw j ~ neighbour law. Spread of k copies is counted the way
// the model writes it: only j <= alpha - 1, the holder admitted, a specific
// k of its j neighbours receive and the other j - k do not; the count is
// scaled by i. Delivery: the destination is one of the j neighbours (j
// uniform picks out of n_tot - 1) and both ends are in the admitted subset.
inline SessionSpreadEstimate mc_session_spread(const NeighborDistribution &dist, int alpha, int n_tot,
                                               int copies, double p_tx, std::uint64_t trials, Engine &rng) {
    SessionSpreadEstimate est;
    est.spread.resize(static_cast<std::size_t>(alpha - 1));
    for (std::uint64_t t = 0; t < trials; ++t) {
        const int j = sample_index(dist.v, rng);
        std::vector<double> hit(static_cast<std::size_t>(alpha - 1), 0.0);
        if (j <= alpha - 1 && admitted(j + 1, alpha, rng)) {
            int received_prefix = 0; // length of the leading run of receivers
            bool broken = false;
            int received = 0;
            for (int nb = 0; nb < j; ++nb) {
                const bool got = sim::bernoulli(rng, p_tx);
                received += got;
                if (!broken && got) ++received_prefix;
                else broken = true;
            }
            // Event "neighbours 1..k receive, k+1..j do not".
            if (received == received_prefix && received >= 1) hit[static_cast<std::size_t>(received - 1)] = copies;
        }
        for (std::size_t k = 0; k < hit.size(); ++k) est.spread[k].add(hit[k]);

        double delivered = 0.0;
        if (j >= 1) {
            const bool dest_is_neighbor = sim::below(rng, static_cast<std::uint64_t>(n_tot - 1)) <
                                          static_cast<std::uint64_t>(j);
            if (dest_is_neighbor) {
                // Draw an alpha-subset of the j + 1 cell members; holder is 0, destination 1.
                const int size = j + 1;
                bool holder_in = true, dest_in = true;
                if (size > alpha) {
                    std::vector<int> members(static_cast<std::size_t>(size));
                    for (int m = 0; m < size; ++m) members[static_cast<std::size_t>(m)] = m;
                    for (int m = 0; m < alpha; ++m) {
                        const auto pick = static_cast<std::size_t>(m) +
                                          sim::below(rng, static_cast<std::uint64_t>(size - m));
                        std::swap(members[static_cast<std::size_t>(m)], members[pick]);
                    }
                    holder_in = std::find(members.begin(), members.begin() + alpha, 0) != members.begin() + alpha;
                    dest_in = std::find(members.begin(), members.begin() + alpha, 1) != members.begin() + alpha;
                }
                delivered = holder_in && dest_in ? 1.0 : 0.0;
            }
        }
        est.deliver.add(delivered);
    }
    return est;
}

// Binomial-style standard error under the null value p0 (scale = i for spread).
inline double null_std_error(double p0, double scale, std::uint64_t trials) {
    const double q = std::clamp(p0 / scale, 0.0, 1.0);
    return scale * std::sqrt(q * (1.0 - q) / static_cast<double>(trials));
}

// ---------------------------------------------------------------------------
// Dwell sampler: the session-synchronous neighbour process with transmit coins

struct DwellSample {
    SampleStats first_spread;       // s until a single holder spreads, from `start_state`
    SampleStats state_dwell;        // s spent in `start_state` before any change
    SampleStats min_of_replicas;    // s until the first of `replicas` holders spreads
    std::uint64_t capped = 0;
};

struct DwellOptions {
    int start_state = 0;
    int replicas = 1;
    std::uint64_t samples = 10'000;
    std::uint64_t session_cap = 50'000'000;
};

namespace detail {

// One session for a holder with n neighbours: admitted w.p. 1 when
// n <= alpha - 1, else alpha / n; admitted holders reach each neighbour
// with an independent p_tx coin.
inline bool session_spreads(int n, int alpha, double p_tx, Engine &rng) {
    if (n == 0) return false;
    if (n > alpha - 1 && !sim::bernoulli(rng, static_cast<double>(alpha) / n)) return false;
    for (int k = 0; k < n; ++k)
        if (sim::bernoulli(rng, p_tx)) return true;
    return false;
}

inline int neighbor_step(const NeighborChain &chain, int n, Engine &rng) {
    const double u = sim::uniform01(rng);
    if (u < chain.prob(n, n + 1)) return n + 1;
    if (u < chain.prob(n, n + 1) + chain.prob(n, n - 1)) return n - 1;
    return n;
}

} // namespace detail

inline DwellSample mc_dwell_sampler(const NeighborChain &chain, int alpha, double p_tx, double session_time,
                                    const DwellOptions &opt, Engine &rng) {
    DwellSample out;
    if (!(p_tx > 0)) {
        out.capped = opt.samples;
        return out; // no absorption possible
    }
    auto first_spread = [&](int start, std::uint64_t &capped) -> double {
        int n = start;
        for (std::uint64_t s = 1; s <= opt.session_cap; ++s) {
            if (detail::session_spreads(n, alpha, p_tx, rng)) return static_cast<double>(s) * session_time;
            n = detail::neighbor_step(chain, n, rng);
        }
        ++capped;
        return static_cast<double>(opt.session_cap) * session_time;
    };
    for (std::uint64_t k = 0; k < opt.samples; ++k) {
        out.first_spread.add(first_spread(opt.start_state, out.capped));

        // Dwell in start_state: sessions until a spread or a neighbour change.
        int n = opt.start_state;
        std::uint64_t sessions = 0;
        while (true) {
            ++sessions;
            if (detail::session_spreads(n, alpha, p_tx, rng)) break;
            if (detail::neighbor_step(chain, n, rng) != n) break;
            if (sessions >= opt.session_cap) {
                ++out.capped;
                break;
            }
        }
        out.state_dwell.add(static_cast<double>(sessions) * session_time);

        if (opt.replicas > 1) {
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < opt.replicas; ++r) best = std::min(best, first_spread(opt.start_state, out.capped));
            out.min_of_replicas.add(best);
        }
    }
    if (opt.replicas <= 1) out.min_of_replicas = out.first_spread;
    return out;
}

// ---------------------------------------------------------------------------
// Copy-count digraph oracles

struct AbsorptionSample {
    SampleStats delay;
    std::uint64_t capped = 0;
};

// Random walks from state 1 with exponential dwell draws of mean E[D_s].
inline AbsorptionSample mc_absorption_sampler(const CopyDigraph &g, std::uint64_t samples, Engine &rng,
                                              std::uint64_t walk_cap = 1'000'000) {
    AbsorptionSample out;
    for (std::uint64_t k = 0; k < samples; ++k) {
        int s = 1;
        double t = 0;
        std::uint64_t steps = 0;
        bool done = false;
        while (!done) {
            if (++steps > walk_cap) {
                ++out.capped;
                break;
            }
            t += sim::exponential(rng, g.dwell(s));
            double u = sim::uniform01(rng) * g.outgoing_mass(s);
            if (u < g.deliver(s)) {
                done = true;
                break;
            }
            u -= g.deliver(s);
            int next = -1;
            for (const auto &c : g.children(s)) {
                if (u < c.prob) {
                    next = c.to;
                    break;
                }
                u -= c.prob;
            }
            if (next < 0) next = g.children(s).empty() ? -1 : g.children(s).back().to;
            if (next < 0) {
                done = true;
                break;
            }
            s = next;
        }
        out.delay.add(t);
    }
    return out;
}

struct PathEnumeration {
    std::vector<double> forward;    // sum over paths 1 -> i of the path probability
    std::vector<double> absorption; // sum over paths i -> D
    double expected_delay = 0;      // sum over paths 1 -> D of P(path) * sum of E[D_s] along it
    std::uint64_t paths = 0;
};

// Exhaustive depth-first enumeration; exponential in n_tot, test-sized only.
inline PathEnumeration enumerate_paths(const CopyDigraph &g) {
    PathEnumeration out;
    const auto size = static_cast<std::size_t>(g.n_tot());
    out.forward.assign(size, 0.0);
    out.absorption.assign(size, 0.0);

    std::function<void(int, double, double)> from_one = [&](int s, double prob, double delay) {
        out.forward[static_cast<std::size_t>(s)] += prob;
        const double here = delay + g.dwell(s);
        out.expected_delay += prob * g.deliver(s) * here;
        ++out.paths;
        for (const auto &c : g.children(s)) from_one(c.to, prob * c.prob, here);
    };
    from_one(1, 1.0, 0.0);

    std::function<double(int)> to_d = [&](int s) -> double {
        double acc = g.deliver(s);
        for (const auto &c : g.children(s)) acc += c.prob * to_d(c.to);
        return acc;
    };
    for (int s = 1; s <= g.top(); ++s) out.absorption[static_cast<std::size_t>(s)] = to_d(s);
    return out;
}

} // namespace m2mdtn::oracle

#endif
