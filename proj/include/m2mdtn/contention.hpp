#ifndef M2MDTN_CONTENTION_HPP
#define M2MDTN_CONTENTION_HPP

// Contention model for a single tagged message with i copies in the network:
// probability of spreading to i' copies in one session, probability of
// delivery, and the expected time until the next copy-count change.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "m2mdtn/errors.hpp"
#include "m2mdtn/neighbor_chain.hpp"
#include "m2mdtn/traffic_model.hpp"

namespace m2mdtn {

// Counts formula outputs that had to be forced back into [0, 1]. Rounding
// noise below kSlack is clamped silently.
struct ClampCounter {
    static constexpr double kSlack = 1e-12;
    int count = 0;

    double operator()(double p) {
        if (p < 0.0) {
            count += p < -kSlack;
            return 0.0;
        }
        if (p > 1.0) {
            count += p > 1.0 + kSlack;
            return 1.0;
        }
        return p;
    }
};

struct ContentionOptions {
    // Multiply each spread term by C(j, i' - i). Off reproduces the printed model.
    bool combinatorial_spread = false;
    // Tolerated excess of per-session event mass above one before a warning.
    double support_tolerance = 0.05;
};

inline double transmit_probability(int copies, int n_tot, int pair_budget, double buffer,
                                   ClampCounter *clamps = nullptr) {
    if (n_tot < 2) throw DomainError("p_tx: need at least two nodes");
    if (copies < 1 || copies > n_tot) throw DomainError("p_tx: copy count outside [1, n_tot]");
    if (!(buffer > 0)) throw DomainError("p_tx: expected buffer occupancy must be positive");
    const double raw = (1.0 - static_cast<double>(copies - 1) / (n_tot - 1)) * (pair_budget / buffer);
    ClampCounter local;
    return clamps ? (*clamps)(raw) : local(raw);
}

namespace detail {

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

} // namespace detail

// One holder transmits in the session; it must be admitted and exactly
// i' - i of its j neighbours must receive.
inline double copy_increase_probability(int copies, int next_copies, const NeighborDistribution &dist,
                                        const MacParams &mac, double p_tx,
                                        const ContentionOptions &opts = {},
                                        ClampCounter *clamps = nullptr) {
    if (copies < 1) throw DomainError("p_spread: copy count must be at least 1");
    if (next_copies <= copies) throw DomainError("p_spread: target copy count must exceed current");
    if (next_copies >= copies + mac.alpha) return 0.0;
    const int gained = next_copies - copies;
    double sum = 0.0;
    for (int j = gained; j <= mac.alpha - 1; ++j) {
        double term = dist[j] * admission_probability(mac.alpha, j) * std::pow(p_tx, gained) *
                      std::pow(1.0 - p_tx, j - gained);
        if (opts.combinatorial_spread) term *= detail::binomial(j, gained);
        sum += term;
    }
    ClampCounter local;
    return clamps ? (*clamps)(copies * sum) : local(copies * sum);
}

// Independent of the copy count as modelled.
inline double delivery_probability(const NeighborDistribution &dist, const MacParams &mac, int n_tot,
                                   ClampCounter *clamps = nullptr) {
    if (n_tot < 2) throw DomainError("p_deliver: need at least two nodes");
    double sum = 0.0;
    for (int j = 1; j <= dist.n_max(); ++j) {
        const double admit = admission_probability(mac.alpha, j);
        sum += dist[j] * (static_cast<double>(j) / (n_tot - 1)) * admit * admit;
    }
    ClampCounter local;
    return clamps ? (*clamps)(sum) : local(sum);
}

// Probability that a holder with n neighbours spreads no copy this session.
// Above alpha - 1 neighbours the holder is admitted with probability alpha / n.
inline double no_spread_probability(int neighbors, int alpha, double p_tx) {
    if (neighbors < 0) throw DomainError("no-spread: negative neighbour count");
    if (neighbors == 0) return 1.0;
    const double silent = std::pow(1.0 - p_tx, neighbors);
    if (neighbors <= alpha - 1) return silent;
    const double admit = static_cast<double>(alpha) / neighbors;
    return 1.0 - admit + admit * silent;
}

// Expected dwell in neighbour state n without spreading: a geometric number
// of sessions with success probability 1 - P(n|n) * p_no_spread.
inline double state_dwell_time(double stay_prob, double p_no_spread, double session_time) {
    const double stuck = stay_prob * p_no_spread;
    if (!(stuck < 1.0)) throw DegenerateError("E[t_n]: no-event probability is one");
    return session_time / (1.0 - stuck);
}

// Per-copy-count intermediates of the n-system recursion, indexed by n.
struct DwellProfile {
    std::vector<double> p_no_spread; // p_n(i)
    std::vector<double> p_stay;      // p_{n,n}(i)
    std::vector<double> p_up;        // p_{n,n+1}(i)
    std::vector<double> p_return;    // p_{s(n+1),n}(i); 0 at n_max
    std::vector<double> dwell;       // E[t_n]
    std::vector<double> system_dwell; // E[t^n]
};

// E[t^n] = (E[t_n] + p_up E[t^{n+1}]) / (1 - p_up p_return), evaluated from
// n_max down with E[t^{n_max}] = E[t_{n_max}].
inline DwellProfile system_dwell_profile(const NeighborChain &chain, const NeighborDistribution &dist,
                                         const MacParams &mac, double p_tx,
                                         ClampCounter *clamps = nullptr) {
    ClampCounter local;
    ClampCounter &clamp = clamps ? *clamps : local;
    const int n_max = chain.n_max();
    if (dist.n_max() != n_max) throw DomainError("dwell: chain and distribution sizes differ");
    const auto states = static_cast<std::size_t>(n_max) + 1;
    DwellProfile d;
    d.p_no_spread.resize(states);
    d.p_stay.resize(states);
    d.p_up.resize(states);
    d.p_return.assign(states, 0.0);
    d.dwell.resize(states);
    d.system_dwell.resize(states);

    for (int n = 0; n <= n_max; ++n) {
        const auto s = static_cast<std::size_t>(n);
        d.p_no_spread[s] = clamp(no_spread_probability(n, mac.alpha, p_tx));
        d.p_stay[s] = clamp(chain.stay(n) * d.p_no_spread[s]);
        d.dwell[s] = state_dwell_time(chain.stay(n), d.p_no_spread[s], mac.session_time);
        d.p_up[s] = clamp(d.p_no_spread[s] * chain.up(n) / (1.0 - d.p_stay[s]));
    }
    for (int n = 0; n < n_max; ++n) {
        const auto s = static_cast<std::size_t>(n);
        const double back = dist[n + 1] * chain.down(n + 1);
        double spread_mass = 0.0;
        for (int k = n + 1; k <= n_max; ++k)
            spread_mass += dist[k] * (1.0 - d.p_no_spread[static_cast<std::size_t>(k)]);
        const double denom = back + spread_mass;
        d.p_return[s] = denom > 0 ? clamp(back / denom) : 0.0;
    }

    d.system_dwell[states - 1] = d.dwell[states - 1];
    for (int n = n_max - 1; n >= 0; --n) {
        const auto s = static_cast<std::size_t>(n);
        const double denom = 1.0 - d.p_up[s] * d.p_return[s];
        if (!(denom > 0))
            throw DegenerateError("E[t^n]: recursion denominator is not positive at n = " +
                                  std::to_string(n));
        d.system_dwell[s] = (d.dwell[s] + d.p_up[s] * d.system_dwell[s + 1]) / denom;
    }
    return d;
}

inline double expected_state_duration(int copies, const DwellProfile &profile) {
    if (copies < 1) throw DomainError("E[D_i]: copy count must be at least 1");
    return profile.system_dwell.front() / copies;
}

struct ContentionTables {
    int n_tot = 0;
    int alpha = 0;
    double buffer = 0;                      // E[B] the tables were built for
    // Indexed by copy count i in [1, n_tot - 1]; slot 0 unused.
    std::vector<double> p_tx;
    std::vector<double> p_deliver;
    std::vector<std::vector<double>> p_spread; // p_spread[i][k - 1] = p_{i + k, i}, k in [1, alpha - 1]
    std::vector<double> dwell;              // E[D_i]
    std::vector<DwellProfile> profiles;     // per-(n, i) intermediates
    int clamp_events = 0;
    std::vector<std::string> warnings;

    int max_copies() const { return n_tot - 1; }

    double spread(int from, int to) const {
        const int k = to - from;
        if (from < 1 || from > max_copies() || k < 1 || k > alpha - 1) return 0.0;
        return p_spread[static_cast<std::size_t>(from)][static_cast<std::size_t>(k - 1)];
    }
};

inline ContentionTables build_contention_tables(const NeighborChain &chain, const NeighborDistribution &dist,
                                                const MacParams &mac, int n_tot, double buffer,
                                                const ContentionOptions &opts = {}) {
    mac.validate();
    if (n_tot < 2) throw DomainError("contention: need at least two nodes");
    ClampCounter clamps;
    ContentionTables t;
    t.n_tot = n_tot;
    t.alpha = mac.alpha;
    t.buffer = buffer;
    const auto rows = static_cast<std::size_t>(n_tot);
    t.p_tx.assign(rows, 0.0);
    t.p_deliver.assign(rows, 0.0);
    t.p_spread.assign(rows, std::vector<double>(static_cast<std::size_t>(mac.alpha - 1), 0.0));
    t.dwell.assign(rows, 0.0);
    t.profiles.resize(rows);

    const double deliver = delivery_probability(dist, mac, n_tot, &clamps);
    for (int i = 1; i <= n_tot - 1; ++i) {
        const auto r = static_cast<std::size_t>(i);
        t.p_tx[r] = transmit_probability(i, n_tot, mac.pair_budget, buffer, &clamps);
        t.p_deliver[r] = deliver;
        double event_mass = deliver;
        for (int k = 1; k <= mac.alpha - 1; ++k) {
            const double p = copy_increase_probability(i, i + k, dist, mac, t.p_tx[r], opts, &clamps);
            t.p_spread[r][static_cast<std::size_t>(k - 1)] = p;
            event_mass += p;
        }
        if (event_mass > 1.0 + opts.support_tolerance)
            t.warnings.push_back("per-session event mass " + std::to_string(event_mass) +
                                 " exceeds one at i = " + std::to_string(i));
        t.profiles[r] = system_dwell_profile(chain, dist, mac, t.p_tx[r], &clamps);
        t.dwell[r] = expected_state_duration(i, t.profiles[r]);
    }
    t.clamp_events = clamps.count;
    if (clamps.count > 0)
        t.warnings.push_back(std::to_string(clamps.count) + " probabilities clamped into [0, 1]");
    return t;
}

} // namespace m2mdtn

#endif
