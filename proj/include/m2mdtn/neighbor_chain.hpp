#ifndef M2MDTN_NEIGHBOR_CHAIN_HPP
#define M2MDTN_NEIGHBOR_CHAIN_HPP

// Discrete-time birth-death chain over the number of neighbours a node has
// at the start of each communication session, and its stationary law.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "m2mdtn/errors.hpp"
#include "m2mdtn/mobility_stats.hpp"

namespace m2mdtn {

struct MacParams {
    int alpha = 4;                 // nodes admitted per session
    double session_time = 0.1;     // s
    int pair_budget = 1;           // messages per ordered pair per session
    double link_bandwidth = 15e3;  // bit/s
    double message_size = 1e3;     // bit

    static int budget_from_bandwidth(double link_bandwidth, double session_time,
                                     double message_size) {
        if (!(message_size > 0)) throw DomainError("message size must be positive");
        const auto fit = std::floor(link_bandwidth * session_time / message_size + 1e-9);
        return std::max(1, static_cast<int>(fit));
    }

    static MacParams from_bandwidth(int alpha, double session_time, double link_bandwidth,
                                    double message_size) {
        return {alpha, session_time,
                budget_from_bandwidth(link_bandwidth, session_time, message_size),
                link_bandwidth, message_size};
    }

    void validate() const {
        if (alpha < 2) throw DomainError("mac: alpha must be at least 2");
        if (!(session_time > 0)) throw DomainError("mac: session time must be positive");
        if (pair_budget < 1) throw DomainError("mac: pair budget must be at least 1");
    }
};

class NeighborChain {
  public:
    NeighborChain() = default;

    int n_max() const { return static_cast<int>(up_.size()) - 1; }
    int states() const { return static_cast<int>(up_.size()); }

    double up(int n) const { return up_.at(n); }
    double down(int n) const { return down_.at(n); }
    double stay(int n) const { return stay_.at(n); }
    double arrival_rate(int n) const { return arrival_.at(n); }
    double departure_rate(int n) const { return departure_.at(n); }

    // P(to | from); zero outside the tridiagonal band.
    double prob(int from, int to) const {
        if (from < 0 || from > n_max() || to < 0 || to > n_max()) return 0.0;
        if (to == from + 1) return up_[from];
        if (to == from - 1) return down_[from];
        if (to == from) return stay_[from];
        return 0.0;
    }

    const std::vector<std::string> &warnings() const { return warnings_; }

    // Raw construction from per-state up/down probabilities; used by the
    // builder and by tests that need hand-made chains.
    static NeighborChain from_probabilities(std::vector<double> up, std::vector<double> down) {
        if (up.empty() || up.size() != down.size())
            throw DomainError("neighbor chain: up/down vectors must be non-empty and equal length");
        NeighborChain c;
        const auto n = up.size();
        c.up_ = std::move(up);
        c.down_ = std::move(down);
        c.up_.back() = 0.0;
        c.down_.front() = 0.0;
        c.stay_.resize(n);
        c.arrival_.assign(n, 0.0);
        c.departure_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (c.up_[i] < 0 || c.down_[i] < 0 || c.up_[i] + c.down_[i] > 1.0 + 1e-15)
                throw DomainError("neighbor chain: invalid transition probabilities");
            c.stay_[i] = 1.0 - c.up_[i] - c.down_[i];
        }
        return c;
    }

  private:
    friend NeighborChain build_neighbor_chain(const MobilityStats &, const MacParams &, int, int);

    std::vector<double> up_, down_, stay_;
    std::vector<double> arrival_, departure_;
    std::vector<std::string> warnings_;
};

struct NeighborDistribution {
    std::vector<double> v; // v[j] = P(N_nhb = j), j = 0..N_max

    int n_max() const { return static_cast<int>(v.size()) - 1; }
    double operator[](int j) const { return j >= 0 && j < static_cast<int>(v.size()) ? v[j] : 0.0; }

    double mass_at_least_one() const {
        return v.size() > 1 ? std::accumulate(v.begin() + 1, v.end(), 0.0) : 0.0;
    }

    double mean() const {
        double m = 0;
        for (std::size_t j = 0; j < v.size(); ++j) m += static_cast<double>(j) * v[j];
        return m;
    }

    // Point mass at j; handy for degenerate-distribution probes.
    static NeighborDistribution point_mass(int j, int n_max) {
        NeighborDistribution d;
        d.v.assign(static_cast<std::size_t>(std::max(n_max, j)) + 1, 0.0);
        d.v[static_cast<std::size_t>(j)] = 1.0;
        return d;
    }
};

// Arrivals come from the n_tot - 1 - n nodes not currently in the cell;
// departures from each of the n neighbours.
inline NeighborChain build_neighbor_chain(const MobilityStats &stats, const MacParams &mac,
                                          int n_tot, int n_max) {
    mac.validate();
    if (n_tot < 2) throw DomainError("neighbor chain: need at least two nodes");
    if (n_max < 0 || n_max >= n_tot)
        throw DomainError("neighbor chain: n_max must lie in [0, n_tot - 1]");
    if (!(stats.intermeeting_time > 0)) throw DomainError("neighbor chain: T_im must be positive");
    if (!(stats.contact > 0)) throw DomainError("neighbor chain: T_con must be positive");

    const double tau = mac.session_time;
    const auto states = static_cast<std::size_t>(n_max) + 1;
    NeighborChain c;
    c.up_.resize(states);
    c.down_.resize(states);
    c.stay_.resize(states);
    c.arrival_.resize(states);
    c.departure_.resize(states);

    for (std::size_t s = 0; s < states; ++s) {
        const double n = static_cast<double>(s);
        const double lambda = (n_tot - 1 - n) / stats.intermeeting_time;
        const double mu = n / stats.contact;
        const double one_arrival = lambda * tau * std::exp(-lambda * tau);
        const double one_departure = mu * tau * std::exp(-mu * tau);
        c.arrival_[s] = lambda;
        c.departure_[s] = mu;
        c.up_[s] = one_arrival * (1.0 - one_departure);
        c.down_[s] = (1.0 - one_arrival) * one_departure;
    }
    // Upward mass at the cap stays put.
    c.up_[states - 1] = 0.0;
    for (std::size_t s = 0; s < states; ++s) c.stay_[s] = 1.0 - c.up_[s] - c.down_[s];

    if (tau > 0.25 * stats.contact)
        c.warnings_.push_back("session time is not small relative to the mean contact time");
    return c;
}

// Stationary law of a tridiagonal chain from the balance equations
// v[n+1] * down[n+1] = v[n] * up[n].
inline NeighborDistribution steady_state(const NeighborChain &chain) {
    const int n_max = chain.n_max();
    if (n_max < 0) throw DegenerateError("steady state: empty chain");
    std::vector<double> w(static_cast<std::size_t>(n_max) + 1, 0.0);
    w[0] = 1.0;
    for (int n = 0; n < n_max; ++n) {
        const double up = chain.up(n);
        const double down = chain.down(n + 1);
        if (up == 0.0) break; // states above n are unreachable
        if (down == 0.0)
            throw DegenerateError("steady state: balance equations are singular (no return from state " +
                                  std::to_string(n + 1) + ")");
        w[n + 1] = w[n] * (up / down);
        if (!std::isfinite(w[n + 1])) throw DegenerateError("steady state: overflow in balance solve");
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto &x : w) x /= total;
    return {std::move(w)};
}

// Smallest cap whose tail mass is below `tail` under the rate-level
// birth-death process (arrival rate (n_tot - 1 - n) / T_im, departure rate
// n / T_con, capped at n_tot - 1). The session-level chain is only trusted
// where at most one event per session is likely, so its own tail is not used.
inline int default_n_max(const MobilityStats &stats, int n_tot, double tail = 1e-6) {
    if (n_tot < 2) throw DomainError("n_max: need at least two nodes");
    if (!(stats.intermeeting_time > 0) || !(stats.contact > 0))
        throw DomainError("n_max: T_im and T_con must be positive");
    std::vector<double> w(static_cast<std::size_t>(n_tot), 0.0);
    w[0] = 1.0;
    for (int n = 0; n + 1 < n_tot; ++n) {
        const double lambda = (n_tot - 1 - n) / stats.intermeeting_time;
        const double mu_next = (n + 1) / stats.contact;
        w[static_cast<std::size_t>(n) + 1] = w[static_cast<std::size_t>(n)] * lambda / mu_next;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<double> above(w.size(), 0.0); // above[n] = P(N > n)
    for (int n = n_tot - 2; n >= 0; --n)
        above[static_cast<std::size_t>(n)] =
            above[static_cast<std::size_t>(n) + 1] + w[static_cast<std::size_t>(n) + 1] / total;
    for (int n = 1; n <= n_tot - 1; ++n)
        if (above[static_cast<std::size_t>(n)] < tail) return n;
    return n_tot - 1;
}

} // namespace m2mdtn

#endif
