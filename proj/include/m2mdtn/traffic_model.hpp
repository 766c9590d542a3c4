#ifndef M2MDTN_TRAFFIC_MODEL_HPP
#define M2MDTN_TRAFFIC_MODEL_HPP

// Arrival-rate accounting, per-session and per-contact success probabilities,
// expected waiting time and Little's-law buffer occupancy.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "m2mdtn/errors.hpp"
#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/neighbor_chain.hpp"

namespace m2mdtn {

struct TrafficParams {
    double gen_rate = 0.2; // messages/s generated per node, uniform random destination
    int n_tot = 10;

    void validate() const {
        if (n_tot < 2) throw DomainError("traffic: need at least two nodes (one destination)");
        if (!(gen_rate > 0)) throw DomainError("traffic: generation rate must be positive");
    }
};

struct TrafficStats {
    double total_rate = 0;           // lambda
    double relay_rate = 0;           // lambda_rel
    std::vector<double> p_comm;      // p_comm[j] = min(alpha / (j + 1), 1)
    double p_succ_session = 0;       // p'_succ
    double p_succ = 0;               // per contact
    double wait = 0;                 // E[W], s
    double buffer = 0;               // E[B], messages
    std::vector<std::string> warnings;
};

// Probability that a node in a cell with j neighbours is admitted to a session.
inline double admission_probability(int alpha, int neighbors) {
    return std::min(static_cast<double>(alpha) / (neighbors + 1), 1.0);
}

// Relay arrivals are approximated by their stability lower bound
// lambda_gen * (n_tot - 1).
inline double relay_arrival_rate(const TrafficParams &traffic) {
    traffic.validate();
    return traffic.gen_rate * (traffic.n_tot - 1);
}

inline double total_arrival_rate(const TrafficParams &traffic) {
    return traffic.gen_rate + relay_arrival_rate(traffic);
}

// Both ends must be admitted; conditioned on having at least one neighbour.
inline double session_success_probability(const NeighborDistribution &dist, const MacParams &mac) {
    const double busy = dist.mass_at_least_one();
    if (!(busy > 0)) throw DegenerateError("p'_succ: neighbour distribution has no mass at j >= 1");
    double p = 0;
    for (int j = 1; j <= dist.n_max(); ++j) {
        const double admit = admission_probability(mac.alpha, j);
        p += dist[j] / busy * admit * admit;
    }
    return p;
}

// T_con / tau is used as a real-valued session count.
inline double contact_success_probability(double p_session, const MobilityStats &stats,
                                          const MacParams &mac) {
    if (!(stats.contact > 0) || !(mac.session_time > 0))
        throw DomainError("p_succ: contact time and session time must be positive");
    if (p_session < 0 || p_session > 1) throw DomainError("p_succ: p'_succ outside [0, 1]");
    const double sessions = stats.contact / mac.session_time;
    return 1.0 - std::pow(1.0 - p_session, sessions);
}

inline double expected_waiting_time(const MobilityStats &stats, double p_succ) {
    if (!(p_succ > 0) || p_succ > 1) throw DomainError("E[W]: p_succ must lie in (0, 1]");
    return stats.intermeeting_time / p_succ;
}

// Little's law.
inline double expected_buffer_occupancy(double total_rate, double wait) { return total_rate * wait; }

inline TrafficStats compute_traffic_stats(const TrafficParams &traffic, const NeighborDistribution &dist,
                                          const MobilityStats &stats, const MacParams &mac) {
    TrafficStats t;
    t.relay_rate = relay_arrival_rate(traffic);
    t.total_rate = total_arrival_rate(traffic);
    t.p_comm.resize(dist.v.size());
    for (int j = 0; j <= dist.n_max(); ++j)
        t.p_comm[static_cast<std::size_t>(j)] = admission_probability(mac.alpha, j);
    t.p_succ_session = session_success_probability(dist, mac);
    t.p_succ = contact_success_probability(t.p_succ_session, stats, mac);
    t.wait = expected_waiting_time(stats, t.p_succ);
    t.buffer = expected_buffer_occupancy(t.total_rate, t.wait);
    if (stats.contact < mac.session_time)
        t.warnings.push_back("mean contact shorter than one session: p_succ may fall below p'_succ");
    return t;
}

} // namespace m2mdtn

#endif
