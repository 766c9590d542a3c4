#ifndef M2MDTN_ANALYSIS_HPP
#define M2MDTN_ANALYSIS_HPP

// Full analytical chain for one configuration:
// mobility stats -> neighbour chain -> traffic -> contention -> E[D].

#include <optional>
#include <string>
#include <vector>

#include "m2mdtn/contention.hpp"
#include "m2mdtn/delay_solver.hpp"
#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/neighbor_chain.hpp"
#include "m2mdtn/traffic_model.hpp"

namespace m2mdtn {

struct ModelInput {
    TerrainParams terrain;
    MobilityParams mobility;
    MacParams mac;
    TrafficParams traffic;
    std::optional<int> n_max; // default: tail-mass rule
    ContentionOptions contention;
};

struct ModelResult {
    ModelInput input;
    MobilityStats mobility;
    int n_max = 0;
    NeighborChain chain;
    NeighborDistribution neighbors;
    TrafficStats traffic;
    ContentionTables contention;
    CopyDigraph digraph;
    std::vector<double> visit_probability; // P(Path(1, i)), slot 0 unused
    double delay = 0;                      // E[D], s
    double delay_visits = 0;               // visit-weighted cross-check
    std::vector<std::string> warnings;
};

inline ModelResult run_model(const ModelInput &in) {
    ModelResult r;
    r.input = in;
    in.terrain.validate();
    in.mobility.validate();
    in.mac.validate();
    in.traffic.validate();
    const int n_tot = in.traffic.n_tot;

    r.mobility = compute_mobility_stats(in.mobility, in.terrain);
    r.n_max = in.n_max ? *in.n_max : default_n_max(r.mobility, n_tot);
    r.chain = build_neighbor_chain(r.mobility, in.mac, n_tot, r.n_max);
    r.neighbors = steady_state(r.chain);
    r.traffic = compute_traffic_stats(in.traffic, r.neighbors, r.mobility, in.mac);
    r.contention = build_contention_tables(r.chain, r.neighbors, in.mac, n_tot, r.traffic.buffer, in.contention);
    r.digraph = build_copy_digraph(r.contention);
    r.visit_probability = forward_path_probabilities(r.digraph);
    r.delay = expected_delivery_delay(r.digraph);
    r.delay_visits = expected_delivery_delay_visits(r.digraph);

    for (const auto &w : r.chain.warnings()) r.warnings.push_back(w);
    for (const auto &w : r.traffic.warnings) r.warnings.push_back(w);
    for (const auto &w : r.contention.warnings) r.warnings.push_back(w);
    return r;
}

} // namespace m2mdtn

#endif
