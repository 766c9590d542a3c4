#include <gtest/gtest.h>

#include <cmath>

#include "m2mdtn/analysis.hpp"
#include "m2mdtn/config.hpp"
#include "m2mdtn/sim/simulator.hpp"

using namespace m2mdtn;

// Simulated buffer occupancy against the Little's-law estimate that feeds
// the transmit probability. Kept apart from the simulator unit tests since
// it compares the model with the simulator rather than checking mechanics.
TEST(ModelAgreement, BufferOccupancyNearLittlesLaw) {
    const auto spec = config::parse_config_text("");
    const auto point = spec.grid().front();
    const auto model = run_model(spec.model_input(point));
    double sum = 0;
    for (std::uint64_t seed : {1, 2, 3}) sum += sim::run_simulation(spec.sim_config(point, seed)).mean_buffer;
    const double simulated = sum / 3;
    EXPECT_LE(std::abs(simulated - model.traffic.buffer), 0.30 * model.traffic.buffer)
        << "simulated " << simulated << " vs E[B] " << model.traffic.buffer;
}

TEST(ModelAgreement, DelayOrderingMatchesSimulation) {
    // Both sides agree that a higher link rate shortens delivery.
    auto spec = config::parse_config_text("bandwidth = 15000, 50000\n");
    const auto g = spec.grid();
    const double slow = sim::run_simulation(spec.sim_config(g[0], 1)).mean_delay.value();
    const double fast = sim::run_simulation(spec.sim_config(g[1], 1)).mean_delay.value();
    EXPECT_LT(fast, slow);
    EXPECT_LT(run_model(spec.model_input(g[1])).delay, run_model(spec.model_input(g[0])).delay);
}
