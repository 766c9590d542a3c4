#include <gtest/gtest.h>

#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/neighbor_chain.hpp"
#include "m2mdtn/traffic_model.hpp"

using namespace m2mdtn;

namespace {

MobilityStats baseline_stats() {
    return compute_mobility_stats(MobilityParams{4.0, 9.0, 25.0, 0.0}, TerrainParams{100.0, 10.0});
}

} // namespace

TEST(ArrivalRate, TotalIsGenTimesNodes) {
    EXPECT_DOUBLE_EQ(total_arrival_rate(TrafficParams{0.2, 10}), 2.0);
    EXPECT_DOUBLE_EQ(relay_arrival_rate(TrafficParams{0.2, 10}), 0.2 * 9);
    EXPECT_DOUBLE_EQ(total_arrival_rate(TrafficParams{0.2, 2}), 0.4);
    EXPECT_THROW(total_arrival_rate(TrafficParams{0.2, 1}), DomainError);
    EXPECT_THROW(total_arrival_rate(TrafficParams{0.0, 10}), DomainError);
}

TEST(SessionSuccess, NoContentionRegime) {
    // alpha >= N_max + 1: every admission term is one.
    NeighborDistribution d{{0.5, 0.3, 0.15, 0.05}};
    MacParams m;
    m.alpha = 4;
    EXPECT_DOUBLE_EQ(session_success_probability(d, m), 1.0);
}

TEST(SessionSuccess, PointMasses) {
    MacParams m;
    EXPECT_DOUBLE_EQ(session_success_probability(NeighborDistribution::point_mass(1, 3), m), 1.0);
    EXPECT_DOUBLE_EQ(session_success_probability(NeighborDistribution::point_mass(7, 7), m), 0.25);
    EXPECT_THROW(session_success_probability(NeighborDistribution::point_mass(0, 3), m), DegenerateError);
}

TEST(SessionSuccess, ConditionsOnBusyStates) {
    NeighborDistribution d{{0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1}};
    EXPECT_DOUBLE_EQ(session_success_probability(d, MacParams{}), 0.25);
}

TEST(ContactSuccess, Cases) {
    auto st = baseline_stats();
    MacParams m;
    EXPECT_DOUBLE_EQ(contact_success_probability(1.0, st, m), 1.0);
    st.contact = 0.2; // T_con / tau = 2
    EXPECT_NEAR(contact_success_probability(0.25, st, m), 0.4375, 1e-15);
}

TEST(ContactSuccess, MonotoneAndLimit) {
    auto st = baseline_stats();
    MacParams m;
    double prev = 0;
    for (double tcon : {0.1, 0.5, 1.0, 5.0, 50.0, 500.0}) {
        st.contact = tcon;
        const double p = contact_success_probability(0.05, st, m);
        EXPECT_GT(p, prev);
        prev = p;
    }
    EXPECT_NEAR(prev, 1.0, 1e-9);
    st = baseline_stats();
    prev = 0;
    for (double ps : {0.01, 0.1, 0.3, 0.9}) {
        const double p = contact_success_probability(ps, st, m);
        EXPECT_GT(p, prev);
        EXPECT_GE(p, ps);
        prev = p;
    }
}

TEST(WaitingTime, Cases) {
    auto st = baseline_stats();
    EXPECT_DOUBLE_EQ(expected_waiting_time(st, 1.0), st.intermeeting_time);
    st.intermeeting_time = 58.43;
    EXPECT_NEAR(expected_waiting_time(st, 0.4375), 133.55, 0.005);
    EXPECT_THROW(expected_waiting_time(st, 0.0), DomainError);
}

TEST(WaitingTime, NonincreasingInAlpha) {
    const auto st = baseline_stats();
    NeighborDistribution d{{0.3, 0.2, 0.15, 0.1, 0.1, 0.05, 0.05, 0.05}};
    double prev = 1e300;
    for (int alpha : {2, 3, 4, 6, 8, 10}) {
        MacParams m;
        m.alpha = alpha;
        const double w =
            expected_waiting_time(st, contact_success_probability(session_success_probability(d, m), st, m));
        EXPECT_LE(w, prev);
        prev = w;
    }
}

TEST(BufferOccupancy, LittlesLaw) {
    EXPECT_NEAR(expected_buffer_occupancy(2.0, 58.43), 116.86, 1e-9);
    EXPECT_DOUBLE_EQ(expected_buffer_occupancy(0.0, 58.43), 0.0);
}

TEST(TrafficStats, BaselineInvariants) {
    const auto st = baseline_stats();
    const auto chain = build_neighbor_chain(st, MacParams{}, 10, default_n_max(st, 10));
    const auto d = steady_state(chain);
    const auto t = compute_traffic_stats(TrafficParams{0.2, 10}, d, st, MacParams{});
    EXPECT_DOUBLE_EQ(t.total_rate, 0.2 + t.relay_rate);
    EXPECT_GT(t.p_succ_session, 0.0);
    EXPECT_LE(t.p_succ_session, t.p_succ);
    EXPECT_LE(t.p_succ, 1.0);
    EXPECT_DOUBLE_EQ(t.buffer, t.total_rate * t.wait);
    EXPECT_GE(t.wait, st.intermeeting_time);
    EXPECT_TRUE(t.warnings.empty());
}
