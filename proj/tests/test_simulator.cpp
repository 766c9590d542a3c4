#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "m2mdtn/sim/simulator.hpp"

using namespace m2mdtn;
using namespace m2mdtn::sim;

namespace {

SimConfig quiet_config(int n_tot) {
    SimConfig c;
    c.traffic = TrafficParams{0.0, n_tot};
    c.duration = 100;
    c.warmup = 0;
    return c;
}

SimConfig baseline(int n_tot, double bandwidth, double speed, std::uint64_t seed = 1) {
    SimConfig c;
    c.traffic = TrafficParams{0.2, n_tot};
    c.mac = MacParams::from_bandwidth(4, 0.1, bandwidth, 1e3);
    c.mobility = MobilityParams::from_mean_speed(speed, 5.0, 25.0, 0.0);
    c.seed = seed;
    return c;
}

} // namespace

TEST(Simulator, NoTrafficMeansNothingGenerated) {
    auto c = baseline(10, 15e3, 6.5);
    c.traffic.gen_rate = 0;
    c.duration = 2000;
    const auto m = run_simulation(c);
    EXPECT_EQ(m.generated, 0u);
    EXPECT_EQ(m.delivered, 0u);
    EXPECT_DOUBLE_EQ(m.delivery_ratio, 1.0);
    EXPECT_FALSE(m.mean_delay.has_value());
}

TEST(Simulator, ForcedContactDeliversInFirstSession) {
    Simulator sim(quiet_config(2));
    sim.pin_node(0, 5, 5);
    sim.pin_node(1, 6, 6);
    const auto id = sim.inject_message(0, 1);
    sim.step();
    ASSERT_TRUE(sim.message(id).delivered.has_value());
    EXPECT_DOUBLE_EQ(*sim.message(id).delivered, 0.1);
    EXPECT_EQ(sim.buffer_size(0), 0u); // recovered
}

TEST(Simulator, SingleNodeCellHasNoExchange) {
    Simulator sim(quiet_config(3));
    sim.inject_message(0, 1);
    const std::array<int, 1> cell{0};
    EXPECT_TRUE(sim.execute_m2m_session(cell).transfers.empty());
    EXPECT_TRUE(sim.execute_csma_session(cell).transfers.empty());
}

TEST(Simulator, PairBudgetAndFcfsOrder) {
    Simulator sim(quiet_config(3));
    const auto a = sim.inject_message(0, 2);
    const auto b = sim.inject_message(0, 2);
    const auto c = sim.inject_message(0, 2);
    const std::array<int, 2> cell{0, 1};
    auto log = sim.execute_m2m_session(cell);
    ASSERT_EQ(log.transfers.size(), 1u);
    EXPECT_EQ(log.transfers[0].message, a);
    log = sim.execute_m2m_session(cell);
    ASSERT_EQ(log.transfers.size(), 1u);
    EXPECT_EQ(log.transfers[0].message, b);
    log = sim.execute_m2m_session(cell);
    ASSERT_EQ(log.transfers.size(), 1u);
    EXPECT_EQ(log.transfers[0].message, c);
    EXPECT_TRUE(sim.execute_m2m_session(cell).transfers.empty());
    EXPECT_EQ(sim.buffer_contents(1), (std::vector<std::uint32_t>{a, b, c}));
}

TEST(Simulator, DestinationPriority) {
    Simulator sim(quiet_config(3));
    sim.inject_message(0, 2);
    sim.inject_message(0, 2);
    const auto to_peer = sim.inject_message(0, 1);
    const std::array<int, 2> cell{0, 1};
    const auto log = sim.execute_m2m_session(cell);
    ASSERT_EQ(log.transfers.size(), 1u);
    EXPECT_EQ(log.transfers[0].message, to_peer);
    EXPECT_TRUE(log.transfers[0].delivery);
    EXPECT_TRUE(sim.message(to_peer).delivered.has_value());
}

TEST(Simulator, ReceiverNeverGetsWhatItHeld) {
    auto c = quiet_config(3);
    c.mac.pair_budget = 5;
    Simulator sim(c);
    const auto m = sim.inject_message(0, 2);
    const std::array<int, 2> cell{0, 1};
    sim.execute_m2m_session(cell);
    EXPECT_TRUE(sim.holds(1, m));
    // Both hold it; nothing further moves in either direction.
    EXPECT_TRUE(sim.execute_m2m_session(cell).transfers.empty());
}

TEST(Simulator, DirectRecoveryPurgesCopies) {
    Simulator sim(quiet_config(4));
    const auto m = sim.inject_message(0, 3);
    const std::array<int, 2> s01{0, 1};
    sim.execute_m2m_session(s01);
    const std::array<int, 2> s12{1, 2};
    sim.execute_m2m_session(s12);
    EXPECT_EQ(sim.message(m).copies, 3);

    const std::array<int, 3> s123{1, 2, 3};
    const auto log = sim.execute_m2m_session(s123);
    EXPECT_TRUE(sim.message(m).delivered.has_value());
    EXPECT_FALSE(sim.holds(1, m));
    EXPECT_FALSE(sim.holds(2, m));
    EXPECT_TRUE(sim.holds(0, m));
    // Exactly one of the two holders delivered it.
    int deliveries = 0;
    for (const auto &t : log.transfers) deliveries += t.delivery;
    EXPECT_EQ(deliveries, 1);

    const std::array<int, 2> s03{0, 3};
    EXPECT_TRUE(sim.execute_m2m_session(s03).transfers.empty());
    EXPECT_FALSE(sim.holds(0, m));
    EXPECT_EQ(sim.message(m).copies, 0);
}

TEST(Simulator, M2mSelectionFrequency) {
    auto c = quiet_config(10);
    Simulator sim(c);
    std::vector<int> cell(10);
    for (int i = 0; i < 10; ++i) cell[static_cast<std::size_t>(i)] = i;
    std::vector<int> count(10, 0);
    const int sessions = 100'000;
    for (int s = 0; s < sessions; ++s) {
        const auto log = sim.execute_m2m_session(cell);
        ASSERT_EQ(log.participants.size(), 4u);
        for (int p : log.participants) ++count[static_cast<std::size_t>(p)];
    }
    for (int k : count) EXPECT_NEAR(static_cast<double>(k) / sessions, 0.4, 0.01);
}

TEST(Simulator, M2mSmallCellAllParticipate) {
    Simulator sim(quiet_config(5));
    const std::array<int, 3> cell{0, 2, 4};
    const auto log = sim.execute_m2m_session(cell);
    EXPECT_EQ(log.participants.size(), 3u);
}

TEST(Simulator, CsmaPairSelection) {
    Simulator sim(quiet_config(8));
    std::vector<int> cell(8);
    for (int i = 0; i < 8; ++i) cell[static_cast<std::size_t>(i)] = i;
    std::vector<int> count(8, 0);
    const int sessions = 100'000;
    for (int s = 0; s < sessions; ++s) {
        const auto log = sim.execute_csma_session(cell);
        ASSERT_EQ(log.participants.size(), 2u);
        ASSERT_NE(log.participants[0], log.participants[1]);
        for (int p : log.participants) ++count[static_cast<std::size_t>(p)];
    }
    for (int k : count) EXPECT_NEAR(static_cast<double>(k) / sessions, 2.0 / 8.0, 0.01);

    const std::array<int, 2> pair{3, 5};
    for (int s = 0; s < 100; ++s) {
        const auto log = sim.execute_csma_session(pair);
        ASSERT_EQ(log.participants.size(), 2u);
        EXPECT_EQ(log.participants[0] + log.participants[1], 8);
    }
}

TEST(Simulator, CsmaBudgetDefaultsToAlphaTimesPairBudget) {
    auto c = quiet_config(3);
    EXPECT_EQ(c.csma_budget(), 4);
    c.mac.pair_budget = 2;
    EXPECT_EQ(c.csma_budget(), 8);
    c.csma_pair_budget = 3;
    EXPECT_EQ(c.csma_budget(), 3);

    c = quiet_config(3);
    c.mode = MacMode::csma;
    Simulator sim(c);
    for (int k = 0; k < 6; ++k) sim.inject_message(0, 2);
    const std::array<int, 2> cell{0, 1};
    EXPECT_EQ(sim.execute_csma_session(cell).transfers.size(), 4u);
}

TEST(Simulator, KinematicsAndWrap) {
    auto c = quiet_config(2);
    c.mobility = MobilityParams{5.0, 5.0, 1e9, 0.0};
    Simulator sim(c);
    auto &m = sim.motion(0);
    m.x = 97.0;
    m.y = 50.0;
    set_epoch(m, 0.0, 5.0, 1e9);
    Engine rng = make_engine(1, Stream::mobility, 99);
    advance_mobility(m, 1.0, c.mobility, c.terrain, rng);
    EXPECT_NEAR(m.x, 2.0, 1e-9);
    EXPECT_NEAR(m.y, 50.0, 1e-9);
    advance_mobility(m, 1.0, c.mobility, c.terrain, rng);
    EXPECT_NEAR(m.x, 7.0, 1e-9);
}

TEST(Simulator, NoHaltMeansAlwaysMoving) {
    const MobilityParams mob{4.0, 9.0, 25.0, 0.0};
    const TerrainParams ter;
    Engine rng = make_engine(5, Stream::mobility, 0);
    auto m = random_start(mob, ter, rng);
    for (int k = 0; k < 10'000; ++k) {
        advance_mobility(m, 0.1, mob, ter, rng);
        EXPECT_TRUE(m.moving);
        EXPECT_GE(m.x, 0.0);
        EXPECT_LT(m.x, ter.side);
    }
}

TEST(Simulator, HaltsAreUniformAroundMean) {
    const MobilityParams mob{4.0, 9.0, 25.0, 3.0};
    Engine rng = make_engine(6, Stream::mobility, 0);
    double sum = 0, hi = 0;
    const int n = 100'000;
    for (int k = 0; k < n; ++k) {
        Motion m;
        start_halt(m, mob, rng);
        sum += m.phase_left;
        hi = std::max(hi, m.phase_left);
    }
    EXPECT_NEAR(sum / n, 3.0, 0.03);
    EXPECT_LE(hi, 6.0);
}

TEST(Simulator, StationaryPositionIsUniform) {
    const MobilityParams mob{4.0, 9.0, 25.0, 0.0};
    const TerrainParams ter;
    const int nodes = 1000, samples_per_node = 1000;
    std::vector<double> hist(static_cast<std::size_t>(ter.cell_count()), 0.0);
    for (int i = 0; i < nodes; ++i) {
        Engine rng = make_engine(77, Stream::mobility, static_cast<std::uint64_t>(i));
        auto m = random_start(mob, ter, rng);
        for (int k = 0; k < samples_per_node; ++k) {
            advance_mobility(m, 50.0, mob, ter, rng);
            ++hist[static_cast<std::size_t>(cell_index(m, ter))];
        }
    }
    const double expected = static_cast<double>(nodes) * samples_per_node / ter.cell_count();
    double chi2 = 0;
    for (double h : hist) chi2 += (h - expected) * (h - expected) / expected;
    // 99 degrees of freedom, 1% upper critical value.
    EXPECT_LT(chi2, 134.64);
}

TEST(Simulator, DeterministicForSameSeed) {
    auto c = baseline(10, 15e3, 6.5, 9);
    c.duration = 3000;
    const auto a = run_simulation(c);
    const auto b = run_simulation(c);
    EXPECT_TRUE(a == b);
    c.seed = 10;
    EXPECT_FALSE(a == run_simulation(c));
}

TEST(Simulator, MacModesShareMobilityAndTraffic) {
    auto c = baseline(20, 10e3, 7.0, 3);
    c.duration = 500;
    c.warmup = 100;
    Simulator m2m(c);
    c.mode = MacMode::csma;
    Simulator csma(c);
    for (int k = 0; k < 2000; ++k) {
        m2m.step();
        csma.step();
    }
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(m2m.motion(i).x, csma.motion(i).x);
        EXPECT_EQ(m2m.motion(i).y, csma.motion(i).y);
    }
    ASSERT_EQ(m2m.messages().size(), csma.messages().size());
    for (std::size_t k = 0; k < m2m.messages().size(); ++k) {
        EXPECT_EQ(m2m.messages()[k].source, csma.messages()[k].source);
        EXPECT_EQ(m2m.messages()[k].destination, csma.messages()[k].destination);
        EXPECT_EQ(m2m.messages()[k].created, csma.messages()[k].created);
    }
}

TEST(Simulator, ConservationAndSessionSynchrony) {
    auto c = baseline(10, 15e3, 6.5, 4);
    c.duration = 3000;
    c.warmup = 0;
    Simulator sim(c);
    while (sim.now() < c.duration) {
        sim.step();
        for (const auto &msg : sim.messages()) ASSERT_LE(msg.copies, 9);
    }
    std::uint64_t delivered = 0;
    for (const auto &msg : sim.messages()) {
        EXPECT_NE(msg.source, msg.destination);
        if (!msg.delivered) continue;
        ++delivered;
        EXPECT_GE(*msg.delivered, msg.created);
        const double sessions = *msg.delivered / 0.1;
        EXPECT_NEAR(sessions, std::round(sessions), 1e-6);
    }
    for (int n = 0; n < 10; ++n)
        for (auto id : sim.buffer_contents(n)) EXPECT_NE(sim.message(id).destination, n);
    const auto m = sim.metrics();
    EXPECT_EQ(m.delivered, delivered);
    EXPECT_LE(m.delivered, m.generated);
}

TEST(Simulator, BaselineDeliveryRatio) {
    const auto m = run_simulation(baseline(10, 15e3, 6.5));
    EXPECT_GE(m.delivery_ratio, 0.85);
    ASSERT_TRUE(m.mean_delay.has_value());
}

TEST(Simulator, DelayDecreasesWithSpeed) {
    double prev = 1e300;
    for (double v : {5.0, 6.0, 7.0, 8.0}) {
        const auto m = run_simulation(baseline(10, 15e3, v));
        ASSERT_TRUE(m.mean_delay.has_value());
        EXPECT_LT(*m.mean_delay, prev) << "v=" << v;
        prev = *m.mean_delay;
    }
}

TEST(Simulator, ConfigValidation) {
    auto c = quiet_config(2);
    c.warmup = c.duration;
    EXPECT_THROW(Simulator{c}, ConfigError);
    c = quiet_config(1);
    EXPECT_THROW(Simulator{c}, ConfigError);
    c = quiet_config(3);
    c.traffic.gen_rate = -1;
    EXPECT_THROW(Simulator{c}, ConfigError);
}

TEST(Metrics, Cases) {
    MetricsWindow w{0, 100, 0, 50};
    std::vector<Message> msgs{{0, 0, 1, 10.0, std::nullopt, 0, 1}};
    auto m = collect_metrics(msgs, w, 0, 2);
    EXPECT_DOUBLE_EQ(m.delivery_ratio, 0.0);
    EXPECT_FALSE(m.mean_delay.has_value());
    msgs[0].delivered = 15.0;
    m = collect_metrics(msgs, w, 0, 2);
    EXPECT_DOUBLE_EQ(m.delivery_ratio, 1.0);
    ASSERT_TRUE(m.mean_delay.has_value());
    EXPECT_DOUBLE_EQ(*m.mean_delay, 5.0);
    ASSERT_EQ(m.timeseries.size(), 2u);
    EXPECT_DOUBLE_EQ(*m.timeseries[0].mean_delay, 5.0);
    EXPECT_FALSE(m.timeseries[1].mean_delay.has_value());
}

TEST(Metrics, WarmupAndTailGuardExcludeMessages) {
    MetricsWindow w{20, 100, 10, 500};
    std::vector<Message> msgs{{0, 0, 1, 10.0, 12.0, 0, 1}, {1, 0, 1, 50.0, 60.0, 0, 1},
                              {2, 0, 1, 95.0, std::nullopt, 0, 1}};
    const auto m = collect_metrics(msgs, w, 0, 2);
    EXPECT_EQ(m.generated, 1u);
    EXPECT_DOUBLE_EQ(*m.mean_delay, 10.0);
}
