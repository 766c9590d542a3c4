#include <gtest/gtest.h>

#include <cmath>

#include "m2mdtn/analysis.hpp"
#include "m2mdtn/contention.hpp"
#include "m2mdtn/oracles.hpp"

using namespace m2mdtn;

namespace {

ModelResult baseline_model() {
    ModelInput in;
    in.traffic = TrafficParams{0.2, 10};
    return run_model(in);
}

} // namespace

TEST(TransmitProbability, Cases) {
    EXPECT_DOUBLE_EQ(transmit_probability(10, 10, 1, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(transmit_probability(1, 10, 1, 10.0), 0.1);
    EXPECT_NEAR(transmit_probability(5, 10, 1, 10.0), 0.0556, 5e-5);
    EXPECT_THROW(transmit_probability(0, 10, 1, 10.0), DomainError);
    EXPECT_THROW(transmit_probability(11, 10, 1, 10.0), DomainError);
    EXPECT_THROW(transmit_probability(1, 10, 1, 0.0), DomainError);
}

TEST(TransmitProbability, ClampedAndCounted) {
    ClampCounter c;
    EXPECT_DOUBLE_EQ(transmit_probability(1, 10, 5, 0.5, &c), 1.0);
    EXPECT_EQ(c.count, 1);
}

TEST(TransmitProbability, DecreasingInCopiesAndLoad) {
    double prev = 2;
    for (int i = 1; i <= 10; ++i) {
        const double p = transmit_probability(i, 10, 1, 20.0);
        EXPECT_LT(p, prev);
        prev = p;
    }
    prev = 2;
    for (double b : {5.0, 10.0, 50.0, 500.0}) {
        const double p = transmit_probability(3, 10, 1, b);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(CopyIncrease, SupportBound) {
    const auto d = NeighborDistribution::point_mass(1, 5);
    MacParams m;
    EXPECT_DOUBLE_EQ(copy_increase_probability(2, 2 + m.alpha, d, m, 0.3), 0.0);
    EXPECT_THROW(copy_increase_probability(2, 2, d, m, 0.3), DomainError);
    EXPECT_THROW(copy_increase_probability(0, 2, d, m, 0.3), DomainError);
}

TEST(CopyIncrease, SingleTerm) {
    const auto d = NeighborDistribution::point_mass(1, 5);
    MacParams m;
    EXPECT_DOUBLE_EQ(copy_increase_probability(1, 2, d, m, 0.37), 0.37);
}

TEST(CopyIncrease, CombinatorialVariant) {
    const auto d = NeighborDistribution::point_mass(3, 5);
    MacParams m;
    const double p = 0.2;
    const double plain = copy_increase_probability(1, 2, d, m, p);
    EXPECT_NEAR(plain, p * (1 - p) * (1 - p), 1e-15);
    ContentionOptions o;
    o.combinatorial_spread = true;
    EXPECT_NEAR(copy_increase_probability(1, 2, d, m, p, o), 3 * plain, 1e-15);
}

TEST(CopyIncrease, DecreasesWithLoad) {
    const auto r = baseline_model();
    double prev = 1;
    for (double buffer : {r.traffic.buffer, 2 * r.traffic.buffer, 10 * r.traffic.buffer}) {
        const double ptx = transmit_probability(2, 10, 1, buffer);
        const double p = copy_increase_probability(2, 3, r.neighbors, MacParams{}, ptx);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(DeliveryProbability, Cases) {
    MacParams m;
    EXPECT_DOUBLE_EQ(delivery_probability(NeighborDistribution::point_mass(1, 3), m, 11), 0.1);
    EXPECT_DOUBLE_EQ(delivery_probability(NeighborDistribution::point_mass(0, 3), m, 11), 0.0);
}

TEST(NoSpread, Cases) {
    EXPECT_DOUBLE_EQ(no_spread_probability(0, 4, 0.1), 1.0);
    EXPECT_NEAR(no_spread_probability(2, 4, 0.1), 0.81, 1e-15);
    EXPECT_NEAR(no_spread_probability(8, 4, 0.1), 1 - 0.5 + 0.5 * std::pow(0.9, 8), 1e-15);
    EXPECT_NEAR(no_spread_probability(8, 4, 0.1), 0.7152, 5e-5);
}

TEST(StateDwell, Cases) {
    EXPECT_DOUBLE_EQ(state_dwell_time(0.0, 0.5, 0.1), 0.1);
    EXPECT_NEAR(state_dwell_time(0.9, 0.81, 0.1) / 0.1, 3.690, 5e-4);
    EXPECT_THROW(state_dwell_time(1.0, 1.0, 0.1), DegenerateError);
}

TEST(SystemDwell, TerminationAndNoLeak) {
    const auto r = baseline_model();
    const auto &prof = r.contention.profiles[1];
    const auto top = prof.dwell.size() - 1;
    EXPECT_DOUBLE_EQ(prof.system_dwell[top], prof.dwell[top]);
    for (std::size_t n = 0; n < prof.dwell.size(); ++n) EXPECT_GE(prof.system_dwell[n], prof.dwell[n] - 1e-12);

    // Above state 0 the chain never moves up, so p_up = 0 and E[t^n] = E[t_n] there.
    const auto flat = NeighborChain::from_probabilities({0.5, 0.0, 0.0}, {0.0, 0.1, 0.1});
    const NeighborDistribution d{{1.0, 0.0, 0.0}};
    const auto p = system_dwell_profile(flat, d, MacParams{}, 0.3);
    for (std::size_t n = 1; n < 3; ++n) EXPECT_DOUBLE_EQ(p.system_dwell[n], p.dwell[n]);
    EXPECT_GT(p.system_dwell[0], p.dwell[0]);
}

TEST(SystemDwell, NonincreasingInTransmitProbability) {
    const auto r = baseline_model();
    std::vector<double> prev;
    for (double ptx : {0.01, 0.05, 0.2, 0.6, 1.0}) {
        const auto p = system_dwell_profile(r.chain, r.neighbors, MacParams{}, ptx);
        if (!prev.empty())
            for (std::size_t n = 0; n < prev.size(); ++n) {
                EXPECT_LE(p.system_dwell[n], prev[n] + 1e-12);
            }
        prev = p.system_dwell;
    }
}

TEST(StateDuration, InverseInCopies) {
    const auto r = baseline_model();
    const auto &t = r.contention;
    EXPECT_DOUBLE_EQ(t.dwell[1], t.profiles[1].system_dwell[0]);
    EXPECT_DOUBLE_EQ(t.dwell[2], t.profiles[2].system_dwell[0] / 2);
    EXPECT_THROW(expected_state_duration(0, t.profiles[1]), DomainError);
    for (int i = 1; i < 10; ++i) EXPECT_GT(t.dwell[static_cast<std::size_t>(i)], 0.0);
}

TEST(ContentionTables, BaselineInvariants) {
    const auto r = baseline_model();
    const auto &t = r.contention;
    for (int i = 1; i <= 9; ++i) {
        const auto s = static_cast<std::size_t>(i);
        EXPECT_GE(t.p_tx[s], 0.0);
        EXPECT_LE(t.p_tx[s], 1.0);
        if (i > 1) {
            EXPECT_LT(t.p_tx[s], t.p_tx[s - 1]);
        }
        double mass = t.p_deliver[s];
        for (int k = 1; k <= 3; ++k) mass += t.spread(i, i + k);
        EXPECT_LE(mass, 1.0 + 0.05);
        EXPECT_DOUBLE_EQ(t.spread(i, i + 4), 0.0);
    }
    EXPECT_EQ(t.clamp_events, 0);
}

TEST(ContentionTables, SessionMonteCarloAgreement) {
    const auto r = baseline_model();
    const auto &t = r.contention;
    const std::uint64_t trials = 1'000'000;
    for (int i : {1, 2, 5}) {
        auto rng = sim::make_engine(11, sim::Stream::oracle, static_cast<std::uint64_t>(i));
        const auto est = oracle::mc_session_spread(r.neighbors, 4, 10, i, t.p_tx[static_cast<std::size_t>(i)],
                                                   trials, rng);
        for (int k = 1; k <= 3; ++k) {
            const double p0 = t.spread(i, i + k);
            const double se = oracle::null_std_error(p0, i, trials);
            EXPECT_LE(std::abs(est.spread[static_cast<std::size_t>(k - 1)].mean() - p0), 3 * se + 1e-12)
                << "i=" << i << " k=" << k;
        }
        const double pd = t.p_deliver[static_cast<std::size_t>(i)];
        EXPECT_LE(std::abs(est.deliver.mean() - pd), 3 * oracle::null_std_error(pd, 1, trials));
    }
}

TEST(ContentionTables, DwellMonteCarloAgreement) {
    const auto r = baseline_model();
    const auto &t = r.contention;
    const auto &prof = t.profiles[1];
    auto rng = sim::make_engine(12, sim::Stream::oracle, 0);
    oracle::DwellOptions o;
    o.start_state = 1;
    o.samples = 10'000;
    const auto s = oracle::mc_dwell_sampler(r.chain, 4, t.p_tx[1], 0.1, o, rng);
    EXPECT_LE(std::abs(s.state_dwell.mean() - prof.dwell[1]), 3 * s.state_dwell.std_error());
}
