#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/neighbor_chain.hpp"
#include "m2mdtn/oracles.hpp"

using namespace m2mdtn;

namespace {

MobilityStats baseline_stats() {
    return compute_mobility_stats(MobilityParams{4.0, 9.0, 25.0, 0.0}, TerrainParams{100.0, 10.0});
}

NeighborChain baseline_chain(int n_tot = 10) {
    const auto st = baseline_stats();
    return build_neighbor_chain(st, MacParams{}, n_tot, default_n_max(st, n_tot));
}

} // namespace

TEST(MacParams, BudgetFromBandwidth) {
    EXPECT_EQ(MacParams::budget_from_bandwidth(10e3, 0.1, 1e3), 1);
    EXPECT_EQ(MacParams::budget_from_bandwidth(15e3, 0.1, 1e3), 1);
    EXPECT_EQ(MacParams::budget_from_bandwidth(40e3, 0.1, 1e3), 4);
    EXPECT_EQ(MacParams::budget_from_bandwidth(50e3, 0.1, 1e3), 5);
    EXPECT_EQ(MacParams::budget_from_bandwidth(1e3, 0.1, 1e3), 1); // floor would give 0
}

TEST(MacParams, Validation) {
    MacParams m;
    m.alpha = 1;
    EXPECT_THROW(m.validate(), DomainError);
    m = MacParams{};
    m.session_time = 0;
    EXPECT_THROW(m.validate(), DomainError);
    m = MacParams{};
    m.pair_budget = 0;
    EXPECT_THROW(m.validate(), DomainError);
}

TEST(NeighborChain, EmptyNeighborhoodHasNoDeparture) {
    const auto c = baseline_chain();
    EXPECT_DOUBLE_EQ(c.down(0), 0.0);
    EXPECT_DOUBLE_EQ(c.departure_rate(0), 0.0);
    EXPECT_DOUBLE_EQ(c.prob(0, -1), 0.0);
}

TEST(NeighborChain, FirstArrivalProbability) {
    const auto c = baseline_chain();
    const double lt = 9 * 0.1 / 58.43;
    EXPECT_NEAR(lt, 0.015405, 5e-6);
    EXPECT_NEAR(c.up(0), 0.01517, 5e-6);
    EXPECT_NEAR(c.up(0), lt * std::exp(-lt), 1e-6);
}

TEST(NeighborChain, TransitionFormulas) {
    const auto st = baseline_stats();
    const auto c = build_neighbor_chain(st, MacParams{}, 10, 6);
    for (int n = 0; n < 6; ++n) {
        const double l = (10 - 1 - n) / st.intermeeting_time * 0.1;
        const double m = n / st.contact * 0.1;
        const double a = l * std::exp(-l), d = m * std::exp(-m);
        EXPECT_NEAR(c.up(n), a * (1 - d), 1e-15);
        EXPECT_NEAR(c.down(n), (1 - a) * d, 1e-15);
    }
    // Upward mass at the cap folds into the stay probability.
    EXPECT_DOUBLE_EQ(c.up(6), 0.0);
    EXPECT_NEAR(c.stay(6), 1.0 - c.down(6), 1e-15);
}

TEST(NeighborChain, RowsStochasticAndTridiagonal) {
    for (int n_tot : {2, 5, 10, 20, 50}) {
        const auto st = baseline_stats();
        const auto c = build_neighbor_chain(st, MacParams{}, n_tot, n_tot - 1);
        for (int from = 0; from <= c.n_max(); ++from) {
            double row = 0;
            for (int to = 0; to <= c.n_max(); ++to) {
                const double p = c.prob(from, to);
                EXPECT_GE(p, 0.0);
                if (std::abs(to - from) > 1) {
                    EXPECT_EQ(p, 0.0);
                }
                row += p;
            }
            EXPECT_NEAR(row, 1.0, 1e-12);
        }
    }
}

TEST(NeighborChain, RejectsBadInputs) {
    const auto st = baseline_stats();
    EXPECT_THROW(build_neighbor_chain(st, MacParams{}, 10, 10), DomainError);
    EXPECT_THROW(build_neighbor_chain(st, MacParams{}, 10, -1), DomainError);
    auto bad = st;
    bad.intermeeting_time = 0;
    EXPECT_THROW(build_neighbor_chain(bad, MacParams{}, 10, 5), DomainError);
    bad = st;
    bad.contact = -1;
    EXPECT_THROW(build_neighbor_chain(bad, MacParams{}, 10, 5), DomainError);
}

TEST(NeighborChain, WarnsWhenSessionLong) {
    const auto st = baseline_stats();
    MacParams m;
    m.session_time = 0.5;
    EXPECT_FALSE(build_neighbor_chain(st, m, 10, 5).warnings().empty());
    EXPECT_TRUE(build_neighbor_chain(st, MacParams{}, 10, 5).warnings().empty());
}

TEST(SteadyState, SingleState) {
    const auto st = baseline_stats();
    const auto d = steady_state(build_neighbor_chain(st, MacParams{}, 10, 0));
    ASSERT_EQ(d.v.size(), 1u);
    EXPECT_DOUBLE_EQ(d[0], 1.0);
}

TEST(SteadyState, TwoStateClosedForm) {
    const double p = 0.3, q = 0.05;
    const auto d = steady_state(NeighborChain::from_probabilities({p, 0.0}, {0.0, q}));
    EXPECT_NEAR(d[0], q / (p + q), 1e-15);
    EXPECT_NEAR(d[1], p / (p + q), 1e-15);
}

TEST(SteadyState, SingularBalanceRejected) {
    EXPECT_THROW(steady_state(NeighborChain::from_probabilities({0.2, 0.0}, {0.0, 0.0})), DegenerateError);
}

TEST(SteadyState, MatchesPowerIteration) {
    const auto c = baseline_chain();
    const auto d = steady_state(c);
    const auto pi = oracle::power_iteration(c);
    ASSERT_TRUE(pi.converged);
    for (int j = 0; j <= c.n_max(); ++j) EXPECT_NEAR(d[j], pi.v[static_cast<std::size_t>(j)], 1e-9);
}

TEST(SteadyState, IndependentOfSolverStart) {
    const auto c = baseline_chain();
    std::vector<double> start(static_cast<std::size_t>(c.states()), 0.0);
    start.back() = 1.0;
    const auto a = oracle::power_iteration(c);
    const auto b = oracle::power_iteration(c, start);
    for (std::size_t j = 0; j < a.v.size(); ++j) EXPECT_NEAR(a.v[j], b.v[j], 1e-9);
}

TEST(SteadyState, DetailedBalanceAndNormalization) {
    for (int n_tot : {3, 10, 30}) {
        const auto st = baseline_stats();
        const auto c = build_neighbor_chain(st, MacParams{}, n_tot, std::min(n_tot - 1, 12));
        const auto d = steady_state(c);
        EXPECT_NEAR(std::accumulate(d.v.begin(), d.v.end(), 0.0), 1.0, 1e-12);
        for (int n = 0; n < c.n_max(); ++n) EXPECT_NEAR(d[n] * c.up(n), d[n + 1] * c.down(n + 1), 1e-10);
        for (double x : d.v) EXPECT_GE(x, 0.0);
    }
}

TEST(SteadyState, MoreNodesDominate) {
    const auto st = baseline_stats();
    std::vector<double> prev_cdf;
    for (int n_tot : {5, 10, 20, 40}) {
        const auto d = steady_state(build_neighbor_chain(st, MacParams{}, n_tot, 4));
        std::vector<double> cdf(d.v.size());
        std::partial_sum(d.v.begin(), d.v.end(), cdf.begin());
        if (!prev_cdf.empty())
            for (std::size_t k = 0; k < cdf.size(); ++k) {
                EXPECT_LE(cdf[k], prev_cdf[k] + 1e-15);
            }
        prev_cdf = cdf;
    }
}

TEST(DefaultNMax, TailRule) {
    const auto st = baseline_stats();
    const int n10 = default_n_max(st, 10);
    EXPECT_GE(n10, 1);
    EXPECT_LE(n10, 9);
    EXPECT_EQ(default_n_max(st, 2), 1);
    const int n100 = default_n_max(st, 100);
    EXPECT_LT(n100, 99);
    EXPECT_GE(n100, n10);
    EXPECT_EQ(default_n_max(st, 10, 0.0), 9); // impossible tail falls back to n_tot - 1
}
