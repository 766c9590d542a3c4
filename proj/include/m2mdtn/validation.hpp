#ifndef M2MDTN_VALIDATION_HPP
#define M2MDTN_VALIDATION_HPP

// Oracle check batteries shared by the `validate` command and the
// acceptance suite. Each function compares analytical values from the
// model modules with the independent oracles and returns one report per
// quantity.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "m2mdtn/analysis.hpp"
#include "m2mdtn/oracles.hpp"

namespace m2mdtn::validation {

using oracle::OracleReport;

struct MobilityCheckOptions {
    std::uint64_t epoch_samples = 100'000;
    double horizon = 4e5;        // s, two-node and static-contact runs
    double dt = 0.01;
    std::uint64_t hitting_samples = 2000;
    bool include_hitting = true;
    double rel_tolerance = 0.20;
};

inline std::vector<OracleReport> check_mobility(const MobilityParams &mob, const TerrainParams &terrain,
                                                const MobilityCheckOptions &opt, std::uint64_t seed) {
    const auto st = compute_mobility_stats(mob, terrain);
    std::vector<OracleReport> out;

    auto rng = sim::make_engine(seed, sim::Stream::oracle, 1);
    out.push_back(oracle::mc_epoch_coverage(mob, terrain, opt.epoch_samples, rng, st.mean_cells_per_epoch));

    oracle::MeetingOptions mo;
    mo.dt = opt.dt;
    mo.horizon = opt.horizon;
    mo.hitting_samples = opt.hitting_samples;

    rng = sim::make_engine(seed, sim::Stream::oracle, 2);
    const auto two = oracle::mc_pairwise_meeting_stats(mob, terrain, oracle::PairMode::two_moving, mo, rng);
    auto imt = oracle::within_relative("intermeeting_time", st.intermeeting_time, two.intermeeting, opt.rel_tolerance);
    imt.notes = two.warnings;
    out.push_back(imt);
    OracleReport cv{"intermeeting_cv", 1.0, two.intermeeting.cv(), 0.0, two.intermeeting.count(), "in [0.85, 1.15]",
                    false, {}};
    cv.pass = two.intermeeting.count() > 1 && cv.empirical >= 0.85 && cv.empirical <= 1.15;
    out.push_back(cv);

    rng = sim::make_engine(seed, sim::Stream::oracle, 3);
    const auto stat = oracle::mc_pairwise_meeting_stats(mob, terrain, oracle::PairMode::static_contact, mo, rng);
    auto ct = oracle::within_relative("contact_time_static", st.contact_stationary, stat.contact, opt.rel_tolerance);
    ct.notes = stat.warnings;
    out.push_back(ct);

    if (opt.include_hitting) {
        rng = sim::make_engine(seed, sim::Stream::oracle, 4);
        const auto hit = oracle::mc_pairwise_meeting_stats(mob, terrain, oracle::PairMode::static_hitting, mo, rng);
        out.push_back(oracle::within_relative("hitting_time", st.hitting_time, hit.hitting, opt.rel_tolerance));
    }
    return out;
}

inline std::vector<OracleReport> check_chain(const ModelResult &r) {
    std::vector<OracleReport> out;
    const auto pi = oracle::power_iteration(r.chain);
    double diff = 0;
    for (int j = 0; j <= r.chain.n_max(); ++j)
        diff = std::max(diff, std::abs(r.neighbors[j] - pi.v[static_cast<std::size_t>(j)]));
    out.push_back({"steady_state_vs_power_iteration", 0.0, diff, 0.0, pi.iterations, "max abs diff <= 1e-9",
                   pi.converged && diff <= 1e-9, {}});

    double balance = 0, rows = 0;
    for (int n = 0; n <= r.chain.n_max(); ++n) {
        double row = 0;
        for (int m = 0; m <= r.chain.n_max(); ++m) row += r.chain.prob(n, m);
        rows = std::max(rows, std::abs(row - 1.0));
        if (n < r.chain.n_max())
            balance = std::max(balance, std::abs(r.neighbors[n] * r.chain.up(n) - r.neighbors[n + 1] * r.chain.down(n + 1)));
    }
    out.push_back({"detailed_balance", 0.0, balance, 0.0, 0, "max residual <= 1e-10", balance <= 1e-10, {}});
    out.push_back({"row_stochastic", 0.0, rows, 0.0, 0, "max |row - 1| <= 1e-12", rows <= 1e-12, {}});
    return out;
}

struct ContentionCheckOptions {
    std::vector<int> copies{1, 2, 5};
    std::uint64_t session_trials = 1'000'000;
    std::uint64_t dwell_samples = 10'000;
    int dwell_states = 4; // E[t_n] checked for n < dwell_states
    double k_se = 3.0;
};

inline std::vector<OracleReport> check_contention(const ModelResult &r, const ContentionCheckOptions &opt,
                                                  std::uint64_t seed) {
    std::vector<OracleReport> out;
    const auto &t = r.contention;
    const int alpha = t.alpha;
    const double tau = r.input.mac.session_time;
    for (int i : opt.copies) {
        if (i < 1 || i > t.max_copies()) continue;
        const auto si = static_cast<std::size_t>(i);
        const double ptx = t.p_tx[si];
        const std::string tag = "(i=" + std::to_string(i) + ")";

        auto rng = sim::make_engine(seed, sim::Stream::oracle, 100 + si);
        const auto est = oracle::mc_session_spread(r.neighbors, alpha, t.n_tot, i, ptx, opt.session_trials, rng);
        for (int k = 1; k <= alpha - 1; ++k) {
            const double p0 = t.spread(i, i + k);
            out.push_back(oracle::within_se("p_spread(" + std::to_string(i + k) + "|" + std::to_string(i) + ")", p0,
                                            est.spread[static_cast<std::size_t>(k - 1)].mean(),
                                            oracle::null_std_error(p0, i, opt.session_trials), opt.session_trials,
                                            opt.k_se));
        }
        const double pd = t.p_deliver[si];
        out.push_back(oracle::within_se("p_deliver" + tag, pd, est.deliver.mean(),
                                        oracle::null_std_error(pd, 1, opt.session_trials), opt.session_trials,
                                        opt.k_se));

        const auto &prof = t.profiles[si];
        for (int n = 0; n < opt.dwell_states && n <= r.chain.n_max(); ++n) {
            oracle::DwellOptions d;
            d.start_state = n;
            d.samples = opt.dwell_samples;
            auto drng = sim::make_engine(seed, sim::Stream::oracle, 200 + 16 * si + static_cast<std::size_t>(n));
            const auto s = oracle::mc_dwell_sampler(r.chain, alpha, ptx, tau, d, drng);
            out.push_back(oracle::within_se("E[t_" + std::to_string(n) + "]" + tag,
                                            prof.dwell[static_cast<std::size_t>(n)], s.state_dwell.mean(),
                                            s.state_dwell.std_error(), s.state_dwell.count(), opt.k_se));
        }

        oracle::DwellOptions d;
        d.start_state = 0;
        d.samples = opt.dwell_samples;
        d.replicas = i;
        auto drng = sim::make_engine(seed, sim::Stream::oracle, 300 + si);
        const auto s = oracle::mc_dwell_sampler(r.chain, alpha, ptx, tau, d, drng);
        auto first = oracle::within_se("E[t^0]" + tag, prof.system_dwell[0], s.first_spread.mean(),
                                       s.first_spread.std_error(), s.first_spread.count(), opt.k_se);
        auto dur = oracle::within_se("E[D_i]" + tag, t.dwell[si], s.min_of_replicas.mean(),
                                     s.min_of_replicas.std_error(), s.min_of_replicas.count(), opt.k_se);
        if (s.capped > 0) {
            first.notes.push_back(std::to_string(s.capped) + " walks hit the session cap");
            first.pass = false;
            dur.pass = false;
        }
        out.push_back(first);
        out.push_back(dur);
    }
    return out;
}

struct DelayCheckOptions {
    std::uint64_t walks = 1'000'000;
    int enumerate_up_to = 12; // exhaustive enumeration only for small n_tot
};

inline OracleReport absorption_report(const std::string &name, const CopyDigraph &g, std::uint64_t walks,
                                      std::uint64_t seed) {
    auto rng = sim::make_engine(seed, sim::Stream::oracle, 400);
    const auto s = oracle::mc_absorption_sampler(g, walks, rng);
    const double dp = expected_delivery_delay(g);
    OracleReport r{name, dp, s.delay.mean(), s.delay.std_error(), s.delay.count(), "within max(2%, 3 SE)", false, {}};
    r.pass = s.capped == 0 && std::abs(r.empirical - dp) <= std::max(0.02 * dp, 3 * r.std_error);
    if (s.capped) r.notes.push_back(std::to_string(s.capped) + " walks capped");
    return r;
}

inline std::vector<OracleReport> check_delay(const ModelResult &r, const DelayCheckOptions &opt, std::uint64_t seed) {
    std::vector<OracleReport> out;
    const auto &g = r.digraph;
    out.push_back(absorption_report("E[D]_absorption_sampler", g, opt.walks, seed));

    const auto bwd = absorption_path_probabilities(g);
    double worst = 0;
    for (int s = 1; s <= g.top(); ++s)
        if (g.reachable(s)) worst = std::max(worst, std::abs(bwd[static_cast<std::size_t>(s)] - 1.0));
    out.push_back({"P(Path(i,D))", 1.0, 1.0 - worst, 0.0, 0, "within 1e-9 of 1", worst <= 1e-9, {}});
    out.push_back({"E[D]_triple_vs_visits", r.delay, r.delay_visits, 0.0, 0, "relative diff <= 1e-10",
                   std::abs(r.delay - r.delay_visits) <= 1e-10 * std::max(1.0, std::abs(r.delay)), {}});

    if (g.n_tot() <= opt.enumerate_up_to) {
        const auto brute = oracle::enumerate_paths(g);
        const auto fwd = forward_path_probabilities(g);
        double diff = std::abs(brute.expected_delay - r.delay);
        for (int s = 1; s <= g.top(); ++s)
            diff = std::max(diff, std::abs(brute.forward[static_cast<std::size_t>(s)] - fwd[static_cast<std::size_t>(s)]));
        out.push_back({"path_enumeration", 0.0, diff, 0.0, brute.paths, "max abs diff <= 1e-12", diff <= 1e-12, {}});
    }
    return out;
}

} // namespace m2mdtn::validation

#endif
