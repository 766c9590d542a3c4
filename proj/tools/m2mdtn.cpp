// m2mdtn: analytical model, simulator and oracle checks for M2M epidemic
// routing. Commands: analyze, simulate, compare, validate.
//
// Exit codes: 0 success, 1 usage or config error, 2 model error,
// 3 validation failure.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "m2mdtn/analysis.hpp"
#include "m2mdtn/config.hpp"
#include "m2mdtn/validation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace m2mdtn;
using config::ExperimentSpec;
using config::format_number;
using config::GridPoint;

namespace {

enum Exit { ok = 0, usage = 1, model = 2, failed = 3 };

struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("--config", c.config_path, "experiment config file");
    cmd->add_option("--set", c.sets, "override, section.key=value (repeatable)");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "base seed");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentSpec load_spec(const Common &c) {
    auto spec = c.config_path.empty() ? config::parse_config_text("", c.sets)
                                      : config::parse_config_file(c.config_path, c.sets);
    if (c.seed) spec.seed = *c.seed;
    return spec;
}

// Runs fn(k) for k in [0, count) on a pool of workers. Results are written
// by index, so output order does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) {
            try {
                fn(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(jobs, count);
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto &t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::ofstream open_csv(const fs::path &path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string join(const std::vector<std::string> &items, const char *sep) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) out += (k ? sep : "") + items[k];
    return out;
}

std::string point_prefix(const GridPoint &p) {
    return std::to_string(p.index) + "," + std::to_string(p.nodes) + "," + format_number(p.speed) + "," +
           format_number(p.bandwidth) + "," + sim::to_string(p.mode);
}

constexpr const char *kPointHeader = "index,nodes,speed,bandwidth,mode";

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeFlags {
    bool neighbor_dist = false;
    bool contention = false;
    bool visits = false;
};

struct PointAnalysis {
    std::optional<ModelResult> result;
    std::string error;
};

PointAnalysis analyze_point(const ExperimentSpec &spec, const GridPoint &p) {
    PointAnalysis a;
    if (p.mode != sim::MacMode::m2m) {
        a.error = "no analytical model for csma";
        return a;
    }
    try {
        a.result = run_model(spec.model_input(p));
    } catch (const ModelError &e) {
        a.error = e.what();
    }
    return a;
}

int run_analyze(const Common &c, const AnalyzeFlags &flags) {
    const auto spec = load_spec(c);
    const auto grid = spec.grid();
    std::vector<PointAnalysis> results(grid.size());
    parallel_for(grid.size(), c.jobs, [&](std::size_t k) { results[k] = analyze_point(spec, grid[k]); });

    fs::create_directories(c.out);
    auto f = open_csv(fs::path(c.out) / "analysis.csv");
    f << kPointHeader
      << ",alpha,pair_budget,n_bar,T_h,T_m,T_im,p_moving,T_con_static,T_con_moving,T_con,n_max,mean_neighbors,"
         "lambda,p_succ_session,p_succ,E_W,E_B,E_D,E_D_visits,warnings,error\n";
    bool any_error = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto &p = grid[k];
        const auto &a = results[k];
        f << point_prefix(p) << "," << spec.alpha << "," << spec.mac_for(p).pair_budget;
        if (a.result) {
            const auto &r = *a.result;
            const auto &m = r.mobility;
            for (double v : {m.mean_cells_per_epoch, m.hitting_time, m.meeting_time, m.intermeeting_time,
                             m.moving_prob, m.contact_stationary, m.contact_moving, m.contact})
                f << "," << format_number(v);
            f << "," << r.n_max << "," << format_number(r.neighbors.mean());
            for (double v : {r.traffic.total_rate, r.traffic.p_succ_session, r.traffic.p_succ, r.traffic.wait,
                             r.traffic.buffer, r.delay, r.delay_visits})
                f << "," << format_number(v);
            f << "," << csv_escape(join(r.warnings, "; ")) << ",";
        } else {
            any_error = true;
            for (int j = 0; j < 17; ++j) f << ",NA";
            f << ",," << csv_escape(a.error);
        }
        f << "\n";
    }

    if (flags.neighbor_dist) {
        auto d = open_csv(fs::path(c.out) / "neighbor_dist.csv");
        d << "index,n,v_n\n";
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (const auto &r = results[k].result)
                for (int n = 0; n <= r->n_max; ++n) d << k << "," << n << "," << format_number(r->neighbors[n]) << "\n";
    }
    if (flags.contention) {
        auto t = open_csv(fs::path(c.out) / "contention.csv");
        auto s = open_csv(fs::path(c.out) / "spread.csv");
        t << "index,i,p_tx,p_deliver,E_D_i\n";
        s << "index,i,i_next,p_spread\n";
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto &r = results[k].result;
            if (!r) continue;
            const auto &ct = r->contention;
            for (int i = 1; i <= ct.max_copies(); ++i) {
                const auto si = static_cast<std::size_t>(i);
                t << k << "," << i << "," << format_number(ct.p_tx[si]) << "," << format_number(ct.p_deliver[si])
                  << "," << format_number(ct.dwell[si]) << "\n";
                for (int j = i + 1; j <= std::min(i + ct.alpha - 1, ct.n_tot - 1); ++j)
                    s << k << "," << i << "," << j << "," << format_number(ct.spread(i, j)) << "\n";
            }
        }
    }
    if (flags.visits) {
        auto v = open_csv(fs::path(c.out) / "visits.csv");
        v << "index,i,P_visit,E_D_i\n";
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto &r = results[k].result;
            if (!r) continue;
            for (int i = 1; i <= r->digraph.top(); ++i) {
                const auto si = static_cast<std::size_t>(i);
                v << k << "," << i << "," << format_number(r->visit_probability[si]) << ","
                  << format_number(r->digraph.dwell(i)) << "\n";
            }
        }
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (results[k].result)
            std::cout << "point " << k << ": E[D] = " << format_number(results[k].result->delay) << " s\n";
        else
            std::cout << "point " << k << ": " << results[k].error << "\n";
    }
    return any_error ? Exit::model : Exit::ok;
}

// ---------------------------------------------------------------------------
// simulate / compare

json to_json(const sim::SimMetrics &m) {
    json ts = json::array();
    for (const auto &w : m.timeseries)
        ts.push_back({{"start", w.window_start},
                      {"delay", w.mean_delay ? json(*w.mean_delay) : json(nullptr)},
                      {"ratio", w.cumulative_ratio}});
    return {{"generated", m.generated},
            {"delivered", m.delivered},
            {"mean_delay", m.mean_delay ? json(*m.mean_delay) : json(nullptr)},
            {"delivery_ratio", m.delivery_ratio},
            {"mean_buffer", m.mean_buffer},
            {"timeseries", ts},
            {"peak_copies", m.peak_copy_histogram}};
}

sim::SimMetrics from_json(const json &j) {
    sim::SimMetrics m;
    m.generated = j.at("generated").get<std::uint64_t>();
    m.delivered = j.at("delivered").get<std::uint64_t>();
    if (!j.at("mean_delay").is_null()) m.mean_delay = j.at("mean_delay").get<double>();
    m.delivery_ratio = j.at("delivery_ratio").get<double>();
    m.mean_buffer = j.at("mean_buffer").get<double>();
    for (const auto &w : j.at("timeseries")) {
        sim::WindowPoint p;
        p.window_start = w.at("start").get<double>();
        if (!w.at("delay").is_null()) p.mean_delay = w.at("delay").get<double>();
        p.cumulative_ratio = w.at("ratio").get<double>();
        m.timeseries.push_back(p);
    }
    m.peak_copy_histogram = j.at("peak_copies").get<std::vector<std::uint64_t>>();
    return m;
}

struct Run {
    GridPoint point;
    std::uint64_t seed = 0;
    std::string hash;
    sim::SimMetrics metrics;
    bool cached = false;
};

// Results are cached under out/cache/<config hash>-<seed>.json, so an
// interrupted sweep resumes where it stopped.
void execute(Run &run, const ExperimentSpec &spec, const fs::path &cache) {
    const auto cfg = spec.sim_config(run.point, run.seed);
    run.hash = config::config_hash(cfg);
    const auto file = cache / (run.hash + "-" + std::to_string(run.seed) + ".json");
    if (std::ifstream in(file); in) {
        try {
            const auto j = json::parse(in);
            if (j.at("config").get<std::string>() == config::canonical(cfg)) {
                run.metrics = from_json(j.at("metrics"));
                run.cached = true;
                return;
            }
        } catch (const json::exception &) {
            // unreadable cache entry: recompute
        }
    }
    run.metrics = sim::run_simulation(cfg);
    const json j{{"config", config::canonical(cfg)}, {"seed", run.seed}, {"metrics", to_json(run.metrics)}};
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump() << "\n";
    }
    fs::rename(tmp, file);
}

std::vector<Run> run_sweep(const ExperimentSpec &spec, const Common &c) {
    std::vector<Run> runs;
    for (const auto &p : spec.grid())
        for (auto s : spec.seeds()) runs.push_back({p, s, {}, {}, false});
    const fs::path cache = fs::path(c.out) / "cache";
    fs::create_directories(cache);
    parallel_for(runs.size(), c.jobs, [&](std::size_t k) { execute(runs[k], spec, cache); });
    return runs;
}

void write_runs(const std::vector<Run> &runs, const fs::path &out) {
    auto f = open_csv(out / "runs.csv");
    f << kPointHeader << ",seed,config_hash,generated,delivered,delivery_ratio,mean_delay,mean_buffer\n";
    for (const auto &r : runs)
        f << point_prefix(r.point) << "," << r.seed << "," << r.hash << "," << r.metrics.generated << ","
          << r.metrics.delivered << "," << format_number(r.metrics.delivery_ratio) << ","
          << format_number(r.metrics.mean_delay) << "," << format_number(r.metrics.mean_buffer) << "\n";

    auto t = open_csv(out / "timeseries.csv");
    t << kPointHeader << ",seed,window_start,mean_delay,cumulative_ratio\n";
    for (const auto &r : runs)
        for (const auto &w : r.metrics.timeseries)
            t << point_prefix(r.point) << "," << r.seed << "," << format_number(w.window_start) << ","
              << format_number(w.mean_delay) << "," << format_number(w.cumulative_ratio) << "\n";
}

int run_simulate(const Common &c) {
    const auto spec = load_spec(c);
    const auto runs = run_sweep(spec, c);
    write_runs(runs, c.out);
    std::size_t cached = 0;
    for (const auto &r : runs) cached += r.cached;
    std::cout << runs.size() << " runs (" << cached << " from cache) written to " << c.out << "\n";
    return Exit::ok;
}

double mean_of(const std::vector<double> &v) {
    if (v.empty()) return std::nan("");
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

int run_compare(const Common &c) {
    const auto spec = load_spec(c);
    const bool has_m2m = std::count(spec.modes.begin(), spec.modes.end(), sim::MacMode::m2m) > 0;
    const bool has_csma = std::count(spec.modes.begin(), spec.modes.end(), sim::MacMode::csma) > 0;
    if (!has_m2m || !has_csma) {
        std::cerr << "compare needs both mac modes (set mac.mode = m2m, csma)\n";
        return Exit::usage;
    }
    const auto runs = run_sweep(spec, c);
    write_runs(runs, c.out);

    // Index runs by (grid index, seed); model E[D] per M2M point.
    std::map<std::pair<std::size_t, std::uint64_t>, const Run *> by_key;
    for (const auto &r : runs) by_key[{r.point.index, r.seed}] = &r;
    const auto grid = spec.grid();
    std::map<std::size_t, PointAnalysis> model;
    for (const auto &p : grid)
        if (p.mode == sim::MacMode::m2m) model[p.index] = analyze_point(spec, p);

    auto f = open_csv(fs::path(c.out) / "compare.csv");
    auto s = open_csv(fs::path(c.out) / "compare_summary.csv");
    f << "nodes,speed,m2m_bandwidth,csma_bandwidth,seed,m2m_delay,csma_delay,delay_ratio,m2m_delivery_ratio,"
         "csma_delivery_ratio\n";
    s << "nodes,speed,m2m_bandwidth,csma_bandwidth,m2m_delay,csma_delay,delay_ratio,m2m_delivery_ratio,"
         "csma_delivery_ratio,m2m_model_delay,m2m_wins\n";
    std::cout << "nodes speed m2m_bw csma_bw | m2m_delay csma_delay | m2m_ratio csma_ratio | model\n";
    for (const auto &pm : grid) {
        if (pm.mode != sim::MacMode::m2m) continue;
        for (const auto &pc : grid) {
            if (pc.mode != sim::MacMode::csma || pc.nodes != pm.nodes || pc.speed != pm.speed) continue;
            std::vector<double> dm, dc, rm, rc;
            int wins = 0;
            for (auto seed : spec.seeds()) {
                const auto &a = by_key.at({pm.index, seed})->metrics;
                const auto &b = by_key.at({pc.index, seed})->metrics;
                const double x = a.mean_delay.value_or(std::nan(""));
                const double y = b.mean_delay.value_or(std::nan(""));
                f << pm.nodes << "," << format_number(pm.speed) << "," << format_number(pm.bandwidth) << ","
                  << format_number(pc.bandwidth) << "," << seed << "," << format_number(x) << ","
                  << format_number(y) << "," << format_number(y / x) << "," << format_number(a.delivery_ratio)
                  << "," << format_number(b.delivery_ratio) << "\n";
                dm.push_back(x);
                dc.push_back(y);
                rm.push_back(a.delivery_ratio);
                rc.push_back(b.delivery_ratio);
                wins += x < y;
            }
            const auto &mr = model.at(pm.index).result;
            const std::optional<double> md = mr ? std::optional<double>(mr->delay) : std::nullopt;
            s << pm.nodes << "," << format_number(pm.speed) << "," << format_number(pm.bandwidth) << ","
              << format_number(pc.bandwidth) << "," << format_number(mean_of(dm)) << ","
              << format_number(mean_of(dc)) << "," << format_number(mean_of(dc) / mean_of(dm)) << ","
              << format_number(mean_of(rm)) << "," << format_number(mean_of(rc)) << "," << format_number(md)
              << "," << wins << "/" << dm.size() << "\n";
            std::cout << pm.nodes << " " << format_number(pm.speed) << " " << format_number(pm.bandwidth) << " "
                      << format_number(pc.bandwidth) << " | " << format_number(mean_of(dm)) << " "
                      << format_number(mean_of(dc)) << " | " << format_number(mean_of(rm)) << " "
                      << format_number(mean_of(rc)) << " | " << format_number(md) << "\n";
        }
    }
    std::cout << "csma stand-in: one communicating pair per cell per session, budget alpha * b_BW\n";
    return Exit::ok;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const Common &c, std::optional<std::uint64_t> samples) {
    if (samples && *samples == 0) {
        std::cerr << "--samples must be positive\n";
        return Exit::usage;
    }
    auto spec = load_spec(c);
    if (samples) spec.oracle_samples = *samples;
    const auto base = spec.grid().front();
    const auto in = spec.model_input(base);
    const auto r = run_model(in);
    const auto n = spec.oracle_samples;

    validation::MobilityCheckOptions mo;
    mo.epoch_samples = n;
    mo.horizon = spec.oracle_horizon;
    mo.hitting_samples = std::max<std::uint64_t>(100, n / 50);
    validation::ContentionCheckOptions co;
    co.session_trials = 10 * n;
    co.dwell_samples = std::max<std::uint64_t>(100, n / 10);
    validation::DelayCheckOptions dopt;
    dopt.walks = 10 * n;

    std::vector<oracle::OracleReport> reports;
    for (auto &&batch : {validation::check_mobility(in.mobility, in.terrain, mo, spec.seed),
                         validation::check_chain(r), validation::check_contention(r, co, spec.seed),
                         validation::check_delay(r, dopt, spec.seed)})
        reports.insert(reports.end(), batch.begin(), batch.end());

    fs::create_directories(c.out);
    auto f = open_csv(fs::path(c.out) / "oracles.csv");
    f << "quantity,analytical,empirical,std_error,samples,tolerance,pass,notes\n";
    bool all = true;
    for (const auto &rep : reports) {
        all = all && rep.pass;
        f << csv_escape(rep.quantity) << "," << format_number(rep.analytical) << "," << format_number(rep.empirical)
          << "," << format_number(rep.std_error) << "," << rep.samples << "," << csv_escape(rep.tolerance) << ","
          << (rep.pass ? "PASS" : "FAIL") << "," << csv_escape(join(rep.notes, "; ")) << "\n";
        std::cout << (rep.pass ? "PASS " : "FAIL ") << rep.quantity << ": " << format_number(rep.analytical)
                  << " vs " << format_number(rep.empirical) << " (" << rep.tolerance << ")\n";
    }
    return all ? Exit::ok : Exit::failed;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"M2M epidemic routing: analysis, simulation and validation"};
    app.require_subcommand(1);

    Common common;
    AnalyzeFlags flags;
    std::optional<std::uint64_t> samples;

    auto *analyze = app.add_subcommand("analyze", "evaluate the analytical model over the grid");
    add_common(analyze, common);
    analyze->add_flag("--dump-neighbor-dist", flags.neighbor_dist, "write neighbor_dist.csv");
    analyze->add_flag("--dump-contention", flags.contention, "write contention.csv and spread.csv");
    analyze->add_flag("--dump-visits", flags.visits, "write visits.csv");

    auto *simulate = app.add_subcommand("simulate", "simulate every grid point and replication");
    add_common(simulate, common);

    auto *compare = app.add_subcommand("compare", "paired M2M and CSMA runs");
    add_common(compare, common);

    auto *validate = app.add_subcommand("validate", "check closed forms against Monte Carlo oracles");
    add_common(validate, common);
    validate->add_option("--samples", samples, "oracle sample count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::usage;
    }

    try {
        if (*analyze) return run_analyze(common, flags);
        if (*simulate) return run_simulate(common);
        if (*compare) return run_compare(common);
        return run_validate(common, samples);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::usage;
    } catch (const ModelError &e) {
        std::cerr << "model error: " << e.what() << "\n";
        return Exit::model;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::model;
    }
}
