#ifndef M2MDTN_SIM_SIMULATOR_HPP
#define M2MDTN_SIM_SIMULATOR_HPP

// Session-synchronous simulator: RD mobility on a tiled torus, M2M or
// one-to-one CSMA sessions per cell every tau seconds, epidemic routing with
// direct recovery, FCFS scheduling with destination priority.
//
// Random streams: one engine per node for mobility, one for traffic, one
// for the MAC, all derived from the root seed. Changing the MAC mode leaves
// mobility and traffic traces untouched.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "m2mdtn/errors.hpp"
#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/neighbor_chain.hpp"
#include "m2mdtn/sim/metrics.hpp"
#include "m2mdtn/sim/mobility.hpp"
#include "m2mdtn/sim/rng.hpp"
#include "m2mdtn/traffic_model.hpp"

namespace m2mdtn::sim {

enum class MacMode { m2m, csma };

inline const char *to_string(MacMode mode) { return mode == MacMode::m2m ? "m2m" : "csma"; }

struct SimConfig {
    TerrainParams terrain;
    MobilityParams mobility;
    MacParams mac;
    TrafficParams traffic;
    MacMode mode = MacMode::m2m;
    int csma_pair_budget = 0; // messages per direction per session; 0 means alpha * b_BW
    double duration = 10000;  // s
    double warmup = 1000;     // s
    std::uint64_t seed = 1;
    double window = 500;      // s, time-series window
    double tail_guard = 0;    // s

    int csma_budget() const { return csma_pair_budget > 0 ? csma_pair_budget : mac.alpha * mac.pair_budget; }

    void validate() const {
        terrain.validate();
        mac.validate();
        if (!(mobility.v_min > 0) || mobility.v_max < mobility.v_min)
            throw ConfigError("sim: need 0 < v_min <= v_max");
        if (!(mobility.mean_epoch_length > 0) || mobility.mean_halt < 0)
            throw ConfigError("sim: invalid epoch length or halt");
        if (traffic.n_tot < 2) throw ConfigError("sim: need at least two nodes");
        if (traffic.gen_rate < 0) throw ConfigError("sim: generation rate must be non-negative");
        if (!(duration > warmup) || warmup < 0) throw ConfigError("sim: need duration > warmup >= 0");
        if (tail_guard < 0 || window <= 0) throw ConfigError("sim: invalid window or tail guard");
    }
};

struct Transfer {
    int from;
    int to;
    std::uint32_t message;
    bool delivery;
};

struct ExchangeLog {
    std::vector<int> participants;
    std::vector<Transfer> transfers;
};

class Simulator {
  public:
    explicit Simulator(SimConfig cfg)
        : cfg_(std::move(cfg)),
          traffic_rng_(make_engine(cfg_.seed, Stream::traffic)),
          mac_rng_(make_engine(cfg_.seed, Stream::mac)) {
        cfg_.validate();
        n_ = cfg_.traffic.n_tot;
        words_ = (static_cast<std::size_t>(n_) + 63) / 64;
        nodes_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            auto &node = nodes_[static_cast<std::size_t>(i)];
            node.mobility_rng = make_engine(cfg_.seed, Stream::mobility, static_cast<std::uint64_t>(i));
            node.motion = random_start(cfg_.mobility, cfg_.terrain, node.mobility_rng);
            node.by_dest.resize(static_cast<std::size_t>(n_));
            node.next_arrival = cfg_.traffic.gen_rate > 0 ? exponential(traffic_rng_, 1.0 / cfg_.traffic.gen_rate)
                                                          : std::numeric_limits<double>::infinity();
        }
        cursor_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
        cell_count_.assign(static_cast<std::size_t>(cfg_.terrain.cell_count()), 0);
        cell_start_.assign(cell_count_.size() + 1, 0);
        cell_of_.assign(static_cast<std::size_t>(n_), 0);
        by_cell_.assign(static_cast<std::size_t>(n_), 0);
    }

    const SimConfig &config() const { return cfg_; }
    double now() const { return now_; }
    std::uint64_t ticks() const { return tick_; }
    int nodes() const { return n_; }

    const std::vector<Message> &messages() const { return messages_; }
    const Message &message(std::uint32_t id) const { return messages_.at(id); }

    Motion &motion(int node) { return nodes_.at(static_cast<std::size_t>(node)).motion; }
    const Motion &motion(int node) const { return nodes_.at(static_cast<std::size_t>(node)).motion; }

    // Fix a node in place; it never moves again.
    void pin_node(int node, double x, double y) {
        auto &m = motion(node);
        m.x = wrap(x, cfg_.terrain.side);
        m.y = wrap(y, cfg_.terrain.side);
        m.pinned = true;
        m.moving = false;
    }

    std::size_t buffer_size(int node) const {
        const auto &nd = nodes_.at(static_cast<std::size_t>(node));
        return nd.fifo.size() - nd.dead;
    }

    bool holds(int node, std::uint32_t msg) const {
        const auto &nd = nodes_.at(static_cast<std::size_t>(node));
        return std::any_of(nd.by_dest[static_cast<std::size_t>(messages_.at(msg).destination)].begin(),
                           nd.by_dest[static_cast<std::size_t>(messages_.at(msg).destination)].end(),
                           [&](const Entry &e) { return e.msg == msg; });
    }

    // Buffered message ids of `node` in FCFS order.
    std::vector<std::uint32_t> buffer_contents(int node) const {
        std::vector<std::uint32_t> out;
        for (const auto &e : nodes_.at(static_cast<std::size_t>(node)).fifo)
            if (e.msg != kDead) out.push_back(e.msg);
        return out;
    }

    // Creates a message at the current time, bypassing the traffic process.
    std::uint32_t inject_message(int source, int destination) { return create_message(source, destination, now_); }

    // One session boundary: move, generate, run one session per occupied cell.
    void step() {
        ++tick_;
        now_ = static_cast<double>(tick_) * cfg_.mac.session_time;
        for (auto &node : nodes_)
            advance_mobility(node.motion, cfg_.mac.session_time, cfg_.mobility, cfg_.terrain, node.mobility_rng);
        generate_until(now_);
        bucket_cells();
        for (std::size_t c = 0; c < cell_count_.size(); ++c) {
            const auto begin = cell_start_[c];
            const auto end = cell_start_[c + 1];
            if (end - begin < 2) continue;
            std::span<const int> cell(by_cell_.data() + begin, end - begin);
            if (cfg_.mode == MacMode::m2m)
                execute_m2m_session(cell);
            else
                execute_csma_session(cell);
        }
        if (now_ > cfg_.warmup) {
            std::size_t live = 0;
            for (const auto &node : nodes_) live += node.fifo.size() - node.dead;
            buffer_sum_ += static_cast<double>(live) / n_;
            ++buffer_samples_;
        }
    }

    SimMetrics run() {
        const double tau = cfg_.mac.session_time;
        const auto total = static_cast<std::uint64_t>(std::floor(cfg_.duration / tau + 1e-9));
        while (tick_ < total) step();
        return metrics();
    }

    SimMetrics metrics() const {
        MetricsWindow w{cfg_.warmup, now_, cfg_.tail_guard, cfg_.window};
        const double buffer = buffer_samples_ ? buffer_sum_ / static_cast<double>(buffer_samples_) : 0.0;
        return collect_metrics(messages_, w, buffer, n_);
    }

    // All nodes of the cell if at most alpha, else a uniform alpha-subset;
    // every admitted ordered pair may move up to b_BW messages.
    ExchangeLog execute_m2m_session(std::span<const int> cell) {
        ExchangeLog log;
        log.participants.assign(cell.begin(), cell.end());
        const auto alpha = static_cast<std::size_t>(cfg_.mac.alpha);
        if (log.participants.size() > alpha) {
            for (std::size_t k = 0; k < alpha; ++k) {
                const auto pick = k + below(mac_rng_, log.participants.size() - k);
                std::swap(log.participants[k], log.participants[pick]);
            }
            log.participants.resize(alpha);
        }
        if (log.participants.size() < 2) return log;
        std::vector<Transfer> planned;
        for (int s : log.participants)
            for (int r : log.participants)
                if (s != r) plan_pair(s, r, cfg_.mac.pair_budget, planned);
        apply(planned, log);
        recover(log.participants);
        return log;
    }

    // One uniformly chosen pair talks in both directions.
    ExchangeLog execute_csma_session(std::span<const int> cell) {
        ExchangeLog log;
        if (cell.size() < 2) return log;
        const auto k = cell.size();
        const auto a = below(mac_rng_, k);
        auto b = below(mac_rng_, k - 1);
        if (b >= a) ++b;
        log.participants = {cell[a], cell[b]};
        std::vector<Transfer> planned;
        plan_pair(cell[a], cell[b], cfg_.csma_budget(), planned);
        plan_pair(cell[b], cell[a], cfg_.csma_budget(), planned);
        apply(planned, log);
        recover(log.participants);
        return log;
    }

  private:
    static constexpr std::uint32_t kDead = std::numeric_limits<std::uint32_t>::max();

    struct Entry {
        std::uint32_t seq;
        std::uint32_t msg;
    };

    struct Node {
        Motion motion;
        Engine mobility_rng;
        std::vector<Entry> fifo; // FCFS order, seq strictly increasing, tombstoned
        std::size_t dead = 0;
        std::uint32_t next_seq = 0;
        std::vector<std::vector<Entry>> by_dest;
        double next_arrival = 0;
    };

    bool seen(std::uint32_t msg, int node) const {
        return (seen_[msg * words_ + static_cast<std::size_t>(node) / 64] >> (node % 64)) & 1U;
    }
    void mark_seen(std::uint32_t msg, int node) {
        seen_[msg * words_ + static_cast<std::size_t>(node) / 64] |= std::uint64_t{1} << (node % 64);
    }

    std::uint32_t create_message(int source, int destination, double created) {
        if (source == destination || source < 0 || destination < 0 || source >= n_ || destination >= n_)
            throw std::invalid_argument("message endpoints must be distinct valid nodes");
        const auto id = static_cast<std::uint32_t>(messages_.size());
        if (id == kDead) throw std::length_error("message id space exhausted");
        messages_.push_back({id, source, destination, created, std::nullopt, 0, 0});
        seen_.resize(seen_.size() + words_, 0);
        mark_seen(id, source);
        buffer_push(source, id);
        return id;
    }

    void generate_until(double t) {
        if (!(cfg_.traffic.gen_rate > 0)) return;
        const double mean_gap = 1.0 / cfg_.traffic.gen_rate;
        for (int i = 0; i < n_; ++i) {
            auto &node = nodes_[static_cast<std::size_t>(i)];
            while (node.next_arrival <= t) {
                auto dest = static_cast<int>(below(traffic_rng_, static_cast<std::uint64_t>(n_ - 1)));
                if (dest >= i) ++dest;
                create_message(i, dest, node.next_arrival);
                node.next_arrival += exponential(traffic_rng_, mean_gap);
            }
        }
    }

    void buffer_push(int node_id, std::uint32_t msg) {
        auto &node = nodes_[static_cast<std::size_t>(node_id)];
        const Entry e{node.next_seq++, msg};
        node.fifo.push_back(e);
        node.by_dest[static_cast<std::size_t>(messages_[msg].destination)].push_back(e);
        auto &m = messages_[msg];
        ++m.copies;
        m.peak_copies = std::max(m.peak_copies, m.copies);
        if (m.copies > n_ - 1)
            throw std::logic_error("invariant violated: message " + std::to_string(msg) + " has " +
                                   std::to_string(m.copies) + " copies");
    }

    void buffer_erase(int node_id, const Entry &e) {
        auto &node = nodes_[static_cast<std::size_t>(node_id)];
        auto it = std::lower_bound(node.fifo.begin(), node.fifo.end(), e.seq,
                                   [](const Entry &x, std::uint32_t s) { return x.seq < s; });
        if (it == node.fifo.end() || it->seq != e.seq || it->msg != e.msg)
            throw std::logic_error("invariant violated: buffer index out of sync at node " + std::to_string(node_id));
        it->msg = kDead;
        ++node.dead;
        --messages_[e.msg].copies;
        if (node.dead > 256 && node.dead * 2 > node.fifo.size()) {
            std::erase_if(node.fifo, [](const Entry &x) { return x.msg == kDead; });
            node.dead = 0;
        }
    }

    // Destination-bound messages first, then FCFS over what the receiver
    // has never held. The per-pair cursor only moves past entries the
    // receiver already has (or is about to get), which stays true forever.
    void plan_pair(int s, int r, int budget, std::vector<Transfer> &out) {
        const auto &src = nodes_[static_cast<std::size_t>(s)];
        int used = 0;
        for (const auto &e : src.by_dest[static_cast<std::size_t>(r)]) {
            if (used == budget) return;
            if (!seen(e.msg, r)) {
                out.push_back({s, r, e.msg, true});
                ++used;
            }
        }
        auto &cursor = cursor_[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(r)];
        auto it = std::lower_bound(src.fifo.begin(), src.fifo.end(), cursor,
                                   [](const Entry &x, std::uint32_t c) { return x.seq < c; });
        for (; it != src.fifo.end() && used < budget; ++it) {
            if (it->msg == kDead) continue;
            if (messages_[it->msg].destination != r && !seen(it->msg, r)) {
                out.push_back({s, r, it->msg, false});
                ++used;
            }
        }
        cursor = it == src.fifo.end() ? src.next_seq : it->seq;
    }

    void apply(const std::vector<Transfer> &planned, ExchangeLog &log) {
        for (const auto &t : planned) {
            if (seen(t.message, t.to)) continue; // same message from two senders this session
            mark_seen(t.message, t.to);
            auto &msg = messages_[t.message];
            if (t.to == msg.destination) {
                if (!msg.delivered) msg.delivered = now_;
            } else {
                buffer_push(t.to, t.message);
            }
            log.transfers.push_back(t);
        }
    }

    // Direct recovery: co-participants of a destination drop whatever it has received.
    void recover(const std::vector<int> &participants) {
        for (int d : participants) {
            for (int p : participants) {
                if (p == d) continue;
                auto &list = nodes_[static_cast<std::size_t>(p)].by_dest[static_cast<std::size_t>(d)];
                std::erase_if(list, [&](const Entry &e) {
                    if (!messages_[e.msg].delivered) return false;
                    buffer_erase(p, e);
                    return true;
                });
            }
        }
    }

    void bucket_cells() {
        std::fill(cell_count_.begin(), cell_count_.end(), 0);
        for (int i = 0; i < n_; ++i) {
            const auto c = static_cast<std::size_t>(cell_index(nodes_[static_cast<std::size_t>(i)].motion, cfg_.terrain));
            cell_of_[static_cast<std::size_t>(i)] = c;
            ++cell_count_[c];
        }
        cell_start_[0] = 0;
        for (std::size_t c = 0; c < cell_count_.size(); ++c) cell_start_[c + 1] = cell_start_[c] + cell_count_[c];
        auto fill = cell_start_;
        for (int i = 0; i < n_; ++i) by_cell_[fill[cell_of_[static_cast<std::size_t>(i)]]++] = i;
    }

    SimConfig cfg_;
    int n_ = 0;
    std::size_t words_ = 1;
    Engine traffic_rng_;
    Engine mac_rng_;
    std::vector<Node> nodes_;
    std::vector<Message> messages_;
    std::vector<std::uint64_t> seen_;     // per message: bitset of nodes that ever held it
    std::vector<std::uint32_t> cursor_;   // per ordered pair (s, r): FCFS scan start in s's fifo
    std::vector<std::size_t> cell_count_, cell_start_, cell_of_;
    std::vector<int> by_cell_;
    std::uint64_t tick_ = 0;
    double now_ = 0;
    double buffer_sum_ = 0;
    std::uint64_t buffer_samples_ = 0;
};

inline SimMetrics run_simulation(const SimConfig &cfg) {
    Simulator sim(cfg);
    return sim.run();
}

} // namespace m2mdtn::sim

#endif
