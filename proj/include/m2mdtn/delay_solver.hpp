#ifndef M2MDTN_DELAY_SOLVER_HPP
#define M2MDTN_DELAY_SOLVER_HPP

// Copy-count digraph with an absorbing delivery state D, and the expected
// delivery delay computed by dynamic programming over path probabilities.
//
// States are copy counts 1..n_tot-1. Edges only go upwards (at most
// alpha - 1 steps) or to D, so ascending copy count is a topological order.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "m2mdtn/contention.hpp"
#include "m2mdtn/errors.hpp"

namespace m2mdtn {

struct Transition {
    int to;
    double prob;
};

class CopyDigraph {
  public:
    int n_tot() const { return n_tot_; }
    int top() const { return n_tot_ - 1; }
    int alpha() const { return alpha_; }
    bool normalized() const { return normalized_; }

    const std::vector<Transition> &children(int s) const { return children_.at(idx(s)); }
    const std::vector<Transition> &parents(int s) const { return parents_.at(idx(s)); }
    double deliver(int s) const { return deliver_.at(idx(s)); }
    double dwell(int s) const { return dwell_.at(idx(s)); }
    bool reachable(int s) const { return reachable_.at(idx(s)); }

    // Edge probability s -> c (0 if absent).
    double edge(int s, int c) const {
        for (const auto &t : children(s))
            if (t.to == c) return t.prob;
        return 0.0;
    }

    double outgoing_mass(int s) const {
        double z = deliver(s);
        for (const auto &t : children(s)) z += t.prob;
        return z;
    }

    // raw_spread[i][k - 1]: per-session probability of moving i -> i + k.
    // Indices 1..n_tot-1 are used in all vectors; slot 0 is ignored. Spread
    // past n_tot - 1 lands on n_tot - 1; spread out of the top state is dropped.
    static CopyDigraph from_raw(int n_tot, int alpha, const std::vector<std::vector<double>> &raw_spread,
                                const std::vector<double> &raw_deliver, const std::vector<double> &dwell,
                                bool normalize = true) {
        if (n_tot < 2) throw DomainError("digraph: need at least two nodes");
        if (alpha < 2) throw DomainError("digraph: alpha must be at least 2");
        const auto size = static_cast<std::size_t>(n_tot);
        if (raw_spread.size() < size || raw_deliver.size() < size || dwell.size() < size)
            throw DomainError("digraph: tables must cover copy counts 1..n_tot-1");

        CopyDigraph g;
        g.n_tot_ = n_tot;
        g.alpha_ = alpha;
        g.normalized_ = normalize;
        g.children_.resize(size);
        g.parents_.resize(size);
        g.deliver_.assign(size, 0.0);
        g.dwell_.assign(size, 0.0);
        g.reachable_.assign(size, false);

        const int top = n_tot - 1;
        for (int i = 1; i <= top; ++i) {
            const auto s = static_cast<std::size_t>(i);
            g.dwell_[s] = dwell[s];
            g.deliver_[s] = raw_deliver[s];
            if (i == top) continue;
            std::vector<double> mass(size, 0.0);
            for (int k = 1; k <= alpha - 1 && k <= static_cast<int>(raw_spread[s].size()); ++k) {
                const int target = std::min(i + k, top);
                mass[static_cast<std::size_t>(target)] += raw_spread[s][static_cast<std::size_t>(k - 1)];
            }
            for (int c = i + 1; c <= top; ++c)
                if (mass[static_cast<std::size_t>(c)] > 0.0)
                    g.children_[s].push_back({c, mass[static_cast<std::size_t>(c)]});
        }

        g.reachable_[1] = true;
        for (int i = 1; i <= top; ++i) {
            const auto s = static_cast<std::size_t>(i);
            if (!g.reachable_[s]) continue;
            const double z = g.outgoing_mass(i);
            if (!(z > 0.0))
                throw DegenerateError("digraph: state " + std::to_string(i) +
                                      " is reachable but has no outgoing probability");
            if (normalize) {
                g.deliver_[s] /= z;
                for (auto &t : g.children_[s]) t.prob /= z;
            }
            for (const auto &t : g.children_[s]) g.reachable_[static_cast<std::size_t>(t.to)] = true;
        }
        for (int i = 1; i <= top; ++i)
            for (const auto &t : g.children_[static_cast<std::size_t>(i)])
                g.parents_[static_cast<std::size_t>(t.to)].push_back({i, t.prob});
        return g;
    }

  private:
    std::size_t idx(int s) const {
        if (s < 1 || s > top()) throw DomainError("digraph: state " + std::to_string(s) + " out of range");
        return static_cast<std::size_t>(s);
    }

    int n_tot_ = 0;
    int alpha_ = 0;
    bool normalized_ = true;
    std::vector<std::vector<Transition>> children_, parents_;
    std::vector<double> deliver_, dwell_;
    std::vector<bool> reachable_;
};

inline CopyDigraph build_copy_digraph(const ContentionTables &tables, bool normalize = true) {
    return CopyDigraph::from_raw(tables.n_tot, tables.alpha, tables.p_spread, tables.p_deliver, tables.dwell,
                                 normalize);
}

// P(Path(1, i)) for every state; slot 0 unused.
inline std::vector<double> forward_path_probabilities(const CopyDigraph &g) {
    std::vector<double> f(static_cast<std::size_t>(g.n_tot()), 0.0);
    f[1] = 1.0;
    for (int i = 2; i <= g.top(); ++i) {
        double acc = 0.0;
        for (const auto &p : g.parents(i)) acc += f[static_cast<std::size_t>(p.to)] * p.prob;
        f[static_cast<std::size_t>(i)] = acc;
    }
    return f;
}

// P(Path(i, D)) for every state, in reverse topological order.
inline std::vector<double> absorption_path_probabilities(const CopyDigraph &g) {
    std::vector<double> b(static_cast<std::size_t>(g.n_tot()), 0.0);
    for (int i = g.top(); i >= 1; --i) {
        double acc = g.deliver(i);
        for (const auto &c : g.children(i)) acc += c.prob * b[static_cast<std::size_t>(c.to)];
        b[static_cast<std::size_t>(i)] = acc;
    }
    return b;
}

inline double path_probability_forward(const CopyDigraph &g, int state) {
    if (state < 1 || state > g.top()) throw DomainError("path probability: state out of range");
    return forward_path_probabilities(g)[static_cast<std::size_t>(state)];
}

inline double path_probability_to_absorption(const CopyDigraph &g, int state) {
    if (state < 1 || state > g.top()) throw DomainError("path probability: state out of range");
    return absorption_path_probabilities(g)[static_cast<std::size_t>(state)];
}

// Sum over states s, parents p and successors c (including D) of
// P(Path(1,p)) p(s|p) p(c|s) P(Path(c,D)) E[D_s]. The start state has no
// parents and enters with P(Path(1,1)) = 1.
inline double expected_delivery_delay(const CopyDigraph &g) {
    const auto fwd = forward_path_probabilities(g);
    const auto bwd = absorption_path_probabilities(g);
    double total = 0.0;
    for (int s = 1; s <= g.top(); ++s) {
        if (!g.reachable(s)) continue;
        double leave = g.deliver(s);
        for (const auto &c : g.children(s)) leave += c.prob * bwd[static_cast<std::size_t>(c.to)];
        double enter = s == 1 ? fwd[1] : 0.0;
        for (const auto &p : g.parents(s)) enter += fwd[static_cast<std::size_t>(p.to)] * p.prob;
        total += enter * leave * g.dwell(s);
    }
    return total;
}

// Visit-weighted form sum_s P(Path(1,s)) P(Path(s,D)) E[D_s]; cross-check
// for the triple sum.
inline double expected_delivery_delay_visits(const CopyDigraph &g) {
    const auto fwd = forward_path_probabilities(g);
    const auto bwd = absorption_path_probabilities(g);
    double total = 0.0;
    for (int s = 1; s <= g.top(); ++s)
        total += fwd[static_cast<std::size_t>(s)] * bwd[static_cast<std::size_t>(s)] * g.dwell(s);
    return total;
}

} // namespace m2mdtn

#endif
