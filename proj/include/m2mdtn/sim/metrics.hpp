#ifndef M2MDTN_SIM_METRICS_HPP
#define M2MDTN_SIM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace m2mdtn::sim {

struct Message {
    std::uint32_t id = 0;
    int source = 0;
    int destination = 0;
    double created = 0;                 // s
    std::optional<double> delivered;    // first delivery time
    int copies = 0;                     // relay buffers currently holding it
    int peak_copies = 0;
};

struct WindowPoint {
    double window_start = 0;
    std::optional<double> mean_delay; // over messages created in the window and delivered
    double cumulative_ratio = 1;      // delivered / generated, created in [warmup, window end)

    bool operator==(const WindowPoint &) const = default;
};

struct SimMetrics {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::optional<double> mean_delay;
    double delivery_ratio = 1; // 1 by convention when nothing was generated
    double mean_buffer = 0;    // time-averaged messages per node after warmup
    std::vector<WindowPoint> timeseries;
    std::vector<std::uint64_t> peak_copy_histogram; // [k] = messages whose copy count peaked at k

    bool operator==(const SimMetrics &) const = default;
};

struct MetricsWindow {
    double warmup = 0;
    double end = 0;           // simulation end time
    double tail_guard = 0;    // messages created after end - tail_guard are ignored
    double window = 500;      // time-series window length
};

// Delays are creation -> first delivery, over messages created in
// [warmup, end - tail_guard].
inline SimMetrics collect_metrics(const std::vector<Message> &messages, const MetricsWindow &w,
                                  double mean_buffer, int n_tot) {
    SimMetrics m;
    m.mean_buffer = mean_buffer;
    m.peak_copy_histogram.assign(static_cast<std::size_t>(std::max(n_tot, 1)) + 1, 0);
    const double last = w.end - w.tail_guard;
    const auto windows = w.window > 0 && last > w.warmup
                             ? static_cast<std::size_t>(std::ceil((last - w.warmup) / w.window))
                             : std::size_t{0};
    std::vector<double> win_sum(windows, 0.0);
    std::vector<std::uint64_t> win_delivered(windows, 0), win_generated(windows, 0);

    double delay_sum = 0;
    for (const auto &msg : messages) {
        if (msg.created < w.warmup || msg.created > last) continue;
        ++m.generated;
        const auto peak = static_cast<std::size_t>(std::clamp(msg.peak_copies, 0, n_tot));
        ++m.peak_copy_histogram[peak];
        std::size_t k = windows ? std::min(windows - 1, static_cast<std::size_t>((msg.created - w.warmup) / w.window))
                                : 0;
        if (windows) ++win_generated[k];
        if (msg.delivered) {
            ++m.delivered;
            const double d = *msg.delivered - msg.created;
            delay_sum += d;
            if (windows) {
                win_sum[k] += d;
                ++win_delivered[k];
            }
        }
    }
    if (m.delivered > 0) m.mean_delay = delay_sum / static_cast<double>(m.delivered);
    m.delivery_ratio = m.generated > 0 ? static_cast<double>(m.delivered) / static_cast<double>(m.generated) : 1.0;

    std::uint64_t cum_gen = 0, cum_del = 0;
    for (std::size_t k = 0; k < windows; ++k) {
        WindowPoint p;
        p.window_start = w.warmup + static_cast<double>(k) * w.window;
        if (win_delivered[k] > 0) p.mean_delay = win_sum[k] / static_cast<double>(win_delivered[k]);
        cum_gen += win_generated[k];
        cum_del += win_delivered[k];
        p.cumulative_ratio = cum_gen > 0 ? static_cast<double>(cum_del) / static_cast<double>(cum_gen) : 1.0;
        m.timeseries.push_back(p);
    }
    return m;
}

} // namespace m2mdtn::sim

#endif
