#ifndef M2MDTN_SIM_MOBILITY_HPP
#define M2MDTN_SIM_MOBILITY_HPP

// Random Direction mobility on a torus. An epoch moves in a straight line
// at a fixed speed for an exponential duration (mean L / v-bar, independent
// of the drawn speed), then the node halts for U[0, 2 * mean halt].

#include <algorithm>
#include <cmath>
#include <numbers>

#include "m2mdtn/mobility_stats.hpp"
#include "m2mdtn/sim/rng.hpp"

namespace m2mdtn::sim {

struct Motion {
    double x = 0, y = 0;
    bool moving = false;
    double dir_x = 1, dir_y = 0; // unit heading
    double speed = 0;
    double phase_left = 0;       // s remaining in the current epoch or halt
    bool pinned = false;
};

inline double wrap(double v, double side) {
    double r = std::fmod(v, side);
    if (r < 0) r += side;
    return r >= side ? 0.0 : r;
}

inline int cell_index(double x, double y, const TerrainParams &terrain) {
    const int n = terrain.cells_per_side();
    const int cx = std::clamp(static_cast<int>(x / terrain.cell), 0, n - 1);
    const int cy = std::clamp(static_cast<int>(y / terrain.cell), 0, n - 1);
    return cy * n + cx;
}

inline int cell_index(const Motion &m, const TerrainParams &terrain) { return cell_index(m.x, m.y, terrain); }

inline void set_epoch(Motion &m, double heading, double speed, double duration) {
    m.moving = true;
    m.dir_x = std::cos(heading);
    m.dir_y = std::sin(heading);
    m.speed = speed;
    m.phase_left = duration;
}

inline void start_epoch(Motion &m, const MobilityParams &mob, Engine &rng) {
    const double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double speed = uniform(rng, mob.v_min, mob.v_max);
    const double duration = exponential(rng, mob.mean_epoch_length / mob.mean_speed());
    set_epoch(m, heading, speed, duration);
}

inline void start_halt(Motion &m, const MobilityParams &mob, Engine &rng) {
    m.moving = false;
    m.speed = 0;
    m.phase_left = mob.mean_halt > 0 ? uniform(rng, 0.0, 2.0 * mob.mean_halt) : 0.0;
}

// Uniform position, fresh epoch.
inline Motion random_start(const MobilityParams &mob, const TerrainParams &terrain, Engine &rng) {
    Motion m;
    m.x = uniform(rng, 0.0, terrain.side);
    m.y = uniform(rng, 0.0, terrain.side);
    start_epoch(m, mob, rng);
    return m;
}

inline void advance_mobility(Motion &m, double dt, const MobilityParams &mob, const TerrainParams &terrain,
                             Engine &rng) {
    if (m.pinned) return;
    while (dt > 0) {
        const double step = std::min(dt, m.phase_left);
        if (m.moving) {
            m.x = wrap(m.x + m.dir_x * m.speed * step, terrain.side);
            m.y = wrap(m.y + m.dir_y * m.speed * step, terrain.side);
        }
        m.phase_left -= step;
        dt -= step;
        if (m.phase_left <= 0) {
            if (m.moving)
                start_halt(m, mob, rng);
            else
                start_epoch(m, mob, rng);
        }
    }
}

} // namespace m2mdtn::sim

#endif
