#ifndef M2MDTN_MOBILITY_STATS_HPP
#define M2MDTN_MOBILITY_STATS_HPP

// Closed-form Random Direction (RD) mobility statistics over a terrain
// logically divided into square cells. Everything here is a pure function
// of (MobilityParams, TerrainParams).

#include <cmath>
#include <numbers>
#include <string>

#include "m2mdtn/errors.hpp"

namespace m2mdtn {

// Expected relative speed between two RD nodes is kRelativeSpeedRD * mean speed.
inline constexpr double kRelativeSpeedRD = 1.27;

struct MobilityParams {
    double v_min = 4.0;              // m/s
    double v_max = 9.0;              // m/s
    double mean_epoch_length = 25.0; // m
    double mean_halt = 0.0;          // s, halts are U[0, 2 * mean_halt]

    // Speed interval of the given width centred on `mean_speed`.
    static MobilityParams from_mean_speed(double mean_speed, double width,
                                          double epoch_length, double halt) {
        return {mean_speed - width / 2, mean_speed + width / 2, epoch_length, halt};
    }

    double mean_speed() const { return (v_min + v_max) / 2; }
    double mean_epoch_duration() const { return mean_epoch_length / mean_speed(); }

    void validate() const {
        if (!(v_min > 0) || !(v_max > v_min))
            throw DomainError("mobility: need 0 < v_min < v_max");
        if (!(mean_epoch_length > 0))
            throw DomainError("mobility: mean epoch length must be positive");
        if (!(mean_halt >= 0))
            throw DomainError("mobility: mean halt must be non-negative");
    }
};

struct TerrainParams {
    double side = 100.0; // m, square terrain
    double cell = 10.0;  // m, square tile side

    double area() const { return side * side; }
    int cells_per_side() const { return static_cast<int>(std::lround(side / cell)); }
    int cell_count() const { return cells_per_side() * cells_per_side(); }

    void validate() const {
        if (!(cell > 0)) throw DomainError("terrain: cell side must be positive");
        if (!(side > 0)) throw DomainError("terrain: side must be positive");
        const double ratio = side / cell;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw DomainError("terrain: side must be an integer multiple of the cell side");
    }
};

struct MobilityStats {
    double mean_cells_per_epoch = 0; // n-bar
    double mean_epoch_area = 0;      // m^2
    double hitting_time = 0;         // s
    double meeting_time = 0;         // s
    double intermeeting_time = 0;    // s, equal to meeting_time
    double moving_prob = 0;
    double contact_stationary = 0;   // s, one node halted
    double contact_moving = 0;       // s, both moving
    double contact = 0;              // s, mixture
    double relative_speed_const = kRelativeSpeedRD;
    // Intermediates of the stationary contact-time closed form.
    double i_adjacent_wall = 0;
    double i_opposite_wall = 0;
    double k_const = 0;
};

namespace detail {

// Unchecked closed form so the L = 0 limit can be probed.
inline double epoch_cell_count_unchecked(double epoch_length, double cell) {
    return 2.0 + 4.0 * epoch_length / (std::numbers::pi * cell);
}

} // namespace detail

inline double mean_epoch_cell_count(const MobilityParams &mob, const TerrainParams &terrain) {
    if (!(terrain.cell > 0)) throw DomainError("cell side must be positive");
    if (!(mob.mean_epoch_length > 0)) throw DomainError("mean epoch length must be positive");
    return detail::epoch_cell_count_unchecked(mob.mean_epoch_length, terrain.cell);
}

inline double mean_epoch_area(const MobilityParams &mob, const TerrainParams &terrain) {
    return mean_epoch_cell_count(mob, terrain) * terrain.cell * terrain.cell;
}

// Expected time for a node started from the stationary distribution to
// reach a random static target: epochs-to-hit times epoch-plus-halt time.
inline double hitting_time(const MobilityParams &mob, const TerrainParams &terrain) {
    const double area = mean_epoch_area(mob, terrain);
    if (!(area > 0)) throw DomainError("hitting time: zero coverage per epoch");
    if (!(mob.mean_speed() > 0)) throw DomainError("hitting time: mean speed must be positive");
    return terrain.area() / area * (mob.mean_epoch_duration() + mob.mean_halt);
}

inline double moving_probability(const MobilityParams &mob) {
    const double epoch = mob.mean_epoch_duration();
    if (!(epoch > 0)) throw DomainError("moving probability: epoch duration must be positive");
    return epoch / (epoch + mob.mean_halt);
}

inline double meeting_time(const MobilityParams &mob, const TerrainParams &terrain) {
    const double pm = moving_probability(mob);
    return hitting_time(mob, terrain) / (pm * kRelativeSpeedRD + 2.0 * (1.0 - pm));
}

inline double intermeeting_time(const MobilityParams &mob, const TerrainParams &terrain) {
    return meeting_time(mob, terrain);
}

struct StationaryContactTerms {
    double k_const;
    double i_adjacent_wall;
    double i_opposite_wall;
    double total; // 2 * I_aw + I_ow
};

inline StationaryContactTerms stationary_contact_terms(const MobilityParams &mob,
                                                       const TerrainParams &terrain) {
    if (!(terrain.cell > 0)) throw DomainError("cell side must be positive");
    if (!(mob.v_min > 0)) throw DomainError("contact time: v_min must be positive");
    if (!(mob.v_max > mob.v_min))
        throw DomainError("contact time: closed form is undefined for v_max <= v_min");
    const double a = terrain.cell;
    const double k = 1.0 / (a * std::numbers::pi * (mob.v_max - mob.v_min));
    const double log_ratio = std::log(mob.v_max / mob.v_min);
    const double log_sqrt2 = std::log(std::numbers::sqrt2 + 1.0);
    const double i_aw = k * a * a / 2.0 * log_ratio * (log_sqrt2 + (std::numbers::sqrt2 - 1.0));
    const double i_ow = 2.0 * k * a * a * log_ratio * (log_sqrt2 + (1.0 - std::numbers::sqrt2));
    return {k, i_aw, i_ow, 2.0 * i_aw + i_ow};
}

inline double contact_time_stationary(const MobilityParams &mob, const TerrainParams &terrain) {
    return stationary_contact_terms(mob, terrain).total;
}

inline double contact_time(const MobilityParams &mob, const TerrainParams &terrain) {
    const double pm = moving_probability(mob);
    const double stationary = contact_time_stationary(mob, terrain);
    return (1.0 - pm) * stationary + pm * (stationary / 2.0);
}

inline MobilityStats compute_mobility_stats(const MobilityParams &mob, const TerrainParams &terrain) {
    mob.validate();
    terrain.validate();
    MobilityStats s;
    s.mean_cells_per_epoch = mean_epoch_cell_count(mob, terrain);
    s.mean_epoch_area = mean_epoch_area(mob, terrain);
    s.hitting_time = hitting_time(mob, terrain);
    s.moving_prob = moving_probability(mob);
    s.meeting_time = meeting_time(mob, terrain);
    s.intermeeting_time = s.meeting_time;
    const auto terms = stationary_contact_terms(mob, terrain);
    s.k_const = terms.k_const;
    s.i_adjacent_wall = terms.i_adjacent_wall;
    s.i_opposite_wall = terms.i_opposite_wall;
    s.contact_stationary = terms.total;
    s.contact_moving = terms.total / 2.0;
    s.contact = (1.0 - s.moving_prob) * s.contact_stationary + s.moving_prob * s.contact_moving;
    return s;
}

} // namespace m2mdtn

#endif
