#pragma once

#include <span>
#include <vector>

#include "platoon/params.hpp"
#include "platoon/state.hpp"

namespace platoon {

/// Repulsive pairwise potential. Positive and diverging as the spacing
/// approaches min_gap from above, identically zero at and beyond
/// interaction_range. Throws std::domain_error for spacing <= min_gap.
double potential(double spacing, const ControllerParams& params);

/// Analytic derivative of potential() with respect to the spacing.
/// Non-positive everywhere and continuous at interaction_range.
double potential_slope(double spacing, const ControllerParams& params);

/// Non-decreasing smooth kernel with kernel_f(x) >= max(x, 0). Piecewise
/// quadratic around zero with C1 joins at -kernel_width and 0.
double kernel_f(double x, const ControllerParams& params);

/// Gain shaping term keeping speeds inside [0, max_speed]:
/// g(x) = max_speed * f(x) / (v* (max_speed - v*)) - x / v*.
double gain_g(double x, const ControllerParams& params);

/// Per-vehicle state-dependent gains k_i = base_gain + g(...), where the
/// argument couples each vehicle to the potential slopes of its neighbors.
std::vector<double> vehicle_gains(const PlatoonState& state, const ControllerParams& params);

/// Bidirectional cruise-control accelerations for the whole platoon.
/// The leader reacts only to its follower, the tail only to its leader,
/// interior vehicles to both. Requires at least two vehicles.
AccelVector feedback(const PlatoonState& state, const ControllerParams& params);

/// Membership in the invariant state space: every gap above min_gap
/// (strict), every speed within [0, max_speed].
bool in_state_space(const PlatoonState& state, const ControllerParams& params);

namespace detail {

/// Allocation-free acceleration evaluation used by the integrator.
/// slope_scratch must have n elements; accels is written for all n.
/// Index i of slope_scratch (i >= 1) holds the potential slope of the gap
/// ahead of vehicle i.
void eval_accels(std::span<const double> positions, std::span<const double> speeds,
                 const ControllerParams& params, std::span<double> slope_scratch,
                 std::span<double> accels);

}  // namespace detail

}  // namespace platoon
