#pragma once

namespace platoon {

/// The tunable gain lives in (0, kGainDomainMax]; kGainFloor is the practical
/// positive floor standing in for the open lower bound.
inline constexpr double kGainDomainMax = 2.0;
inline constexpr double kGainFloor = 0.01;

/// Physical and controller constants shared by every vehicle in a platoon.
///
/// The defaults reproduce the standard single-lane setup: 5 m minimum gap,
/// 20 m repulsion range, 30 m/s desired speed under a 35 m/s limit.
struct ControllerParams {
  double min_gap = 5.0;            // spacing at which the repulsion diverges [m]
  double interaction_range = 20.0; // spacing beyond which vehicles ignore each other [m]
  double desired_speed = 30.0;     // common speed target [m/s]
  double max_speed = 35.0;         // speed limit [m/s]
  double kernel_width = 0.2;       // smoothing width of the gain kernel
  double base_gain = 0.5;          // tunable convergence gain, in (0, 2]
  double accel_min = -4.0;         // deceleration bound [m/s^2]
  double accel_max = 3.5;          // acceleration bound [m/s^2]

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

}  // namespace platoon
