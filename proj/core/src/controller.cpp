#include "platoon/controller.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace platoon {

void ControllerParams::validate() const {
  if (!(min_gap > 0.0)) throw std::invalid_argument("min_gap must be positive");
  if (!(interaction_range > min_gap))
    throw std::invalid_argument("interaction_range must exceed min_gap");
  if (!(desired_speed > 0.0)) throw std::invalid_argument("desired_speed must be positive");
  if (!(max_speed > desired_speed))
    throw std::invalid_argument("max_speed must exceed desired_speed");
  if (!(kernel_width > 0.0)) throw std::invalid_argument("kernel_width must be positive");
  if (!(base_gain > 0.0 && base_gain <= 2.0))
    throw std::invalid_argument("base_gain must lie in (0, 2]");
  if (!(accel_min < 0.0)) throw std::invalid_argument("accel_min must be negative");
  if (!(accel_max > 0.0)) throw std::invalid_argument("accel_max must be positive");
}

void validate_state(const PlatoonState& state, const ControllerParams& params) {
  const std::size_t n = state.size();
  if (state.speeds.size() != n)
    throw std::invalid_argument("positions and speeds differ in length");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(state.spacing(i) > params.min_gap))
      throw std::invalid_argument("spacing " + std::to_string(i) + " is not above min_gap");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(state.speeds[i] >= 0.0 && state.speeds[i] <= params.max_speed))
      throw std::invalid_argument("speed " + std::to_string(i) +
                                  " is outside [0, max_speed]");
  }
}

double potential(double spacing, const ControllerParams& params) {
  if (!(spacing > params.min_gap))
    throw std::domain_error("potential: spacing at or below min_gap");
  if (spacing >= params.interaction_range) return 0.0;
  const double reach = params.interaction_range - spacing;
  return reach * reach * reach / (spacing - params.min_gap);
}

double potential_slope(double spacing, const ControllerParams& params) {
  if (!(spacing > params.min_gap))
    throw std::domain_error("potential_slope: spacing at or below min_gap");
  if (spacing >= params.interaction_range) return 0.0;
  const double reach = params.interaction_range - spacing;
  const double depth = spacing - params.min_gap;
  return -3.0 * reach * reach / depth - reach * reach * reach / (depth * depth);
}

double kernel_f(double x, const ControllerParams& params) {
  const double eps = params.kernel_width;
  if (x <= -eps) return 0.0;
  if (x < 0.0) {
    const double shifted = x + eps;
    return shifted * shifted / (2.0 * eps);
  }
  return (eps * eps + 2.0 * eps * x) / (2.0 * eps);
}

double gain_g(double x, const ControllerParams& params) {
  const double v_star = params.desired_speed;
  const double headroom = params.max_speed - v_star;
  return params.max_speed * kernel_f(x, params) / (v_star * headroom) - x / v_star;
}

namespace detail {

void eval_accels(std::span<const double> positions, std::span<const double> speeds,
                 const ControllerParams& params, std::span<double> slope_scratch,
                 std::span<double> accels) {
  const std::size_t n = positions.size();
  for (std::size_t i = 1; i < n; ++i)
    slope_scratch[i] = potential_slope(positions[i - 1] - positions[i], params);

  const double v_star = params.desired_speed;
  for (std::size_t i = 0; i < n; ++i) {
    double slope_term;  // net potential push on vehicle i
    if (i == 0)
      slope_term = -slope_scratch[1];
    else if (i + 1 < n)
      slope_term = slope_scratch[i] - slope_scratch[i + 1];
    else
      slope_term = slope_scratch[i];
    const double k = params.base_gain + gain_g(slope_term, params);
    accels[i] = -k * (speeds[i] - v_star) + slope_term;
  }
}

}  // namespace detail

std::vector<double> vehicle_gains(const PlatoonState& state, const ControllerParams& params) {
  const std::size_t n = state.size();
  if (n < 2) throw std::invalid_argument("vehicle_gains: platoon needs at least 2 vehicles");
  std::vector<double> slopes(n);
  for (std::size_t i = 1; i < n; ++i)
    slopes[i] = potential_slope(state.spacing(i), params);

  std::vector<double> gains(n);
  for (std::size_t i = 0; i < n; ++i) {
    double arg;
    if (i == 0)
      arg = -slopes[1];
    else if (i + 1 < n)
      arg = slopes[i] - slopes[i + 1];
    else
      arg = slopes[i];
    gains[i] = params.base_gain + gain_g(arg, params);
  }
  return gains;
}

AccelVector feedback(const PlatoonState& state, const ControllerParams& params) {
  const std::size_t n = state.size();
  if (n < 2) throw std::invalid_argument("feedback: platoon needs at least 2 vehicles");
  std::vector<double> slopes(n);
  AccelVector accels(n);
  detail::eval_accels(state.positions, state.speeds, params, slopes, accels);
  return accels;
}

bool in_state_space(const PlatoonState& state, const ControllerParams& params) {
  const std::size_t n = state.size();
  for (std::size_t i = 1; i < n; ++i)
    if (!(state.spacing(i) > params.min_gap)) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (!(state.speeds[i] >= 0.0 && state.speeds[i] <= params.max_speed)) return false;
  return true;
}

}  // namespace platoon
