#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "platoon/params.hpp"
#include "platoon/state.hpp"

namespace platoon {

/// Fixed-step integration window. The horizon must be an integer number of
/// steps; validate() rejects anything else.
struct SimConfig {
  double dt = 0.01;    // [s]
  double t_start = 0.0;
  double t_end = 60.0;

  std::size_t step_count() const;
  void validate() const;
};

/// Time-gridded record of one closed-loop run. accels[j] is the feedback
/// evaluated at states[j], so all three sequences share their length.
struct Trajectory {
  std::vector<double> times;
  std::vector<PlatoonState> states;
  std::vector<AccelVector> accels;

  std::size_t sample_count() const { return times.size(); }
  std::size_t vehicle_count() const { return states.empty() ? 0 : states.front().size(); }
};

/// Raised when the integrator detects a near-collision (a gap collapsing to
/// the minimum) at any internal stage. Carries the simulation time.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// One classical Runge-Kutta step of the closed-loop ODE (x' = v, v' = F).
/// Deterministic; throws SimulationError if a stage gap falls to min_gap.
PlatoonState rk4_step(const PlatoonState& state, const ControllerParams& params, double dt,
                      double t_now = 0.0);

/// Integrates from state0 across the whole window, recording every step.
/// Every recorded state stays in the invariant state space when state0 does.
Trajectory simulate(const PlatoonState& state0, const ControllerParams& params,
                    const SimConfig& cfg);

/// Trapezoidal approximation of the integrated squared acceleration, summed
/// over vehicles. This is the objective of the gain optimization.
double accel_cost(const Trajectory& traj);

/// (max, min) acceleration over all vehicles and instants.
std::pair<double, double> peak_accel(const Trajectory& traj);

/// Minimum-gap policy: a rear vehicle at speed v needs standstill + headway*v
/// of clear road ahead.
struct SpacingPolicy {
  double standstill = 6.0;  // [m]
  double headway = 0.5;     // [s]
};

/// True iff every gap meets the policy threshold for its rear vehicle.
bool spacing_feasible(const PlatoonState& state, const SpacingPolicy& policy);

/// CSV export with header t,x1..xn,v1..vn,a1..an and >= 9 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace platoon
