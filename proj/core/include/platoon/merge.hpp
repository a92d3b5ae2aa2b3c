#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/gain_search.hpp"
#include "platoon/mlp.hpp"
#include "platoon/params.hpp"
#include "platoon/simulate.hpp"
#include "platoon/state.hpp"

namespace platoon {

/// Cubic ramp trajectory with acceleration affine in (absolute) time:
///   accel(t) = jerk*t + accel0
///   speed(t) = jerk*t^2/2 + accel0*t + speed0
///   pos(t)   = jerk*t^3/6 + accel0*t^2/2 + speed0*t + offset
/// accel0/speed0/offset are the clock-zero values of each polynomial, not
/// the values at start_time.
struct CubicPlan {
  double jerk = 0.0;
  double accel0 = 0.0;
  double speed0 = 0.0;
  double offset = 0.0;
  double start_time = 0.0;
  double arrival_time = 0.0;
};

/// Fits the unique cubic meeting position and speed at both ends of the
/// window. Throws std::invalid_argument when the window is empty.
CubicPlan cubic_plan(double t0, double x0, double v0, double tf, double xf, double vf);

struct PlanPoint {
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

/// Evaluates the plan inside [start_time, arrival_time]; out-of-window times
/// throw std::out_of_range.
PlanPoint cubic_eval(const CubicPlan& plan, double t);

/// Raised when no arrival time satisfies the scheduling constraints below
/// the search ceiling, or when a scenario is unschedulable.
class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an incoming vehicle cannot be inserted without violating the
/// minimum gap; signals a scheduling fault upstream.
class MergeRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One ramp vehicle's request for a merge-point arrival time.
struct ArrivalQuery {
  double depart_time = 0.0;
  double start_position = 0.0;
  double start_speed = 0.0;
  double exit_speed = 0.0;
  double merge_point = 0.0;
  double min_time_gap = 1.5;
  std::vector<double> scheduled_arrivals;   // committed crossings, main road and ramp
  const CubicPlan* leader_plan = nullptr;   // preceding ramp vehicle, if any
};

/// Feasibility of one candidate arrival time: speed in (0, max_speed],
/// acceleration within bounds, rear-end gap to the preceding ramp vehicle at
/// or above the policy threshold while both plans overlap, and at least
/// min_time_gap from every scheduled arrival. Constraints are sampled every
/// constraint_step along the plan (endpoint included).
bool arrival_feasible(const ArrivalQuery& query, double arrival_time,
                      const ControllerParams& params, const SpacingPolicy& policy,
                      double constraint_step = 0.05);

/// Smallest admissible arrival time on the depart_time + k*search_step grid.
/// Throws ScheduleError when nothing is feasible within max_horizon seconds.
double earliest_arrival(const ArrivalQuery& query, const ControllerParams& params,
                        const SpacingPolicy& policy, double search_step = 0.01,
                        double constraint_step = 0.05, double max_horizon = 300.0);

struct MergeEvent {
  double time = 0.0;
  int vehicle_id = 0;
  double gain = 0.0;
  std::size_t size_before = 0;
  std::size_t size_after = 0;
};

/// Gain selection at a merge instant. The post-merge platoon is the control
/// zone's vehicles plus the incoming one, inserted by position. The surrogate
/// answers when its width matches the merged platoon; otherwise (or with no
/// model) the gain optimizer is solved directly. A zone smaller than two
/// vehicles leaves the gain unchanged.
struct MergeAssignment {
  double gain = 0.0;
  PlatoonState merged;
  bool platoon_formed = false;
};

MergeAssignment assign_merge_gain(const PlatoonState& zone, double incoming_position,
                                  double incoming_speed, const MlpModel* model,
                                  const ControllerParams& params, const SimConfig& sim,
                                  const SearchConfig& search);

struct RampVehicle {
  double spawn_time = 0.0;
  double start_position = 0.0;
  double start_speed = 0.0;
  double exit_speed = 0.0;  // <= 0 means "draw one from [min_exit_speed, max_speed]"
};

struct MergeScenario {
  PlatoonState main_state;
  std::vector<RampVehicle> ramp;
  double merge_point = 0.0;
  double zone_length = 400.0;
  double min_time_gap = 1.5;
  double min_exit_speed = 23.0;
  double min_main_spacing = 50.0;  // required initial main-road gaps
  SpacingPolicy policy;
  std::uint64_t seed = 0;
};

/// Parses the declarative scenario file ([scenario], [main], [ramp],
/// [policy] sections). Errors carry file and line.
MergeScenario load_scenario(const std::string& path);

enum class GainMode {
  kCoordinator,    // re-assign the gain at every merge event
  kFixedBaseline,  // keep the configured base gain throughout
};

/// Per-vehicle time series; ids 1..n_main are the initial platoon front to
/// back, ramp vehicles continue the numbering in spawn order. Ramp tracks
/// start at their merge step (the approach is covered by the plan).
struct VehicleTrack {
  int id = 0;
  std::size_t first_step = 0;
  std::vector<double> positions;
  std::vector<double> speeds;
  std::vector<double> accels;
};

struct ScenarioResult {
  std::vector<double> times;
  std::vector<VehicleTrack> tracks;
  std::vector<CubicPlan> ramp_plans;
  std::vector<double> ramp_exit_speeds;
  std::vector<MergeEvent> events;
  std::vector<double> scheduled_arrivals;  // main-road commitments plus ramp arrivals
};

/// Event-driven scenario execution: the main platoon integrates under the
/// cruise controllers; each ramp vehicle follows its cubic plan and joins at
/// its arrival time, at which point the gain assignment reruns and the
/// initial value problem restarts from the merged state. The merge-instant
/// gain applies to the whole simulated platoon (the scenarios keep the
/// control zone covering it; per-vehicle gains are out of scope).
ScenarioResult run_merge_scenario(const MergeScenario& scenario, const ControllerParams& params,
                                  const SimConfig& cfg, const SearchConfig& search,
                                  const MlpModel* model, GainMode mode);

/// Main-road trajectory CSV: t, then x<i>,v<i>,a<i> grouped per column kind;
/// cells are empty before a vehicle's merge step.
void write_scenario_csv(const std::string& path, const ScenarioResult& result);

/// Event log CSV `t,vehicle_id,mu_assigned,platoon_size_before,platoon_size_after`.
void write_events_csv(const std::string& path, const std::vector<MergeEvent>& events);

/// Samples a plan every dt from spawn to arrival: CSV `t,x,v,a`.
void write_plan_csv(const std::string& path, const CubicPlan& plan, double dt);

}  // namespace platoon
