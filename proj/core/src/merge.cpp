#include "platoon/merge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "platoon/config.hpp"
#include "platoon/controller.hpp"
#include "platoon/csv.hpp"
#include "platoon/rng.hpp"

namespace platoon {

namespace {

constexpr double kTol = 1e-9;  // slack for floating-point constraint checks

}  // namespace

CubicPlan cubic_plan(double t0, double x0, double v0, double tf, double xf, double vf) {
  if (!(tf > t0)) throw std::invalid_argument("cubic_plan: arrival must come after the start");

  // Solve in the start-shifted frame (well conditioned), then expand the
  // shift into absolute-clock coefficients.
  const double window = tf - t0;
  const double pos_gap = xf - x0 - v0 * window;
  const double speed_gap = vf - v0;

  const double jerk = (6.0 * speed_gap * window - 12.0 * pos_gap) / (window * window * window);
  const double accel_local = (speed_gap - 0.5 * jerk * window * window) / window;

  CubicPlan plan;
  plan.jerk = jerk;
  plan.accel0 = accel_local - jerk * t0;
  plan.speed0 = v0 - accel_local * t0 + 0.5 * jerk * t0 * t0;
  plan.offset = x0 - v0 * t0 + 0.5 * accel_local * t0 * t0 - jerk * t0 * t0 * t0 / 6.0;
  plan.start_time = t0;
  plan.arrival_time = tf;
  return plan;
}

PlanPoint cubic_eval(const CubicPlan& plan, double t) {
  if (t < plan.start_time - kTol || t > plan.arrival_time + kTol)
    throw std::out_of_range("cubic_eval: time outside the plan window");
  PlanPoint p;
  p.position = ((plan.jerk * t / 3.0 + plan.accel0) * t / 2.0 + plan.speed0) * t + plan.offset;
  p.speed = (plan.jerk * t / 2.0 + plan.accel0) * t + plan.speed0;
  p.accel = plan.jerk * t + plan.accel0;
  return p;
}

bool arrival_feasible(const ArrivalQuery& query, double arrival_time,
                      const ControllerParams& params, const SpacingPolicy& policy,
                      double constraint_step) {
  if (!(arrival_time > query.depart_time)) return false;

  for (double scheduled : query.scheduled_arrivals)
    if (std::abs(arrival_time - scheduled) < query.min_time_gap - kTol) return false;

  const CubicPlan plan = cubic_plan(query.depart_time, query.start_position, query.start_speed,
                                    arrival_time, query.merge_point, query.exit_speed);

  const double span = arrival_time - query.depart_time;
  const auto samples = static_cast<std::size_t>(std::ceil(span / constraint_step));
  for (std::size_t k = 0; k <= samples; ++k) {
    const double t = k == samples
                         ? arrival_time
                         : query.depart_time + static_cast<double>(k) * constraint_step;
    const PlanPoint p = cubic_eval(plan, t);
    if (p.speed <= kTol || p.speed > params.max_speed + kTol) return false;
    if (p.accel < params.accel_min - kTol || p.accel > params.accel_max + kTol) return false;
    if (query.leader_plan && t <= query.leader_plan->arrival_time + kTol &&
        t >= query.leader_plan->start_time - kTol) {
      const PlanPoint lead = cubic_eval(*query.leader_plan, t);
      const double required = policy.standstill + policy.headway * p.speed;
      if (lead.position - p.position < required - kTol) return false;
    }
  }
  return true;
}

double earliest_arrival(const ArrivalQuery& query, const ControllerParams& params,
                        const SpacingPolicy& policy, double search_step, double constraint_step,
                        double max_horizon) {
  if (!(query.start_position < query.merge_point))
    throw std::invalid_argument("earliest_arrival: vehicle must start upstream of the merge point");
  if (!(query.exit_speed > 0.0 && query.exit_speed <= params.max_speed))
    throw std::invalid_argument("earliest_arrival: exit speed outside (0, max_speed]");

  const auto ceiling = static_cast<std::size_t>(std::floor(max_horizon / search_step));
  for (std::size_t k = 1; k <= ceiling; ++k) {
    const double tf = query.depart_time + static_cast<double>(k) * search_step;
    if (arrival_feasible(query, tf, params, policy, constraint_step)) return tf;
  }
  throw ScheduleError("earliest_arrival: no feasible merge-point arrival within " +
                      std::to_string(max_horizon) + " s");
}

MergeAssignment assign_merge_gain(const PlatoonState& zone, double incoming_position,
                                  double incoming_speed, const MlpModel* model,
                                  const ControllerParams& params, const SimConfig& sim,
                                  const SearchConfig& search) {
  MergeAssignment result;
  result.gain = params.base_gain;

  // Insert by position, front (largest coordinate) first.
  PlatoonState merged = zone;
  std::size_t at = 0;
  while (at < merged.size() && merged.positions[at] > incoming_position) ++at;
  merged.positions.insert(merged.positions.begin() + static_cast<std::ptrdiff_t>(at),
                          incoming_position);
  merged.speeds.insert(merged.speeds.begin() + static_cast<std::ptrdiff_t>(at), incoming_speed);

  for (std::size_t i = 1; i < merged.size(); ++i)
    if (!(merged.spacing(i) > params.min_gap))
      throw MergeRejected("merge rejected: insertion would close gap " + std::to_string(i) +
                          " to " + std::to_string(merged.spacing(i)) + " m");

  result.merged = merged;
  if (merged.size() < 2) return result;  // nothing to control yet
  result.platoon_formed = true;

  if (model && model->vehicle_count == merged.size()) {
    result.gain = predict_gain(*model, merged.speeds, merged.positions);
  } else {
    result.gain = optimize_gain(merged, params, sim, search).gain;
  }
  return result;
}

namespace {

struct ActiveVehicle {
  int id = 0;
  std::size_t track_index = 0;
};

std::size_t snap_step(double t, double t_start, double dt, const char* what) {
  const double steps = (t - t_start) / dt;
  const auto k = std::llround(steps);
  if (k < 0 || std::abs(steps - static_cast<double>(k)) > 1e-6)
    throw std::invalid_argument(std::string(what) + " at t=" + std::to_string(t) +
                                " does not fall on the simulation grid");
  return static_cast<std::size_t>(k);
}

}  // namespace

MergeScenario load_scenario(const std::string& path) {
  const ConfigFile cfg = ConfigFile::parse_file(path);

  MergeScenario scenario;
  scenario.merge_point = cfg.require_double("scenario", "merge_point");
  scenario.zone_length = cfg.get_double("scenario", "zone_length", scenario.zone_length);
  scenario.min_time_gap = cfg.get_double("scenario", "min_time_gap", scenario.min_time_gap);
  scenario.min_exit_speed = cfg.get_double("scenario", "min_exit_speed", scenario.min_exit_speed);
  scenario.min_main_spacing =
      cfg.get_double("scenario", "min_main_spacing", scenario.min_main_spacing);
  scenario.seed = static_cast<std::uint64_t>(cfg.get_int("scenario", "seed", 0));
  scenario.policy.standstill = cfg.get_double("policy", "standstill", scenario.policy.standstill);
  scenario.policy.headway = cfg.get_double("policy", "headway", scenario.policy.headway);

  scenario.main_state.positions = cfg.get_list("main", "positions");
  scenario.main_state.speeds = cfg.get_list("main", "speeds");
  if (scenario.main_state.positions.empty())
    throw ConfigError(path + ": [main] positions is required");

  for (const ConfigFile::Entry* entry : cfg.get_all("ramp", "vehicle")) {
    const std::vector<double> fields = ConfigFile::parse_number_list(
        entry->value, path + ":" + std::to_string(entry->line) + ": [ramp] vehicle");
    if (fields.size() != 3 && fields.size() != 4)
      throw ConfigError(path + ":" + std::to_string(entry->line) +
                        ": [ramp] vehicle needs spawn_time, position, speed[, exit_speed]");
    RampVehicle v;
    v.spawn_time = fields[0];
    v.start_position = fields[1];
    v.start_speed = fields[2];
    v.exit_speed = fields.size() == 4 ? fields[3] : 0.0;
    scenario.ramp.push_back(v);
  }
  return scenario;
}

ScenarioResult run_merge_scenario(const MergeScenario& scenario, const ControllerParams& params,
                                  const SimConfig& cfg, const SearchConfig& search,
                                  const MlpModel* model, GainMode mode) {
  cfg.validate();
  params.validate();
  validate_state(scenario.main_state, params);
  const std::size_t n_main = scenario.main_state.size();
  if (n_main < 2) throw std::invalid_argument("scenario: main platoon needs at least 2 vehicles");
  for (std::size_t i = 1; i < n_main; ++i)
    if (!(scenario.main_state.spacing(i) > scenario.min_main_spacing))
      throw std::invalid_argument("scenario: main spacing " + std::to_string(i) +
                                  " must exceed " + std::to_string(scenario.min_main_spacing) +
                                  " m");
  if (!(scenario.min_time_gap > 0.0))
    throw std::invalid_argument("scenario: min_time_gap must be positive");
  if (!(scenario.zone_length > 0.0))
    throw std::invalid_argument("scenario: zone_length must be positive");

  ScenarioResult result;
  const std::size_t steps = cfg.step_count();
  result.times.resize(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j)
    result.times[j] = cfg.t_start + static_cast<double>(j) * cfg.dt;

  // Committed main-road crossing times from the no-merge baseline run.
  const Trajectory baseline = simulate(scenario.main_state, params, cfg);
  for (std::size_t i = 0; i < n_main; ++i) {
    for (std::size_t j = 1; j < baseline.sample_count(); ++j) {
      const double prev = baseline.states[j - 1].positions[i];
      const double next = baseline.states[j].positions[i];
      if (prev < scenario.merge_point && next >= scenario.merge_point) {
        const double frac = (scenario.merge_point - prev) / (next - prev);
        result.scheduled_arrivals.push_back(baseline.times[j - 1] + frac * cfg.dt);
        break;
      }
    }
  }

  // Plan ramp vehicles in spawn order; each plan commits its arrival.
  std::vector<RampVehicle> ramp = scenario.ramp;
  std::stable_sort(ramp.begin(), ramp.end(),
                   [](const RampVehicle& a, const RampVehicle& b) {
                     return a.spawn_time < b.spawn_time;
                   });
  Rng exit_rng(Rng::substream(scenario.seed, 0xe217));
  const CubicPlan* leader_plan = nullptr;
  for (std::size_t r = 0; r < ramp.size(); ++r) {
    if (!(ramp[r].spawn_time >= cfg.t_start))
      throw std::invalid_argument("scenario: ramp spawn before the simulation start");
    snap_step(ramp[r].spawn_time, cfg.t_start, cfg.dt, "ramp spawn");
    if (!(ramp[r].start_position < scenario.merge_point))
      throw std::invalid_argument("scenario: ramp vehicle must spawn upstream of the merge point");

    double exit_speed = ramp[r].exit_speed;
    if (exit_speed <= 0.0)
      exit_speed = exit_rng.uniform(scenario.min_exit_speed, params.max_speed);
    if (exit_speed < scenario.min_exit_speed - kTol || exit_speed > params.max_speed + kTol)
      throw std::invalid_argument("scenario: exit speed outside [min_exit_speed, max_speed]");

    ArrivalQuery query;
    query.depart_time = ramp[r].spawn_time;
    query.start_position = ramp[r].start_position;
    query.start_speed = ramp[r].start_speed;
    query.exit_speed = exit_speed;
    query.merge_point = scenario.merge_point;
    query.min_time_gap = scenario.min_time_gap;
    query.scheduled_arrivals = result.scheduled_arrivals;
    query.leader_plan = leader_plan;

    const double tf = earliest_arrival(query, params, scenario.policy, cfg.dt);
    result.ramp_plans.push_back(cubic_plan(query.depart_time, query.start_position,
                                           query.start_speed, tf, scenario.merge_point,
                                           exit_speed));
    result.ramp_exit_speeds.push_back(exit_speed);
    result.scheduled_arrivals.push_back(tf);
    leader_plan = &result.ramp_plans.back();
  }

  // Merge events ordered by arrival.
  std::vector<std::size_t> event_order(ramp.size());
  for (std::size_t r = 0; r < ramp.size(); ++r) event_order[r] = r;
  std::sort(event_order.begin(), event_order.end(), [&](std::size_t a, std::size_t b) {
    return result.ramp_plans[a].arrival_time < result.ramp_plans[b].arrival_time;
  });

  // Tracks: main vehicles first, ramp vehicles appended at their merge.
  result.tracks.reserve(n_main + ramp.size());
  std::vector<ActiveVehicle> active;
  PlatoonState current = scenario.main_state;
  for (std::size_t i = 0; i < n_main; ++i) {
    VehicleTrack track;
    track.id = static_cast<int>(i) + 1;
    track.first_step = 0;
    result.tracks.push_back(std::move(track));
    active.push_back(ActiveVehicle{static_cast<int>(i) + 1, i});
  }

  ControllerParams live = params;
  std::vector<double> slopes;
  std::vector<double> accels;

  auto record_step = [&]() {
    const std::size_t n = current.size();
    slopes.resize(n);
    accels.resize(n);
    detail::eval_accels(current.positions, current.speeds, live, slopes, accels);
    for (std::size_t i = 0; i < n; ++i) {
      VehicleTrack& track = result.tracks[active[i].track_index];
      track.positions.push_back(current.positions[i]);
      track.speeds.push_back(current.speeds[i]);
      track.accels.push_back(accels[i]);
    }
  };

  std::size_t next_event = 0;
  std::size_t step = 0;
  while (true) {
    record_step();
    if (step == steps) break;

    // Advance one step, folding in any merge scheduled at the next instant.
    current = rk4_step(current, live, cfg.dt, result.times[step]);
    ++step;

    while (next_event < event_order.size()) {
      const std::size_t r = event_order[next_event];
      const double tf = result.ramp_plans[r].arrival_time;
      const std::size_t event_step = snap_step(tf, cfg.t_start, cfg.dt, "merge arrival");
      if (event_step != step) break;

      const std::size_t size_before = current.size();
      const double exit_speed = result.ramp_exit_speeds[r];

      // Zone membership at the merge instant.
      PlatoonState zone;
      std::vector<std::size_t> zone_index;
      for (std::size_t i = 0; i < current.size(); ++i) {
        const double x = current.positions[i];
        if (x <= scenario.merge_point + kTol &&
            x >= scenario.merge_point - scenario.zone_length - kTol) {
          zone.positions.push_back(x);
          zone.speeds.push_back(current.speeds[i]);
          zone_index.push_back(i);
        }
      }

      double gain = live.base_gain;
      if (mode == GainMode::kCoordinator) {
        const MergeAssignment assignment = assign_merge_gain(
            zone, scenario.merge_point, exit_speed, model, live, cfg, search);
        if (assignment.platoon_formed) gain = assignment.gain;
      }

      // Physically insert into the full platoon.
      std::size_t at = 0;
      while (at < current.size() && current.positions[at] > scenario.merge_point) ++at;
      current.positions.insert(current.positions.begin() + static_cast<std::ptrdiff_t>(at),
                               scenario.merge_point);
      current.speeds.insert(current.speeds.begin() + static_cast<std::ptrdiff_t>(at), exit_speed);
      for (std::size_t i = 1; i < current.size(); ++i)
        if (!(current.spacing(i) > live.min_gap))
          throw MergeRejected("merge rejected at t=" + std::to_string(tf) + ": gap " +
                              std::to_string(i) + " below the minimum");

      const int id = static_cast<int>(n_main + r) + 1;
      VehicleTrack track;
      track.id = id;
      track.first_step = step;
      result.tracks.push_back(std::move(track));
      active.insert(active.begin() + static_cast<std::ptrdiff_t>(at),
                    ActiveVehicle{id, result.tracks.size() - 1});

      live.base_gain = gain;
      result.events.push_back(MergeEvent{tf, id, gain, size_before, current.size()});
      ++next_event;
    }
  }

  return result;
}

void write_scenario_csv(const std::string& path, const ScenarioResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  out << 't';
  for (const VehicleTrack& track : result.tracks) out << ",x" << track.id;
  for (const VehicleTrack& track : result.tracks) out << ",v" << track.id;
  for (const VehicleTrack& track : result.tracks) out << ",a" << track.id;
  out << '\n';

  auto cell = [&](const VehicleTrack& track, std::size_t step,
                  const std::vector<double> VehicleTrack::*series) {
    if (step < track.first_step) return std::string();
    return csv::num((track.*series)[step - track.first_step]);
  };

  for (std::size_t j = 0; j < result.times.size(); ++j) {
    out << csv::num(result.times[j]);
    for (const VehicleTrack& t : result.tracks) out << ',' << cell(t, j, &VehicleTrack::positions);
    for (const VehicleTrack& t : result.tracks) out << ',' << cell(t, j, &VehicleTrack::speeds);
    for (const VehicleTrack& t : result.tracks) out << ',' << cell(t, j, &VehicleTrack::accels);
    out << '\n';
  }
}

void write_events_csv(const std::string& path, const std::vector<MergeEvent>& events) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,vehicle_id,mu_assigned,platoon_size_before,platoon_size_after\n";
  for (const MergeEvent& e : events)
    out << csv::num(e.time) << ',' << e.vehicle_id << ',' << csv::num17(e.gain) << ','
        << e.size_before << ',' << e.size_after << '\n';
}

void write_plan_csv(const std::string& path, const CubicPlan& plan, double dt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,x,v,a\n";
  const auto samples =
      static_cast<std::size_t>(std::llround((plan.arrival_time - plan.start_time) / dt));
  for (std::size_t k = 0; k <= samples; ++k) {
    const double t = k == samples ? plan.arrival_time
                                  : plan.start_time + static_cast<double>(k) * dt;
    const PlanPoint p = cubic_eval(plan, t);
    out << csv::num(t) << ',' << csv::num(p.position) << ',' << csv::num(p.speed) << ','
        << csv::num(p.accel) << '\n';
  }
}

}  // namespace platoon
