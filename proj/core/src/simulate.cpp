#include "platoon/simulate.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "platoon/controller.hpp"
#include "platoon/csv.hpp"

namespace platoon {

namespace {

constexpr double kCollisionGuard = 1e-6;  // abort margin above min_gap

// Scratch buffers for one platoon so the hot loop never allocates.
struct Integrator {
  explicit Integrator(std::size_t n)
      : slopes(n), k1x(n), k1v(n), k2x(n), k2v(n), k3x(n), k3v(n), k4x(n), k4v(n),
        stage_pos(n), stage_vel(n) {}

  std::vector<double> slopes;
  std::vector<double> k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
  std::vector<double> stage_pos, stage_vel;

  void derivative(const std::vector<double>& pos, const std::vector<double>& vel,
                  const ControllerParams& params, double t_now, std::vector<double>& dx,
                  std::vector<double>& dv) {
    const std::size_t n = pos.size();
    for (std::size_t i = 1; i < n; ++i) {
      if (pos[i - 1] - pos[i] <= params.min_gap + kCollisionGuard)
        throw SimulationError("near-collision: gap " + std::to_string(i) +
                                  " collapsed to the minimum",
                              t_now);
    }
    dx = vel;
    detail::eval_accels(pos, vel, params, slopes, dv);
  }

  void advance(std::vector<double>& pos, std::vector<double>& vel,
               const ControllerParams& params, double dt, double t_now) {
    const std::size_t n = pos.size();
    derivative(pos, vel, params, t_now, k1x, k1v);

    for (std::size_t i = 0; i < n; ++i) {
      stage_pos[i] = pos[i] + 0.5 * dt * k1x[i];
      stage_vel[i] = vel[i] + 0.5 * dt * k1v[i];
    }
    derivative(stage_pos, stage_vel, params, t_now, k2x, k2v);

    for (std::size_t i = 0; i < n; ++i) {
      stage_pos[i] = pos[i] + 0.5 * dt * k2x[i];
      stage_vel[i] = vel[i] + 0.5 * dt * k2v[i];
    }
    derivative(stage_pos, stage_vel, params, t_now, k3x, k3v);

    for (std::size_t i = 0; i < n; ++i) {
      stage_pos[i] = pos[i] + dt * k3x[i];
      stage_vel[i] = vel[i] + dt * k3v[i];
    }
    derivative(stage_pos, stage_vel, params, t_now, k4x, k4v);

    for (std::size_t i = 0; i < n; ++i) {
      pos[i] += dt * ((k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]) / 6.0);
      vel[i] += dt * ((k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]) / 6.0);
    }
  }
};

}  // namespace

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround((t_end - t_start) / dt));
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end > t_start)) throw std::invalid_argument("t_end must exceed t_start");
  const double steps = (t_end - t_start) / dt;
  if (std::abs(steps - std::llround(steps)) > 1e-9 || std::llround(steps) < 1)
    throw std::invalid_argument("horizon must be a positive integer number of steps");
}

PlatoonState rk4_step(const PlatoonState& state, const ControllerParams& params, double dt,
                      double t_now) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (state.size() < 2) throw std::invalid_argument("rk4_step: platoon needs at least 2 vehicles");
  PlatoonState next = state;
  Integrator integ(state.size());
  integ.advance(next.positions, next.speeds, params, dt, t_now);
  return next;
}

Trajectory simulate(const PlatoonState& state0, const ControllerParams& params,
                    const SimConfig& cfg) {
  cfg.validate();
  if (state0.size() < 2) throw std::invalid_argument("simulate: platoon needs at least 2 vehicles");

  const std::size_t steps = cfg.step_count();
  const std::size_t n = state0.size();

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.accels.reserve(steps + 1);

  Integrator integ(n);
  PlatoonState current = state0;

  for (std::size_t j = 0; j <= steps; ++j) {
    const double t = cfg.t_start + static_cast<double>(j) * cfg.dt;
    AccelVector accels(n);
    detail::eval_accels(current.positions, current.speeds, params, integ.slopes, accels);
    traj.times.push_back(t);
    traj.states.push_back(current);
    traj.accels.push_back(std::move(accels));
    if (j < steps) integ.advance(current.positions, current.speeds, params, cfg.dt, t);
  }
  return traj;
}

double accel_cost(const Trajectory& traj) {
  if (traj.sample_count() == 0) throw std::invalid_argument("accel_cost: empty trajectory");
  if (traj.sample_count() == 1) return 0.0;

  auto squared_sum = [&](std::size_t j) {
    double q = 0.0;
    for (double a : traj.accels[j]) q += a * a;
    return q;
  };

  double total = 0.0;
  for (std::size_t j = 0; j + 1 < traj.sample_count(); ++j) {
    const double dt = traj.times[j + 1] - traj.times[j];
    total += 0.5 * dt * (squared_sum(j) + squared_sum(j + 1));
  }
  return total;
}

std::pair<double, double> peak_accel(const Trajectory& traj) {
  if (traj.sample_count() == 0) throw std::invalid_argument("peak_accel: empty trajectory");
  double hi = traj.accels[0][0];
  double lo = hi;
  for (const AccelVector& row : traj.accels) {
    for (double a : row) {
      if (a > hi) hi = a;
      if (a < lo) lo = a;
    }
  }
  return {hi, lo};
}

bool spacing_feasible(const PlatoonState& state, const SpacingPolicy& policy) {
  for (std::size_t i = 1; i < state.size(); ++i) {
    const double threshold = policy.standstill + policy.headway * state.speeds[i];
    if (state.spacing(i) < threshold) return false;
  }
  return true;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t n = traj.vehicle_count();
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",v" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",a" << i;
  out << '\n';
  for (std::size_t j = 0; j < traj.sample_count(); ++j) {
    out << csv::num(traj.times[j]);
    for (double x : traj.states[j].positions) out << ',' << csv::num(x);
    for (double v : traj.states[j].speeds) out << ',' << csv::num(v);
    for (double a : traj.accels[j]) out << ',' << csv::num(a);
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory_csv(out, traj);
}

}  // namespace platoon
