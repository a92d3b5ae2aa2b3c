// Acceptance suite: one check per release criterion, each printing a
// PASS/FAIL line with the measured numbers. Exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "platoon/controller.hpp"
#include "platoon/dataset.hpp"
#include "platoon/gain_search.hpp"
#include "platoon/merge.hpp"
#include "platoon/mlp.hpp"
#include "platoon/parallel.hpp"
#include "platoon/rng.hpp"
#include "platoon/simulate.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace {

struct CriterionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw CriterionFailure(message);
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : hw;
}

const ControllerParams kParams{};  // L=5, lambda=20, v*=30, v_max=35, eps=0.2, bounds (-4, 3.5)

PlatoonState experiment_draw(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PlatoonState state;
  state.positions.resize(n);
  state.speeds.resize(n);
  for (std::size_t i = 0; i < n; ++i) state.speeds[i] = rng.uniform(27.0, 34.0);
  state.positions[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    state.positions[i] = state.positions[i - 1] - rng.uniform(16.0, 24.0);
  return state;
}

double peak_abs(const GainEvaluation& e) { return std::max(e.peak_max, -e.peak_min); }
double peak_abs(const GainSolution& s) { return std::max(s.peak_max, -s.peak_min); }

// ---------------------------------------------------------------------------
// 1. Equilibrium nullity

std::string criterion_equilibrium() {
  PlatoonState state;
  state.positions = {0.0, -25.0, -50.0, -75.0, -100.0, -125.0, -150.0};
  state.speeds.assign(7, kParams.desired_speed);

  const auto start = std::chrono::steady_clock::now();
  const Trajectory traj = simulate(state, kParams, SimConfig{});
  const double elapsed = seconds_since(start);

  double worst = 0.0;
  for (const AccelVector& row : traj.accels)
    for (double a : row) worst = std::max(worst, std::abs(a));

  require(worst < 1e-10, "max |accel| " + fmt(worst) + " >= 1e-10");
  require(elapsed < 1.0, "runtime " + fmt(elapsed) + " s >= 1 s");
  return "max |accel| " + fmt(worst, 2) + ", " + fmt(elapsed, 2) + " s";
}

// ---------------------------------------------------------------------------
// 2. State-space invariance and convergence at the baseline gain

std::string criterion_invariance() {
  const auto start = std::chrono::steady_clock::now();
  const int draws = 500;
  std::vector<std::string> faults(draws);

  parallel_for(draws, worker_count(), [&](std::size_t i) {
    const PlatoonState state0 = experiment_draw(7, 1000 + i);
    const Trajectory traj = simulate(state0, kParams, SimConfig{});
    for (const PlatoonState& s : traj.states)
      if (!in_state_space(s, kParams)) {
        faults[i] = "left the state space";
        return;
      }
    for (double v : traj.states.back().speeds)
      if (std::abs(v - kParams.desired_speed) > 0.1) {
        faults[i] = "final speed off by " + fmt(std::abs(v - 30.0));
        return;
      }
  });

  for (int i = 0; i < draws; ++i)
    require(faults[static_cast<std::size_t>(i)].empty(),
            "draw " + std::to_string(i) + ": " + faults[static_cast<std::size_t>(i)]);
  const double elapsed = seconds_since(start);
  require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s >= 60 s");
  return "500 draws clean, " + fmt(elapsed, 3) + " s";
}

// ---------------------------------------------------------------------------
// 3. Controller math oracles

std::string criterion_math_oracles() {
  // potential slope against central differences
  double worst_rel = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double s = (kParams.min_gap + 0.1) +
                     (2.0 * kParams.interaction_range - kParams.min_gap - 0.1) * k / 2000.0;
    const double h = 1e-6;
    const double numeric = (potential(s + h, kParams) - potential(s - h, kParams)) / (2.0 * h);
    const double analytic = potential_slope(s, kParams);
    const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
    worst_rel = std::max(worst_rel, rel);
  }
  require(worst_rel <= 1e-4, "potential slope FD mismatch " + fmt(worst_rel));

  // kernel bounds and monotonicity on a 10^4 grid
  const double eps = kParams.kernel_width;
  double prev = kernel_f(-5.0 * eps, kParams);
  for (int k = 0; k <= 10000; ++k) {
    const double x = -5.0 * eps + 10.0 * eps * k / 10000.0;
    const double f = kernel_f(x, kParams);
    require(f >= std::max(x, 0.0), "kernel below its envelope at x=" + fmt(x));
    require(f >= prev - 1e-15, "kernel decreased at x=" + fmt(x));
    prev = f;
  }

  // analytic MLP gradients against central differences on a tiny model
  Dataset data;
  data.vehicle_count = 2;
  Rng rng(303);
  for (int i = 0; i < 5; ++i) {
    Sample s;
    s.speeds = {rng.uniform(27.0, 34.0), rng.uniform(27.0, 34.0)};
    s.positions = {0.0, -rng.uniform(16.0, 24.0)};
    s.gain = rng.uniform(0.05, 1.5);
    data.samples.push_back(std::move(s));
  }
  data.train_idx = {0, 1, 2, 3, 4};
  data.val_idx = {0};
  data.test_idx = {0};

  TrainConfig tiny;
  tiny.branch_width = 2;
  tiny.merge_width = 2;
  tiny.seed = 17;
  MlpModel model = init_model(2, tiny, fit_norm_stats(data));

  std::vector<std::vector<double>> features;
  std::vector<double> labels;
  for (const Sample& s : data.samples) {
    features.push_back(normalize_features(model.norm, s.speeds, s.positions));
    labels.push_back(normalize_label(model.norm, s.gain));
  }
  MlpGradients grads;
  loss_and_gradients(model, features, labels, grads);

  double worst_grad = 0.0;
  auto check_layer = [&](DenseLayer MlpModel::*field, const DenseLayer& grad) {
    DenseLayer& layer = model.*field;
    auto probe = [&](double& slot, double expected) {
      const double saved = slot;
      const double h = 1e-6;
      MlpGradients scratch;
      slot = saved + h;
      const double up = loss_and_gradients(model, features, labels, scratch);
      slot = saved - h;
      const double down = loss_and_gradients(model, features, labels, scratch);
      slot = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(expected - numeric) /
                         std::max({1e-8, std::abs(expected), std::abs(numeric)});
      worst_grad = std::max(worst_grad, rel);
    };
    for (std::size_t k = 0; k < layer.weights.size(); ++k)
      probe(layer.weights[k], grad.weights[k]);
    for (std::size_t k = 0; k < layer.biases.size(); ++k) probe(layer.biases[k], grad.biases[k]);
  };
  check_layer(&MlpModel::speed_layer, grads.speed_layer);
  check_layer(&MlpModel::position_layer, grads.position_layer);
  check_layer(&MlpModel::merge_layer, grads.merge_layer);
  check_layer(&MlpModel::output_layer, grads.output_layer);
  require(worst_grad <= 1e-4, "gradient FD mismatch " + fmt(worst_grad));

  return "FD slope rel " + fmt(worst_rel, 2) + ", kernel grid clean, grad rel " +
         fmt(worst_grad, 2);
}

// ---------------------------------------------------------------------------
// 4. Optimizer against the dense-grid oracle, plus baseline dominance

struct OracleInstance {
  PlatoonState state;
  GainSolution fast;
  GainSolution dense;
};

std::string criterion_optimizer() {
  const auto start = std::chrono::steady_clock::now();
  const SimConfig sim{};
  SearchConfig search;
  search.refine_tol = 2e-4;

  // 20 feasible seeded instances across platoon sizes
  const std::size_t sizes[] = {2, 3, 7};
  std::vector<PlatoonState> instances;
  std::uint64_t seed = 4000;
  while (instances.size() < 20) {
    const PlatoonState state = experiment_draw(sizes[instances.size() % 3], seed++);
    if (optimize_gain(state, kParams, sim, search).feasible) instances.push_back(state);
  }

  std::vector<OracleInstance> results(instances.size());
  parallel_for(instances.size(), worker_count(), [&](std::size_t i) {
    results[i].state = instances[i];
    results[i].fast = optimize_gain(instances[i], kParams, sim, search);

    GainSolution best;
    bool have = false;
    for (int k = 0; k <= 3980; ++k) {
      const double mu = std::min(2.0, 0.01 + 5e-4 * k);
      const GainEvaluation e = evaluate_gain(instances[i], mu, kParams, sim);
      if (!e.feasible) continue;
      if (!have || e.cost < best.cost - 1e-9) {
        best = GainSolution{e.gain, e.cost, true, e.peak_max, e.peak_min};
        have = true;
      }
    }
    results[i].dense = best;
  });

  double worst_mu = 0.0, worst_cost = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    require(r.fast.feasible && r.dense.feasible,
            "instance " + std::to_string(i) + " lost feasibility");
    worst_mu = std::max(worst_mu, std::abs(r.fast.gain - r.dense.gain));
    worst_cost = std::max(worst_cost, std::abs(r.fast.cost - r.dense.cost) /
                                          std::max(1e-12, r.dense.cost));
    require(std::abs(r.fast.gain - r.dense.gain) <= 1e-3,
            "instance " + std::to_string(i) + ": |mu - oracle| " +
                fmt(std::abs(r.fast.gain - r.dense.gain)));
    require(std::abs(r.fast.cost - r.dense.cost) <= 1e-6 * std::max(1e-12, r.dense.cost),
            "instance " + std::to_string(i) + ": cost off by " +
                fmt(std::abs(r.fast.cost - r.dense.cost)));
  }

  // dominance over the fixed baseline on 100 instances
  int baseline_feasible = 0;
  std::vector<int> verdict(100, -1);  // -1 skip, 0 fail, 1 pass
  parallel_for(100, worker_count(), [&](std::size_t i) {
    const PlatoonState state = experiment_draw(7, 5000 + i);
    const GainEvaluation base = evaluate_gain(state, 0.5, kParams, sim);
    if (!base.feasible) return;
    const GainSolution sol = optimize_gain(state, kParams, sim, SearchConfig{});
    verdict[i] = (sol.feasible && sol.cost <= base.cost + 1e-9) ? 1 : 0;
  });
  for (std::size_t i = 0; i < verdict.size(); ++i) {
    if (verdict[i] < 0) continue;
    ++baseline_feasible;
    require(verdict[i] == 1, "draw " + std::to_string(i) + " lost to the 0.5 baseline");
  }
  require(baseline_feasible > 0, "no draw had a feasible 0.5 baseline");

  const double elapsed = seconds_since(start);
  require(elapsed < 600.0, "runtime " + fmt(elapsed) + " s >= 10 min");
  return "20 oracle matches (worst dmu " + fmt(worst_mu, 2) + ", dcost rel " +
         fmt(worst_cost, 2) + "), dominance on " + std::to_string(baseline_feasible) +
         " feasible baselines, " + fmt(elapsed, 3) + " s";
}

// ---------------------------------------------------------------------------
// 5. Peak-acceleration reduction against the fixed gain

std::string criterion_accel_reduction() {
  const SimConfig sim{};
  const int draws = 100;
  std::vector<double> reduction(draws);
  std::vector<int> rescued(draws, 0);  // 0.5 violates the bounds, tuned gain does not

  parallel_for(draws, worker_count(), [&](std::size_t i) {
    const PlatoonState state = experiment_draw(7, 6000 + i);
    const GainEvaluation base = evaluate_gain(state, 0.5, kParams, sim);
    const GainSolution sol = optimize_gain(state, kParams, sim, SearchConfig{});
    const double base_peak = peak_abs(base);
    reduction[i] = base_peak > 0.0 ? (base_peak - peak_abs(sol)) / base_peak : 0.0;
    rescued[i] = (!base.feasible && sol.feasible) ? 1 : 0;
  });

  double mean_reduction = 0.0;
  int rescued_count = 0;
  for (int i = 0; i < draws; ++i) {
    mean_reduction += reduction[static_cast<std::size_t>(i)];
    rescued_count += rescued[static_cast<std::size_t>(i)];
  }
  mean_reduction /= draws;

  require(mean_reduction >= 0.30,
          "mean peak reduction " + fmt(100.0 * mean_reduction) + "% < 30%");
  require(rescued_count > 0, "no draw was rescued from a bound violation");
  return "mean peak |accel| reduction " + fmt(100.0 * mean_reduction, 3) + "%, " +
         std::to_string(rescued_count) + "/100 draws rescued from bound violations";
}

// ---------------------------------------------------------------------------
// 6. Surrogate quality at desk scale

std::string criterion_surrogate() {
  const SimConfig sim{};
  const SearchConfig search{};

  DatasetConfig dcfg;
  dcfg.count = 2000;
  dcfg.vehicle_count = 7;
  dcfg.seed = 20260809;
  dcfg.workers = worker_count();

  const auto gen_start = std::chrono::steady_clock::now();
  const Dataset data = generate_dataset(dcfg, kParams, sim, search);
  const double gen_elapsed = seconds_since(gen_start);
  require(gen_elapsed < 1800.0, "dataset generation " + fmt(gen_elapsed) + " s >= 30 min");

  TrainConfig tcfg;  // paper settings: lr 0.00075, 400 epochs, batch 32
  tcfg.seed = 1;
  const auto train_start = std::chrono::steady_clock::now();
  TrainHistory history;
  const MlpModel model = train_mlp(data, tcfg, &history);
  const double train_elapsed = seconds_since(train_start);
  require(train_elapsed < 120.0, "training " + fmt(train_elapsed) + " s >= 2 min");

  const EvalResult test = evaluate_mlp(model, data, Split::kTest);
  require(test.mse <= 0.002, "test MSE " + fmt(test.mse) + " > 0.002");
  require(test.mean_abs_dev <= 0.05, "mean |mu| deviation " + fmt(test.mean_abs_dev) + " > 0.05");

  // fresh held-out instances: predicted gain must price within 5% of optimal
  const int holdout = 50;
  std::vector<int> good(holdout, 0);
  parallel_for(holdout, worker_count(), [&](std::size_t i) {
    Rng rng(Rng::substream(7000, i));
    const PlatoonState state =
        sample_initial_state(7, dcfg.ranges, dcfg.policy, kParams, rng);
    const GainSolution sol = optimize_gain(state, kParams, sim, search);
    if (!sol.feasible) {
      good[i] = 1;  // no feasible optimum to compare against
      return;
    }
    const double predicted = predict_gain(model, state.speeds, state.positions);
    const GainEvaluation at_predicted = evaluate_gain(state, predicted, kParams, sim);
    good[i] = at_predicted.cost <= 1.05 * sol.cost + 1e-12 ? 1 : 0;
  });
  int good_count = 0;
  for (int g : good) good_count += g;
  require(good_count >= 45, "predicted gain within 1.05x optimal cost on only " +
                                std::to_string(good_count) + "/50 held-out instances");

  return "gen " + fmt(gen_elapsed, 3) + " s, train " + fmt(train_elapsed, 3) +
         " s (best epoch " + std::to_string(history.best_epoch) + "), test MSE " +
         fmt(test.mse, 2) + ", mean dev " + fmt(test.mean_abs_dev, 2) + ", cost ratio ok on " +
         std::to_string(good_count) + "/50";
}

// ---------------------------------------------------------------------------
// 7. Cubic planner exactness

std::string criterion_cubic() {
  Rng rng(777);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double t0 = rng.uniform(0.0, 60.0);
    const double tf = t0 + rng.uniform(2.0, 30.0);
    const double x0 = rng.uniform(-500.0, 500.0);
    const double v0 = rng.uniform(1.0, 35.0);
    const double xf = x0 + rng.uniform(20.0, 900.0);
    const double vf = rng.uniform(1.0, 35.0);
    const CubicPlan plan = cubic_plan(t0, x0, v0, tf, xf, vf);
    const PlanPoint a = cubic_eval(plan, t0);
    const PlanPoint b = cubic_eval(plan, tf);
    worst = std::max({worst, std::abs(a.position - x0) / std::max(1.0, std::abs(x0)),
                      std::abs(a.speed - v0), std::abs(b.position - xf) / std::max(1.0, std::abs(xf)),
                      std::abs(b.speed - vf)});
  }
  require(worst <= 1e-9, "boundary reproduction error " + fmt(worst));

  const CubicPlan steady = cubic_plan(0.0, 0.0, 30.0, 10.0, 300.0, 30.0);
  require(std::abs(steady.jerk) <= 1e-9 && std::abs(steady.accel0) <= 1e-9 &&
              std::abs(steady.speed0 - 30.0) <= 1e-9 && std::abs(steady.offset) <= 1e-9,
          "constant-speed coefficients off");
  const CubicPlan ramp = cubic_plan(0.0, 0.0, 20.0, 10.0, 250.0, 30.0);
  require(std::abs(ramp.jerk) <= 1e-9 && std::abs(ramp.accel0 - 1.0) <= 1e-9 &&
              std::abs(ramp.speed0 - 20.0) <= 1e-9 && std::abs(ramp.offset) <= 1e-9,
          "constant-push coefficients off");
  const CubicPlan dip = cubic_plan(0.0, 0.0, 30.0, 10.0, 270.0, 30.0);
  require(std::abs(dip.jerk - 0.36) <= 1e-9 && std::abs(dip.accel0 + 1.8) <= 1e-9 &&
              std::abs(dip.speed0 - 30.0) <= 1e-9 && std::abs(dip.offset) <= 1e-9,
          "symmetric-dip coefficients off");

  return "1000 boundary tuples, worst error " + fmt(worst, 2) + "; 3 worked examples exact";
}

// ---------------------------------------------------------------------------
// 8. Merge scheduling: pairwise gaps and grid minimality

MergeScenario template_scenario(std::uint64_t seed, bool second_vehicle) {
  MergeScenario scenario;
  Rng rng(seed);
  scenario.main_state.positions.resize(6);
  scenario.main_state.speeds.assign(6, 30.0);
  scenario.main_state.positions[0] = 350.0;
  for (std::size_t i = 1; i < 6; ++i)
    scenario.main_state.positions[i] =
        scenario.main_state.positions[i - 1] - rng.uniform(52.0, 62.0);
  for (double& v : scenario.main_state.speeds) v = rng.uniform(29.0, 31.0);
  scenario.merge_point = 600.0;
  scenario.zone_length = 600.0;
  scenario.min_time_gap = 1.5;
  scenario.seed = seed;
  scenario.ramp.push_back(RampVehicle{0.0, 450.0, rng.uniform(26.0, 30.0), 0.0});
  if (second_vehicle)
    scenario.ramp.push_back(RampVehicle{4.0, 220.0, rng.uniform(26.0, 30.0), 0.0});
  return scenario;
}

std::string criterion_schedule() {
  const SpacingPolicy policy;

  // minimality on 50 solved queries
  int solved = 0;
  std::uint64_t seed = 8000;
  int attempts = 0;
  while (solved < 50 && attempts < 200) {
    ++attempts;
    Rng rng(seed++);
    ArrivalQuery query;
    query.depart_time = rng.uniform(0.0, 5.0);
    query.start_position = -rng.uniform(150.0, 400.0);
    query.start_speed = rng.uniform(24.0, 33.0);
    query.exit_speed = rng.uniform(23.0, 34.0);
    query.merge_point = 0.0;
    query.min_time_gap = 1.5;
    if (attempts % 2 == 0) query.scheduled_arrivals = {query.depart_time + rng.uniform(5.0, 12.0)};

    double tf = 0.0;
    try {
      tf = earliest_arrival(query, kParams, policy);
    } catch (const ScheduleError&) {
      continue;
    }
    require(arrival_feasible(query, tf, kParams, policy), "returned arrival infeasible");
    require(!arrival_feasible(query, tf - 0.01, kParams, policy),
            "arrival not minimal at seed " + std::to_string(seed - 1));
    ++solved;
  }
  require(solved == 50, "only " + std::to_string(solved) + " queries solved in " +
                            std::to_string(attempts) + " attempts");

  // pairwise arrival gaps across generated scenarios
  int scenarios = 0;
  for (int i = 0; i < 10; ++i) {
    const MergeScenario scenario = template_scenario(8500 + i, i % 2 == 1);
    SimConfig sim;
    sim.t_end = 40.0;
    const ScenarioResult run = run_merge_scenario(scenario, kParams, sim, SearchConfig{},
                                                  nullptr, GainMode::kFixedBaseline);
    for (std::size_t a = 0; a < run.scheduled_arrivals.size(); ++a)
      for (std::size_t b = a + 1; b < run.scheduled_arrivals.size(); ++b)
        require(std::abs(run.scheduled_arrivals[a] - run.scheduled_arrivals[b]) >=
                    scenario.min_time_gap - 1e-9,
                "scenario " + std::to_string(i) + ": arrivals closer than the time gap");
    ++scenarios;
  }
  return "50 minimal arrivals (" + std::to_string(attempts) + " attempts), " +
         std::to_string(scenarios) + " scenarios with safe pairwise gaps";
}

// ---------------------------------------------------------------------------
// 9. Coordinator improvement in one-merge scenarios

std::string criterion_merge_improvement() {
  const int scenarios = 30;
  std::vector<double> tuned_peak(scenarios), fixed_peak(scenarios);
  std::vector<int> failed(scenarios, 0);

  parallel_for(scenarios, worker_count(), [&](std::size_t i) {
    const MergeScenario scenario = template_scenario(9000 + i, false);
    SimConfig sim;
    sim.t_end = 60.0;
    try {
      const ScenarioResult tuned = run_merge_scenario(scenario, kParams, sim, SearchConfig{},
                                                      nullptr, GainMode::kCoordinator);
      const ScenarioResult fixed = run_merge_scenario(scenario, kParams, sim, SearchConfig{},
                                                      nullptr, GainMode::kFixedBaseline);
      const int incoming = tuned.events.at(0).vehicle_id;
      auto peak_of = [&](const ScenarioResult& run) {
        for (const VehicleTrack& track : run.tracks)
          if (track.id == incoming) {
            double peak = 0.0;
            for (double a : track.accels) peak = std::max(peak, std::abs(a));
            return peak;
          }
        return -1.0;
      };
      tuned_peak[i] = peak_of(tuned);
      fixed_peak[i] = peak_of(fixed);
    } catch (const std::exception&) {
      failed[i] = 1;
    }
  });

  int improved = 0;
  double mean_reduction = 0.0;
  for (int i = 0; i < scenarios; ++i) {
    require(failed[static_cast<std::size_t>(i)] == 0,
            "scenario " + std::to_string(i) + " failed to run");
    const double fixed = fixed_peak[static_cast<std::size_t>(i)];
    const double tuned = tuned_peak[static_cast<std::size_t>(i)];
    if (tuned < fixed) ++improved;
    mean_reduction += fixed > 0.0 ? (fixed - tuned) / fixed : 0.0;
  }
  mean_reduction /= scenarios;

  require(improved >= 27, "incoming peak improved in only " + std::to_string(improved) + "/30");
  require(mean_reduction >= 0.30,
          "mean incoming peak reduction " + fmt(100.0 * mean_reduction) + "% < 30%");
  return "improved in " + std::to_string(improved) + "/30, mean reduction " +
         fmt(100.0 * mean_reduction, 3) + "%";
}

// ---------------------------------------------------------------------------
// 10. Bit-identical reruns of every CLI command

#ifdef PLATOONCTL_PATH

int run_tool(const std::string& args) {
  const std::string command = std::string(PLATOONCTL_PATH) + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(command.c_str()));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CriterionFailure("missing output file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "platoon_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);

  write_file(dir / "sim.cfg",
             "[params]\nmu = 0.5\n[sim]\nt_end = 60\n[initial]\n"
             "speeds = 31.2, 28.4, 33.1, 27.9, 30.6, 29.3, 32.0\n"
             "spacings = 18.5, 22.1, 16.8, 23.4, 17.2, 20.9\n");
  write_file(dir / "datagen.cfg",
             "[dataset]\ncount = 100\nvehicles = 2\nseed = 5\nworkers = 2\n[sim]\nt_end = 20\n");
  write_file(dir / "train.cfg",
             "[train]\nepochs = 60\nlearning_rate = 0.003\nseed = 1\nh1 = 8\nh2 = 16\n");
  write_file(dir / "scenario.cfg",
             "[scenario]\nmerge_point = 600\nzone_length = 600\nseed = 7\n"
             "[main]\npositions = 350, 290, 235, 177\nspeeds = 30, 30, 30, 30\n"
             "[ramp]\nvehicle = 0.0, 450, 28\n");

  int checked_files = 0;
  auto compare_outputs = [&](const std::string& name, const std::string& args,
                             const std::vector<std::string>& files, int expect_exit = 0) {
    for (const char* tag : {"a", "b"}) {
      const int code = run_tool(args + " --out " + (dir / name / tag).string());
      if (code != expect_exit)
        throw CriterionFailure(name + " exited with " + std::to_string(code));
    }
    for (const std::string& file : files) {
      if (slurp(dir / name / "a" / file) != slurp(dir / name / "b" / file))
        throw CriterionFailure(name + ": " + file + " differs between reruns");
      ++checked_files;
    }
  };

  compare_outputs("simulate", "simulate --config " + (dir / "sim.cfg").string(),
                  {"trajectory.csv", "summary.txt"});
  compare_outputs("optimize",
                  "optimize --compare-baseline --config " + (dir / "sim.cfg").string(),
                  {"solution.txt"});
  compare_outputs("datagen", "datagen --config " + (dir / "datagen.cfg").string(),
                  {"dataset.csv"});

  const std::string dataset = (dir / "datagen" / "a" / "dataset.csv").string();
  compare_outputs("train",
                  "train --config " + (dir / "train.cfg").string() + " --dataset " + dataset,
                  {"model.txt", "history.csv"});

  write_file(dir / "predict.cfg",
             "[initial]\nspeeds = 30.5, 29.5\nspacings = 21\n[sim]\nt_end = 20\n");
  const std::string model = (dir / "train" / "a" / "model.txt").string();
  compare_outputs("predict",
                  "predict --evaluate-cost --config " + (dir / "predict.cfg").string() +
                      " --model " + model,
                  {"prediction.txt"});

  compare_outputs("merge",
                  "merge --config " + (dir / "sim.cfg").string() + " --scenario " +
                      (dir / "scenario.cfg").string(),
                  {"trajectory.csv", "events.csv", "comparison.csv", "plan_8.csv"});

  return std::to_string(checked_files) + " output files bit-identical across reruns";
}

#else

std::string criterion_determinism() {
  throw CriterionFailure("platoonctl was not built; rerun with PLATOON_BUILD_TOOLS=ON");
}

#endif

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<std::string()> body;
  };

  const std::vector<Criterion> criteria = {
      {1, "equilibrium nullity", criterion_equilibrium},
      {2, "state-space invariance and convergence", criterion_invariance},
      {3, "controller math oracles", criterion_math_oracles},
      {4, "optimizer vs dense-grid oracle and baseline dominance", criterion_optimizer},
      {5, "peak-acceleration reduction", criterion_accel_reduction},
      {6, "surrogate quality at desk scale", criterion_surrogate},
      {7, "cubic planner exactness", criterion_cubic},
      {8, "merge scheduling gaps and minimality", criterion_schedule},
      {9, "coordinator improvement in merge scenarios", criterion_merge_improvement},
      {10, "bit-identical CLI reruns", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const std::string detail = criterion.body();
      std::printf("PASS %2d  %s: %s [%.1f s]\n", criterion.id, criterion.title, detail.c_str(),
                  seconds_since(start));
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL %2d  %s: %s [%.1f s]\n", criterion.id, criterion.title, e.what(),
                  seconds_since(start));
    }
    std::fflush(stdout);
  }

  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", failures);
  return 1;
}
