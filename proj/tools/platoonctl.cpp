// platoonctl: simulate platoons, tune the controller gain, train and query
// the gain surrogate, and run on-ramp merge scenarios.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "platoon/config.hpp"
#include "platoon/controller.hpp"
#include "platoon/csv.hpp"
#include "platoon/dataset.hpp"
#include "platoon/gain_search.hpp"
#include "platoon/merge.hpp"
#include "platoon/mlp.hpp"
#include "platoon/simulate.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitScenarioFault = 4;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<long long> seed;
  std::vector<std::string> overrides;  // section.key=value
};

ConfigFile load_config(const CommonOptions& common) {
  ConfigFile cfg = common.config_path.empty() ? ConfigFile::parse_text("", "<empty>")
                                              : ConfigFile::parse_file(common.config_path);
  for (const std::string& item : common.overrides) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("--set expects section.key=value, got '" + item + "'");
    cfg.set(item.substr(0, dot), item.substr(dot + 1, eq - dot - 1), item.substr(eq + 1));
  }
  return cfg;
}

ControllerParams read_params(const ConfigFile& cfg) {
  ControllerParams params;
  params.min_gap = cfg.get_double("params", "L", params.min_gap);
  params.interaction_range = cfg.get_double("params", "lambda", params.interaction_range);
  params.desired_speed = cfg.get_double("params", "v_star", params.desired_speed);
  params.max_speed = cfg.get_double("params", "v_max", params.max_speed);
  params.kernel_width = cfg.get_double("params", "epsilon", params.kernel_width);
  params.base_gain = cfg.get_double("params", "mu", params.base_gain);
  params.accel_min = cfg.get_double("params", "accel_min", params.accel_min);
  params.accel_max = cfg.get_double("params", "accel_max", params.accel_max);
  params.validate();
  return params;
}

SimConfig read_sim(const ConfigFile& cfg) {
  SimConfig sim;
  sim.dt = cfg.get_double("sim", "dt", sim.dt);
  sim.t_start = cfg.get_double("sim", "t_start", sim.t_start);
  sim.t_end = cfg.get_double("sim", "t_end", sim.t_end);
  sim.validate();
  return sim;
}

SearchConfig read_search(const ConfigFile& cfg) {
  SearchConfig search;
  search.gain_lo = cfg.get_double("opt", "mu_lo", search.gain_lo);
  search.gain_hi = cfg.get_double("opt", "mu_hi", search.gain_hi);
  search.coarse_samples =
      static_cast<int>(cfg.get_int("opt", "coarse_grid", search.coarse_samples));
  search.refine_tol = cfg.get_double("opt", "refine_tol", search.refine_tol);
  search.reference_gain = cfg.get_double("opt", "reference_mu", search.reference_gain);
  search.validate();
  return search;
}

SpacingPolicy read_policy(const ConfigFile& cfg) {
  SpacingPolicy policy;
  policy.standstill = cfg.get_double("policy", "standstill", policy.standstill);
  policy.headway = cfg.get_double("policy", "headway", policy.headway);
  if (!(policy.standstill > 0.0) || policy.headway < 0.0)
    throw ConfigError("policy: standstill must be positive and headway non-negative");
  return policy;
}

PlatoonState read_initial_state(const ConfigFile& cfg, const ControllerParams& params) {
  PlatoonState state;
  state.speeds = cfg.get_list("initial", "speeds");
  if (state.speeds.empty()) throw ConfigError("[initial] speeds is required");

  if (cfg.has("initial", "positions")) {
    state.positions = cfg.get_list("initial", "positions");
  } else if (cfg.has("initial", "spacings")) {
    const auto spacings = cfg.get_list("initial", "spacings");
    if (spacings.size() + 1 != state.speeds.size())
      throw ConfigError("[initial] needs one spacing fewer than speeds");
    state.positions.resize(state.speeds.size());
    state.positions[0] = 0.0;
    for (std::size_t i = 1; i < state.positions.size(); ++i)
      state.positions[i] = state.positions[i - 1] - spacings[i - 1];
  } else {
    throw ConfigError("[initial] needs positions or spacings");
  }
  if (state.positions.size() != state.speeds.size())
    throw ConfigError("[initial] positions and speeds differ in length");
  validate_state(state, params);
  return state;
}

fs::path prepare_out_dir(const CommonOptions& common) {
  fs::path dir(common.out_dir);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

double settling_time(const Trajectory& traj, double target, double tolerance) {
  std::size_t settled = traj.sample_count();
  for (std::size_t j = traj.sample_count(); j-- > 0;) {
    bool inside = true;
    for (double v : traj.states[j].speeds)
      if (std::abs(v - target) > tolerance) inside = false;
    if (!inside) break;
    settled = j;
  }
  return settled < traj.sample_count() ? traj.times[settled] : -1.0;
}

int cmd_simulate(const CommonOptions& common) {
  const ConfigFile cfg = load_config(common);
  const ControllerParams params = read_params(cfg);
  const SimConfig sim = read_sim(cfg);
  const PlatoonState state0 = read_initial_state(cfg, params);
  const fs::path out_dir = prepare_out_dir(common);

  const Trajectory traj = simulate(state0, params, sim);
  write_trajectory_csv((out_dir / "trajectory.csv").string(), traj);

  const double cost = accel_cost(traj);
  const auto [peak_hi, peak_lo] = peak_accel(traj);
  const double settle = settling_time(traj, params.desired_speed, 0.1);

  auto summary = open_out(out_dir / "summary.txt");
  summary << "vehicles = " << state0.size() << '\n'
          << "mu = " << csv::num(params.base_gain) << '\n'
          << "cost = " << csv::num17(cost) << '\n'
          << "peak_accel_max = " << csv::num17(peak_hi) << '\n'
          << "peak_accel_min = " << csv::num17(peak_lo) << '\n'
          << "settling_time = " << csv::num(settle) << '\n';
  std::cout << "wrote " << (out_dir / "trajectory.csv").string() << "\n"
            << "cost " << csv::num(cost) << ", peak accel [" << csv::num(peak_lo) << ", "
            << csv::num(peak_hi) << "], settling time " << csv::num(settle) << " s\n";
  return 0;
}

int cmd_optimize(const CommonOptions& common, bool compare_baseline) {
  const ConfigFile cfg = load_config(common);
  const ControllerParams params = read_params(cfg);
  const SimConfig sim = read_sim(cfg);
  const SearchConfig search = read_search(cfg);
  const PlatoonState state0 = read_initial_state(cfg, params);
  const fs::path out_dir = prepare_out_dir(common);

  const GainSolution sol = optimize_gain(state0, params, sim, search);

  auto report = open_out(out_dir / "solution.txt");
  auto line = [&](const std::string& key, const std::string& value) {
    report << key << " = " << value << '\n';
    std::cout << key << " = " << value << '\n';
  };
  line("mu_star", csv::num17(sol.gain));
  line("cost", csv::num17(sol.cost));
  line("feasible", sol.feasible ? "true" : "false");
  line("peak_accel_max", csv::num17(sol.peak_max));
  line("peak_accel_min", csv::num17(sol.peak_min));

  if (compare_baseline || cfg.get_int("opt", "compare_baseline", 0) != 0) {
    const GainEvaluation base = evaluate_gain(state0, search.reference_gain, params, sim);
    line("baseline_mu", csv::num(base.gain));
    line("baseline_cost", csv::num17(base.cost));
    line("baseline_feasible", base.feasible ? "true" : "false");
    line("baseline_peak_accel_max", csv::num17(base.peak_max));
    line("baseline_peak_accel_min", csv::num17(base.peak_min));
  }
  return sol.feasible ? 0 : kExitInfeasible;
}

int cmd_datagen(const CommonOptions& common) {
  const ConfigFile cfg = load_config(common);
  const ControllerParams params = read_params(cfg);
  const SimConfig sim = read_sim(cfg);
  const SearchConfig search = read_search(cfg);
  const fs::path out_dir = prepare_out_dir(common);

  DatasetConfig dcfg;
  dcfg.count = static_cast<std::size_t>(cfg.get_int("dataset", "count", 2000));
  dcfg.vehicle_count = static_cast<std::size_t>(cfg.get_int("dataset", "vehicles", 7));
  dcfg.ranges.spacing_lo = cfg.get_double("dataset", "spacing_lo", dcfg.ranges.spacing_lo);
  dcfg.ranges.spacing_hi = cfg.get_double("dataset", "spacing_hi", dcfg.ranges.spacing_hi);
  dcfg.ranges.speed_lo = cfg.get_double("dataset", "speed_lo", dcfg.ranges.speed_lo);
  dcfg.ranges.speed_hi = cfg.get_double("dataset", "speed_hi", dcfg.ranges.speed_hi);
  dcfg.policy = read_policy(cfg);
  dcfg.seed = static_cast<std::uint64_t>(cfg.get_int("dataset", "seed", 1));
  if (common.seed) dcfg.seed = static_cast<std::uint64_t>(*common.seed);
  dcfg.workers = static_cast<std::size_t>(cfg.get_int("dataset", "workers", 1));

  const Dataset data = generate_dataset(dcfg, params, sim, search);
  write_dataset_csv((out_dir / "dataset.csv").string(), data);

  double lo = data.samples.front().gain, hi = lo;
  for (const Sample& s : data.samples) {
    lo = std::min(lo, s.gain);
    hi = std::max(hi, s.gain);
  }
  std::cout << "wrote " << (out_dir / "dataset.csv").string() << " (" << data.samples.size()
            << " samples, labels in [" << csv::num(lo) << ", " << csv::num(hi) << "])\n";
  return 0;
}

int cmd_train(const CommonOptions& common, const std::string& dataset_flag) {
  const ConfigFile cfg = load_config(common);
  const fs::path out_dir = prepare_out_dir(common);

  const std::string dataset_path =
      dataset_flag.empty() ? cfg.get_string("train", "dataset", "") : dataset_flag;
  if (dataset_path.empty()) throw ConfigError("train needs a dataset file ([train] dataset)");

  TrainConfig tcfg;
  tcfg.learning_rate = cfg.get_double("train", "learning_rate", tcfg.learning_rate);
  tcfg.epochs = static_cast<int>(cfg.get_int("train", "epochs", tcfg.epochs));
  tcfg.batch_size = static_cast<int>(cfg.get_int("train", "batch_size", tcfg.batch_size));
  tcfg.seed = static_cast<std::uint64_t>(cfg.get_int("train", "seed", 0));
  if (common.seed) tcfg.seed = static_cast<std::uint64_t>(*common.seed);
  tcfg.branch_width = static_cast<std::size_t>(cfg.get_int("train", "h1", 32));
  tcfg.merge_width = static_cast<std::size_t>(cfg.get_int("train", "h2", 64));
  tcfg.validate();

  const Dataset data = load_dataset_csv(dataset_path, tcfg.seed);

  TrainHistory history;
  const MlpModel model = train_mlp(data, tcfg, &history);
  save_model((out_dir / "model.txt").string(), model);
  write_history_csv((out_dir / "history.csv").string(), history);

  const EvalResult val = evaluate_mlp(model, data, Split::kValidation);
  const EvalResult test = evaluate_mlp(model, data, Split::kTest);
  std::cout << "best epoch " << history.best_epoch << ": val mse " << csv::num(val.mse)
            << ", test mse " << csv::num(test.mse) << ", test |mu| deviation "
            << csv::num(test.mean_abs_dev) << '\n'
            << "wrote " << (out_dir / "model.txt").string() << " and "
            << (out_dir / "history.csv").string() << '\n';
  return 0;
}

int cmd_predict(const CommonOptions& common, const std::string& model_flag, bool with_cost) {
  const ConfigFile cfg = load_config(common);
  const ControllerParams params = read_params(cfg);
  const PlatoonState state0 = read_initial_state(cfg, params);
  const fs::path out_dir = prepare_out_dir(common);

  const std::string model_path =
      model_flag.empty() ? cfg.get_string("predict", "model", "") : model_flag;
  if (model_path.empty()) throw ConfigError("predict needs a model file ([predict] model)");

  const MlpModel model = load_model(model_path);
  const double gain = predict_gain(model, state0.speeds, state0.positions);

  auto report = open_out(out_dir / "prediction.txt");
  report << "mu_predicted = " << csv::num17(gain) << '\n';
  std::cout << "mu_predicted = " << csv::num17(gain) << '\n';

  if (with_cost || cfg.get_int("predict", "evaluate_cost", 0) != 0) {
    const SimConfig sim = read_sim(cfg);
    const GainEvaluation eval = evaluate_gain(state0, gain, params, sim);
    report << "cost = " << csv::num17(eval.cost) << '\n'
           << "feasible = " << (eval.feasible ? "true" : "false") << '\n';
    std::cout << "cost = " << csv::num17(eval.cost) << " (feasible: " << std::boolalpha
              << eval.feasible << ")\n";
  }
  return 0;
}

double incoming_peak_abs(const ScenarioResult& run, int vehicle_id) {
  for (const VehicleTrack& track : run.tracks) {
    if (track.id != vehicle_id) continue;
    double peak = 0.0;
    for (double a : track.accels) peak = std::max(peak, std::abs(a));
    return peak;
  }
  throw std::runtime_error("vehicle id not found in scenario result");
}

int cmd_merge(const CommonOptions& common, const std::string& scenario_flag,
              const std::string& model_flag) {
  const ConfigFile cfg = load_config(common);
  const ControllerParams params = read_params(cfg);
  const SimConfig sim = read_sim(cfg);
  const SearchConfig search = read_search(cfg);
  const fs::path out_dir = prepare_out_dir(common);

  const std::string scenario_path =
      scenario_flag.empty() ? cfg.get_string("merge", "scenario", "") : scenario_flag;
  if (scenario_path.empty()) throw ConfigError("merge needs a scenario file ([merge] scenario)");

  MergeScenario scenario = load_scenario(scenario_path);
  if (common.seed) scenario.seed = static_cast<std::uint64_t>(*common.seed);

  std::optional<MlpModel> model;
  const std::string model_path =
      model_flag.empty() ? cfg.get_string("merge", "model", "") : model_flag;
  if (!model_path.empty()) model = load_model(model_path);

  const ScenarioResult tuned = run_merge_scenario(scenario, params, sim, search,
                                                  model ? &*model : nullptr,
                                                  GainMode::kCoordinator);
  const ScenarioResult fixed =
      run_merge_scenario(scenario, params, sim, search, nullptr, GainMode::kFixedBaseline);

  write_scenario_csv((out_dir / "trajectory.csv").string(), tuned);
  write_events_csv((out_dir / "events.csv").string(), tuned.events);
  for (std::size_t r = 0; r < tuned.ramp_plans.size(); ++r) {
    const int id = static_cast<int>(scenario.main_state.size() + r) + 1;
    write_plan_csv((out_dir / ("plan_" + std::to_string(id) + ".csv")).string(),
                   tuned.ramp_plans[r], sim.dt);
  }

  auto comparison = open_out(out_dir / "comparison.csv");
  comparison << "vehicle_id,mu_assigned,peak_abs_coordinator,peak_abs_fixed,reduction_pct\n";
  std::cout << "merge events: " << tuned.events.size() << '\n';
  for (const MergeEvent& event : tuned.events) {
    const double peak_tuned = incoming_peak_abs(tuned, event.vehicle_id);
    const double peak_fixed = incoming_peak_abs(fixed, event.vehicle_id);
    const double reduction =
        peak_fixed > 0.0 ? 100.0 * (peak_fixed - peak_tuned) / peak_fixed : 0.0;
    comparison << event.vehicle_id << ',' << csv::num17(event.gain) << ','
               << csv::num17(peak_tuned) << ',' << csv::num17(peak_fixed) << ','
               << csv::num(reduction) << '\n';
    std::cout << "vehicle " << event.vehicle_id << ": mu " << csv::num(event.gain)
              << ", peak |accel| " << csv::num(peak_tuned) << " vs " << csv::num(peak_fixed)
              << " fixed (" << csv::num(reduction) << "% lower)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"platoon cruise-control gain tuning toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  bool compare_baseline = false;
  bool with_cost = false;
  std::string dataset_flag, model_flag, scenario_flag;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "configuration file");
    cmd->add_option("--out", common.out_dir, "output directory");
    cmd->add_option("--seed", common.seed, "override the configured seed");
    cmd->add_option("--set", common.overrides, "override a config entry (section.key=value)");
  };

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "integrate a platoon and export CSV");
  add_common(simulate_cmd);

  CLI::App* optimize_cmd = app.add_subcommand("optimize", "find the acceleration-optimal gain");
  add_common(optimize_cmd);
  optimize_cmd->add_flag("--compare-baseline", compare_baseline,
                         "also evaluate the fixed reference gain");

  CLI::App* datagen_cmd = app.add_subcommand("datagen", "label sampled initial conditions");
  add_common(datagen_cmd);

  CLI::App* train_cmd = app.add_subcommand("train", "fit the gain surrogate");
  add_common(train_cmd);
  train_cmd->add_option("--dataset", dataset_flag, "dataset CSV from datagen");

  CLI::App* predict_cmd = app.add_subcommand("predict", "query a trained surrogate");
  add_common(predict_cmd);
  predict_cmd->add_option("--model", model_flag, "model file from train");
  predict_cmd->add_flag("--evaluate-cost", with_cost, "simulate under the predicted gain");

  CLI::App* merge_cmd = app.add_subcommand("merge", "run an on-ramp merge scenario");
  add_common(merge_cmd);
  merge_cmd->add_option("--scenario", scenario_flag, "scenario file");
  merge_cmd->add_option("--model", model_flag, "surrogate for the coordinator");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(common);
    if (optimize_cmd->parsed()) return cmd_optimize(common, compare_baseline);
    if (datagen_cmd->parsed()) return cmd_datagen(common);
    if (train_cmd->parsed()) return cmd_train(common, dataset_flag);
    if (predict_cmd->parsed()) return cmd_predict(common, model_flag, with_cost);
    if (merge_cmd->parsed()) return cmd_merge(common, scenario_flag, model_flag);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ScheduleError& e) {
    std::cerr << "scheduling fault: " << e.what() << '\n';
    return kExitScenarioFault;
  } catch (const MergeRejected& e) {
    std::cerr << "scenario fault: " << e.what() << '\n';
    return kExitScenarioFault;
  } catch (const SimulationError& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return kExitScenarioFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
