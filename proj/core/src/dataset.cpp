#include "platoon/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "platoon/controller.hpp"
#include "platoon/csv.hpp"
#include "platoon/parallel.hpp"

namespace platoon {

PlatoonState sample_initial_state(std::size_t vehicle_count, const SampleRanges& ranges,
                                  const SpacingPolicy& policy, const ControllerParams& params,
                                  Rng& rng, std::size_t max_tries) {
  if (vehicle_count < 2) throw std::invalid_argument("sampler: need at least 2 vehicles");
  if (!(ranges.spacing_lo <= ranges.spacing_hi) || !(ranges.speed_lo <= ranges.speed_hi))
    throw std::invalid_argument("sampler: empty range");

  PlatoonState state;
  state.positions.resize(vehicle_count);
  state.speeds.resize(vehicle_count);

  for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
    for (std::size_t i = 0; i < vehicle_count; ++i)
      state.speeds[i] = rng.uniform(ranges.speed_lo, ranges.speed_hi);
    state.positions[0] = 0.0;
    for (std::size_t i = 1; i < vehicle_count; ++i)
      state.positions[i] =
          state.positions[i - 1] - rng.uniform(ranges.spacing_lo, ranges.spacing_hi);

    if (spacing_feasible(state, policy) && in_state_space(state, params)) return state;
  }
  throw std::runtime_error(
      "sampler: no admissible draw found; spacing/speed ranges are incompatible with the policy");
}

Dataset generate_dataset(const DatasetConfig& cfg, const ControllerParams& params,
                         const SimConfig& sim, const SearchConfig& search) {
  if (cfg.count < 100) throw std::invalid_argument("generate_dataset: count must be >= 100");

  Dataset data;
  data.vehicle_count = cfg.vehicle_count;
  data.samples.resize(cfg.count);

  parallel_for(cfg.count, cfg.workers, [&](std::size_t idx) {
    Rng rng(Rng::substream(cfg.seed, idx));
    // Resample until the optimum is feasible; the per-index stream keeps the
    // result identical however the work is scheduled.
    for (;;) {
      const PlatoonState state0 =
          sample_initial_state(cfg.vehicle_count, cfg.ranges, cfg.policy, params, rng,
                               cfg.max_draw_tries);
      const GainSolution sol = optimize_gain(state0, params, sim, search);
      if (!sol.feasible) continue;
      data.samples[idx] = Sample{state0.speeds, state0.positions, sol.gain};
      return;
    }
  });

  assign_split(data, cfg.seed);
  return data;
}

void assign_split(Dataset& data, std::uint64_t seed) {
  const std::size_t n = data.samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Fisher-Yates with the portable uniform draw.
  Rng rng(Rng::substream(seed, 0x5eed));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(i)));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }

  const std::size_t n_val = static_cast<std::size_t>(0.075 * static_cast<double>(n));
  const std::size_t n_test = n_val;
  const std::size_t n_train = n - n_val - n_test;

  data.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  data.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  const std::size_t n = data.vehicle_count;
  out << 'v' << 1;
  for (std::size_t i = 2; i <= n; ++i) out << ",v" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  out << ",mu_star\n";

  for (const Sample& s : data.samples) {
    for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << csv::num17(s.speeds[i]);
    for (std::size_t i = 0; i < n; ++i) out << ',' << csv::num17(s.positions[i]);
    out << ',' << csv::num17(s.gain) << '\n';
  }
}

Dataset load_dataset_csv(const std::string& path, std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: empty dataset file");

  // Header v1..vn,x1..xn,mu_star fixes the vehicle count.
  std::size_t columns = 1;
  for (char c : line) columns += (c == ',');
  if (columns < 5 || (columns - 1) % 2 != 0)
    throw std::runtime_error(path + ":1: malformed dataset header");
  const std::size_t n = (columns - 1) / 2;

  Dataset data;
  data.vehicle_count = n;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    values.reserve(columns);
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ':' + std::to_string(line_no) + ": bad number '" + cell +
                                 "'");
      }
    }
    if (values.size() != columns)
      throw std::runtime_error(path + ':' + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " columns, got " +
                               std::to_string(values.size()));
    Sample s;
    s.speeds.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
    s.positions.assign(values.begin() + static_cast<std::ptrdiff_t>(n),
                       values.begin() + static_cast<std::ptrdiff_t>(2 * n));
    s.gain = values.back();
    data.samples.push_back(std::move(s));
  }
  assign_split(data, split_seed);
  return data;
}

}  // namespace platoon
