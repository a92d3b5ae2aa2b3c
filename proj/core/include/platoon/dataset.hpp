#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "platoon/gain_search.hpp"
#include "platoon/params.hpp"
#include "platoon/rng.hpp"
#include "platoon/simulate.hpp"
#include "platoon/state.hpp"

namespace platoon {

/// Uniform intervals the initial-condition sampler draws from.
struct SampleRanges {
  double spacing_lo = 16.0;
  double spacing_hi = 24.0;
  double speed_lo = 27.0;
  double speed_hi = 34.0;
};

/// One labeled training point: an initial condition and its optimal gain.
struct Sample {
  std::vector<double> speeds;
  std::vector<double> positions;  // lead vehicle at 0
  double gain = 0.0;
};

struct Dataset {
  std::size_t vehicle_count = 0;
  std::vector<Sample> samples;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  std::vector<std::size_t> test_idx;
};

struct DatasetConfig {
  std::size_t count = 2000;
  std::size_t vehicle_count = 7;
  SampleRanges ranges;
  SpacingPolicy policy;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::size_t max_draw_tries = 100000;  // per sample, before the ranges are declared incompatible
};

/// Draws spacings and speeds uniformly from the ranges, anchoring the lead
/// vehicle at position 0, and rejects draws until both the spacing policy and
/// the state-space membership hold. Throws std::runtime_error once
/// max_tries draws were rejected (incompatible ranges/policy).
PlatoonState sample_initial_state(std::size_t vehicle_count, const SampleRanges& ranges,
                                  const SpacingPolicy& policy, const ControllerParams& params,
                                  Rng& rng, std::size_t max_tries = 100000);

/// Batch-labels cfg.count sampled initial conditions with their optimal gain.
/// Draws whose optimization comes back infeasible are resampled, so every
/// retained label is a feasible optimum. The 85/7.5/7.5 split is assigned by
/// a seeded shuffle. Deterministic for a fixed seed, independent of workers.
Dataset generate_dataset(const DatasetConfig& cfg, const ControllerParams& params,
                         const SimConfig& sim, const SearchConfig& search);

/// CSV with header v1..vn,x1..xn,mu_star, one sample per row, written at
/// full precision so a reload reproduces the dataset bit-exactly. The split
/// is reassigned on load from the same seed recorded in the file name side
/// channel; see load_dataset.
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Reads a dataset CSV and reassigns the 85/7.5/7.5 split with the given
/// seed (the split is a property of the experiment, not of the file).
Dataset load_dataset_csv(const std::string& path, std::uint64_t split_seed);

/// Seeded-shuffle split into 85% / 7.5% / 7.5% (train gets the remainder).
void assign_split(Dataset& data, std::uint64_t seed);

}  // namespace platoon
