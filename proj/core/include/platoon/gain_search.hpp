#pragma once

#include <utility>

#include "platoon/params.hpp"
#include "platoon/simulate.hpp"
#include "platoon/state.hpp"

namespace platoon {

/// Result of one gain evaluation: simulate with the candidate gain, price the
/// run by integrated squared acceleration, and check the acceleration bounds
/// on the recorded trajectory. A run aborted by a near-collision is reported
/// as infeasible with infinite cost and violation.
struct GainEvaluation {
  double gain = 0.0;
  double cost = 0.0;
  bool feasible = false;
  double peak_max = 0.0;
  double peak_min = 0.0;
  double violation = 0.0;  // how far the worst sample exceeds the bounds
};

struct GainSolution {
  double gain = 0.0;
  double cost = 0.0;
  bool feasible = false;
  double peak_max = 0.0;
  double peak_min = 0.0;
};

/// Search controls for the scalar gain optimization. The gain domain is
/// (0, 2]; gain_lo is the practical exclusive floor. reference_gain is always
/// probed alongside the coarse grid so the result never loses to the fixed
/// baseline it is compared against.
struct SearchConfig {
  double gain_lo = 0.01;
  double gain_hi = 2.0;
  int coarse_samples = 40;
  double refine_tol = 1e-3;
  double reference_gain = 0.5;

  void validate() const;
};

GainEvaluation evaluate_gain(const PlatoonState& state0, double gain,
                             const ControllerParams& params, const SimConfig& cfg);

/// Coarse grid scan over [gain_lo, gain_hi] followed by golden-section
/// refinement in the bracket around the best probe, down to refine_tol.
/// Cost ties within 1e-9 resolve to the smallest gain. If no candidate is
/// feasible the least-violating gain is returned with feasible = false.
GainSolution optimize_gain(const PlatoonState& state0, const ControllerParams& params,
                           const SimConfig& cfg, const SearchConfig& search);

}  // namespace platoon
