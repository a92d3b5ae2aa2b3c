#include "platoon/gain_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace platoon {

namespace {

constexpr double kTieWindow = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Lexicographic candidate order: feasibility first, then cost with the tie
// window, then the smaller gain.
bool better(const GainEvaluation& a, const GainEvaluation& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible && !b.feasible) {
    if (std::abs(a.violation - b.violation) > kTieWindow) return a.violation < b.violation;
    return a.gain < b.gain;
  }
  if (std::abs(a.cost - b.cost) > kTieWindow) return a.cost < b.cost;
  return a.gain < b.gain;
}

// Refinement key: infeasible probes rank as infinitely expensive.
double refine_key(const GainEvaluation& e) { return e.feasible ? e.cost : kInf; }

}  // namespace

void SearchConfig::validate() const {
  if (!(gain_lo > 0.0 && gain_lo < gain_hi && gain_hi <= 2.0))
    throw std::invalid_argument("gain bounds must satisfy 0 < gain_lo < gain_hi <= 2");
  if (coarse_samples < 3) throw std::invalid_argument("coarse_samples must be at least 3");
  if (!(refine_tol > 0.0)) throw std::invalid_argument("refine_tol must be positive");
}

GainEvaluation evaluate_gain(const PlatoonState& state0, double gain,
                             const ControllerParams& params, const SimConfig& cfg) {
  if (!(gain > 0.0 && gain <= 2.0))
    throw std::invalid_argument("evaluate_gain: gain must lie in (0, 2]");

  ControllerParams tuned = params;
  tuned.base_gain = gain;

  GainEvaluation result;
  result.gain = gain;
  try {
    const Trajectory traj = simulate(state0, tuned, cfg);
    const auto [hi, lo] = peak_accel(traj);
    result.cost = accel_cost(traj);
    result.peak_max = hi;
    result.peak_min = lo;
    result.violation =
        std::max(0.0, hi - params.accel_max) + std::max(0.0, params.accel_min - lo);
    result.feasible = result.violation == 0.0;
  } catch (const SimulationError&) {
    result.cost = kInf;
    result.violation = kInf;
    result.feasible = false;
  }
  return result;
}

GainSolution optimize_gain(const PlatoonState& state0, const ControllerParams& params,
                           const SimConfig& cfg, const SearchConfig& search) {
  search.validate();

  GainEvaluation best;
  bool have_best = false;
  auto consider = [&](const GainEvaluation& e) {
    if (!have_best || better(e, best)) {
      best = e;
      have_best = true;
    }
  };

  // Coarse scan, plus the reference gain so dominance over the fixed
  // baseline holds by construction.
  std::vector<double> probes(static_cast<std::size_t>(search.coarse_samples));
  const double span = search.gain_hi - search.gain_lo;
  for (int j = 0; j < search.coarse_samples; ++j)
    probes[static_cast<std::size_t>(j)] =
        search.gain_lo + span * static_cast<double>(j) / (search.coarse_samples - 1);
  if (search.reference_gain > search.gain_lo && search.reference_gain < search.gain_hi)
    probes.push_back(search.reference_gain);
  std::sort(probes.begin(), probes.end());

  std::vector<GainEvaluation> scans;
  scans.reserve(probes.size());
  std::size_t best_idx = 0;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    scans.push_back(evaluate_gain(state0, probes[j], params, cfg));
    if (better(scans[j], scans[best_idx])) best_idx = j;
    consider(scans[j]);
  }

  // Golden-section refinement in the bracket around the best probe.
  double a = probes[best_idx > 0 ? best_idx - 1 : 0];
  double b = probes[std::min(best_idx + 1, probes.size() - 1)];
  if (b > a + search.refine_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    GainEvaluation e1 = evaluate_gain(state0, x1, params, cfg);
    GainEvaluation e2 = evaluate_gain(state0, x2, params, cfg);
    consider(e1);
    consider(e2);
    while (b - a > search.refine_tol) {
      if (refine_key(e1) <= refine_key(e2)) {
        b = x2;
        x2 = x1;
        e2 = e1;
        x1 = b - inv_phi * (b - a);
        e1 = evaluate_gain(state0, x1, params, cfg);
        consider(e1);
      } else {
        a = x1;
        x1 = x2;
        e1 = e2;
        x2 = a + inv_phi * (b - a);
        e2 = evaluate_gain(state0, x2, params, cfg);
        consider(e2);
      }
    }
    consider(evaluate_gain(state0, 0.5 * (a + b), params, cfg));
  }

  return GainSolution{best.gain, best.cost, best.feasible, best.peak_max, best.peak_min};
}

}  // namespace platoon
