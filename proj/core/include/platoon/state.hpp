#pragma once

#include <cstddef>
#include <vector>

#include "platoon/params.hpp"

namespace platoon {

/// Snapshot of an ordered platoon. Index 0 is the frontmost vehicle and
/// positions decrease with index; spacing(i) is the gap ahead of vehicle i.
struct PlatoonState {
  std::vector<double> positions;  // [m], strictly decreasing
  std::vector<double> speeds;     // [m/s]

  std::size_t size() const { return positions.size(); }

  /// Gap between vehicle i and its predecessor, valid for i in [1, size()).
  double spacing(std::size_t i) const { return positions[i - 1] - positions[i]; }
};

using AccelVector = std::vector<double>;

/// Throws std::invalid_argument if the state breaks the platoon invariants
/// (matching position/speed lengths, ordering, gaps above min_gap, speeds
/// within [0, max_speed]). Error messages name the offending index.
void validate_state(const PlatoonState& state, const ControllerParams& params);

}  // namespace platoon
