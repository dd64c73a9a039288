#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace qtraj {

enum class TrajectoryKind { bohmian, geodesic };

inline constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

// A set of timestamped paths sharing one time axis. Positions after a
// trajectory terminates (left the box / degenerate state) are frozen and the
// row is flagged. Geodesic bundles carry (y0, Lambda, arclength) per row.
struct TrajectoryBundle {
  TrajectoryKind kind = TrajectoryKind::bohmian;
  std::size_t ndim = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> positions;   // [traj][step*ndim + axis]
  std::vector<std::vector<double>> velocities;  // same layout
  std::vector<std::vector<double>> extras;      // [traj][step*3 + {y0,lambda,s}]
  std::vector<std::size_t> terminated_at;       // step index, kNever if alive
  std::vector<std::size_t> masked_at;           // first node-region contact

  std::string scenario_id;
  std::uint64_t seed = 0;
  std::string grid_desc;
  std::string note;

  std::size_t count() const { return positions.size(); }
  std::size_t steps() const { return times.size(); }

  void position_at(std::size_t traj, std::size_t step, std::vector<double>& out) const {
    out.assign(positions[traj].begin() + static_cast<std::ptrdiff_t>(step * ndim),
               positions[traj].begin() + static_cast<std::ptrdiff_t>((step + 1) * ndim));
  }
};

}  // namespace qtraj
