#pragma once

#include <vector>

#include "mansel/core/types.hpp"

namespace mansel::sim {

struct TrajectorySpec {
  std::vector<Vec3> waypoints;
  double step = 0.2;  // spacing between frames along the path, meters
  enum class YawMode { Tangent, Fixed };
  YawMode yaw_mode = YawMode::Tangent;
  double fixed_yaw = 0.0;
  bool closed = false;  // route back to the first waypoint
};

struct GroundTruthTrajectory {
  std::vector<FramePose> poses;
  bool loop_closed = false;
};

/// Samples poses every `step` meters along the waypoint polyline; the last
/// waypoint is always emitted so closed paths end exactly at the start.
GroundTruthTrajectory build_trajectory(const TrajectorySpec& spec);

}  // namespace mansel::sim
