#include "mansel/sim/trajectory.hpp"

#include <cmath>

namespace mansel::sim {

GroundTruthTrajectory build_trajectory(const TrajectorySpec& spec) {
  if (spec.waypoints.size() < 2) throw Error("trajectory needs at least two waypoints");
  if (!(spec.step > 0)) throw Error("trajectory step must be positive");

  std::vector<Vec3> pts = spec.waypoints;
  if (spec.closed) pts.push_back(pts.front());

  GroundTruthTrajectory traj;
  traj.loop_closed = spec.closed;

  auto yaw_for = [&](const Vec3& dir) {
    if (spec.yaw_mode == TrajectorySpec::YawMode::Fixed)
      return wrap_two_pi(spec.fixed_yaw);
    return wrap_two_pi(std::atan2(dir.y(), dir.x()));
  };

  double last_yaw = spec.fixed_yaw;
  for (size_t s = 0; s + 1 < pts.size(); ++s) {
    const Vec3 from = pts[s];
    const Vec3 to = pts[s + 1];
    const Vec3 delta = to - from;
    const double len = delta.norm();
    if (len < 1e-12) continue;
    const Vec3 dir = delta / len;
    const double yaw = yaw_for(dir);
    last_yaw = yaw;
    // Emit [from, to); `to` is the next segment's `from`, so spacing is
    // `step` within segments and corners land exactly on waypoints.
    const int steps = static_cast<int>(std::ceil(len / spec.step - 1e-9));
    for (int k = 0; k < steps; ++k)
      traj.poses.push_back({from + dir * (spec.step * k), yaw});
  }
  traj.poses.push_back({pts.back(), last_yaw});

  if (traj.poses.size() < 2) throw Error("trajectory degenerate: fewer than two poses");
  return traj;
}

}  // namespace mansel::sim
