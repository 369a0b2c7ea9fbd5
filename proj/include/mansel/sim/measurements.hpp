#pragma once

#include <optional>
#include <vector>

#include "mansel/core/rng.hpp"
#include "mansel/sim/trajectory.hpp"
#include "mansel/sim/world.hpp"

namespace mansel::sim {

struct NoiseSpec {
  double odom_sigma = 0.0;       // meters/step, per component
  Vec3 odom_bias = Vec3::Zero(); // meters/step, axis-aligned frame
  double range_sigma = 0.0;      // meters
  double yaw_sigma = 0.0;        // radians/step
  uint64_t seed = 0;

  void validate() const;
};

/// One step of simulated odometry. `t_axis` is the interframe translation
/// in the axis-aligned frame (this is the quantity the graph consumes);
/// `t_sensor` is the same vector expressed in the sensor frame at i, and
/// `dyaw` the noisy yaw increment, both used for the dead-reckoned
/// comparison trajectories.
struct OdometrySample {
  Vec3 t_axis = Vec3::Zero();
  Vec3 t_sensor = Vec3::Zero();
  double dyaw = 0.0;
};

std::vector<OdometrySample> simulate_odometry(const GroundTruthTrajectory& traj,
                                              const NoiseSpec& noise);

/// Range-sensor visibility model: range cutoff, facing test, and a
/// horizontal-by-vertical field-of-view wedge; no inter-plane occlusion.
struct SensorModel {
  double max_range = 6.0;
  double fov_h_deg = 100.0;
  double fov_v_deg = 85.0;
};

/// Extent of `plane` visible from `pose` clipped to the FOV wedge,
/// reported sensor-relative in plane (u,v) coordinates; nullopt when the
/// plane fails any visibility gate.
std::optional<Rect> visible_plane_extent(const LayoutPlane& plane,
                                         const FramePose& pose,
                                         const SensorModel& sensor);

/// Direct range measurements: for each pose and visible plane, the signed
/// offset d = plane.offset - p.axis plus gaussian noise.
std::vector<SegmentObservation> simulate_range_measurements(
    const ManhattanWorld& world, const GroundTruthTrajectory& traj,
    const NoiseSpec& noise, const SensorModel& sensor);

}  // namespace mansel::sim
