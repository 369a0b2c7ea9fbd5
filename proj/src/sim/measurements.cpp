#include "mansel/sim/measurements.hpp"

#include <cmath>

namespace mansel::sim {

void NoiseSpec::validate() const {
  if (odom_sigma < 0 || range_sigma < 0 || yaw_sigma < 0)
    throw Error("noise sigmas must be non-negative");
}

std::vector<OdometrySample> simulate_odometry(const GroundTruthTrajectory& traj,
                                              const NoiseSpec& noise) {
  noise.validate();
  if (traj.poses.size() < 2) throw Error("odometry needs at least two poses");

  Rng rng = Rng(noise.seed).stream("odom");
  std::vector<OdometrySample> out;
  out.reserve(traj.poses.size() - 1);
  for (size_t i = 0; i + 1 < traj.poses.size(); ++i) {
    const auto& a = traj.poses[i];
    const auto& b = traj.poses[i + 1];
    OdometrySample s;
    for (int c = 0; c < 3; ++c)
      s.t_axis[c] = (b.p[c] - a.p[c]) + noise.odom_bias[c] +
                    noise.odom_sigma * rng.normal();
    // Sensor frame at i: rotate back by the true yaw.
    const double cy = std::cos(a.yaw), sy = std::sin(a.yaw);
    s.t_sensor = Vec3(cy * s.t_axis.x() + sy * s.t_axis.y(),
                      -sy * s.t_axis.x() + cy * s.t_axis.y(), s.t_axis.z());
    double dyaw = b.yaw - a.yaw;
    while (dyaw > 3.14159265358979323846) dyaw -= 2 * 3.14159265358979323846;
    while (dyaw < -3.14159265358979323846) dyaw += 2 * 3.14159265358979323846;
    s.dyaw = dyaw + noise.yaw_sigma * rng.normal();
    out.push_back(s);
  }
  return out;
}

namespace {

struct HalfPlane {
  // a*u + b*v + c >= 0 in plane (u,v) coordinates
  double a, b, c;
};

// The four FOV wedge half-spaces restricted to a layout plane. Body frame:
// x forward, y left, z up; inside iff tan(ah)*x >= |y| and tan(av)*x >= |z|.
std::vector<HalfPlane> wedge_on_plane(const LayoutPlane& plane,
                                      const FramePose& pose,
                                      const SensorModel& sensor) {
  const double th = std::tan(deg_to_rad(sensor.fov_h_deg / 2.0));
  const double tv = std::tan(deg_to_rad(sensor.fov_v_deg / 2.0));
  const Vec3 normals_body[4] = {
      {th, -1, 0}, {th, +1, 0}, {tv, 0, -1}, {tv, 0, +1}};

  const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);
  const auto [ua, va] = plane_axes(plane.axis);

  std::vector<HalfPlane> out;
  out.reserve(4);
  for (const Vec3& nb : normals_body) {
    // World-frame normal; constraint is n . (q - p) >= 0.
    const Vec3 n(cy * nb.x() - sy * nb.y(), sy * nb.x() + cy * nb.y(), nb.z());
    // Restrict q to the plane: q = offset on the normal axis, (u,v) free.
    const Vec3 base = plane_point(plane, 0.0, 0.0);
    HalfPlane h;
    h.a = n[axis_index(ua)];
    h.b = n[axis_index(va)];
    h.c = n.dot(base - pose.p);
    out.push_back(h);
  }
  return out;
}

// Sutherland-Hodgman clip of a convex polygon against a half-plane.
std::vector<Eigen::Vector2d> clip(const std::vector<Eigen::Vector2d>& poly,
                                  const HalfPlane& h) {
  std::vector<Eigen::Vector2d> out;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& cur = poly[i];
    const auto& nxt = poly[(i + 1) % n];
    const double fc = h.a * cur.x() + h.b * cur.y() + h.c;
    const double fn = h.a * nxt.x() + h.b * nxt.y() + h.c;
    if (fc >= 0) out.push_back(cur);
    if ((fc >= 0) != (fn >= 0)) {
      const double t = fc / (fc - fn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

}  // namespace

std::optional<Rect> visible_plane_extent(const LayoutPlane& plane,
                                         const FramePose& pose,
                                         const SensorModel& sensor) {
  const int a = axis_index(plane.axis);
  const double d = plane.offset - pose.p[a];
  if (std::fabs(d) > sensor.max_range) return std::nullopt;
  // The sensor must sit on the side the surface normal points to.
  if (!(plane.facing * (-d) > 0)) return std::nullopt;

  std::vector<Eigen::Vector2d> poly = {
      {plane.extent.u_min, plane.extent.v_min},
      {plane.extent.u_max, plane.extent.v_min},
      {plane.extent.u_max, plane.extent.v_max},
      {plane.extent.u_min, plane.extent.v_max}};
  for (const auto& h : wedge_on_plane(plane, pose, sensor)) {
    poly = clip(poly, h);
    if (poly.empty()) return std::nullopt;
  }

  Rect r{poly[0].x(), poly[0].x(), poly[0].y(), poly[0].y()};
  for (const auto& q : poly) {
    r.u_min = std::min(r.u_min, q.x());
    r.u_max = std::max(r.u_max, q.x());
    r.v_min = std::min(r.v_min, q.y());
    r.v_max = std::max(r.v_max, q.y());
  }
  if (r.area() < 1e-12) return std::nullopt;

  // Sensor-relative coordinates.
  const auto [ua, va] = plane_axes(plane.axis);
  return r.shifted(-pose.p[axis_index(ua)], -pose.p[axis_index(va)]);
}

std::vector<SegmentObservation> simulate_range_measurements(
    const ManhattanWorld& world, const GroundTruthTrajectory& traj,
    const NoiseSpec& noise, const SensorModel& sensor) {
  noise.validate();
  if (world.planes.empty()) throw Error("world has no planes");

  Rng rng = Rng(noise.seed).stream("range");
  std::vector<SegmentObservation> out;
  for (size_t i = 0; i < traj.poses.size(); ++i) {
    const auto& pose = traj.poses[i];
    for (size_t pl = 0; pl < world.planes.size(); ++pl) {
      const auto& plane = world.planes[pl];
      const auto extent = visible_plane_extent(plane, pose, sensor);
      if (!extent) continue;
      SegmentObservation obs;
      obs.frame_index = static_cast<int>(i);
      obs.axis = plane.axis;
      obs.d = (plane.offset - pose.p[axis_index(plane.axis)]) +
              noise.range_sigma * rng.normal();
      obs.facing = plane.facing;
      obs.extent = *extent;
      obs.truth_plane = static_cast<int>(pl);
      out.push_back(obs);
    }
  }
  return out;
}

}  // namespace mansel::sim
