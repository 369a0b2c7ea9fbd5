#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mansel {

using Vec3 = Eigen::Vector3d;

/// Error type thrown by all library operations.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Major axis of the Manhattan frame.
enum class Axis : uint8_t { X = 0, Y = 1, Z = 2 };

inline int axis_index(Axis a) { return static_cast<int>(a); }

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    default: return "z";
  }
}

Axis axis_from_name(const std::string& name);

/// In-plane coordinate axes for a plane perpendicular to `normal`.
/// Convention: X -> (Y,Z), Y -> (X,Z), Z -> (X,Y).
inline std::array<Axis, 2> plane_axes(Axis normal) {
  switch (normal) {
    case Axis::X: return {Axis::Y, Axis::Z};
    case Axis::Y: return {Axis::X, Axis::Z};
    default: return {Axis::X, Axis::Y};
  }
}

/// Axis-aligned rectangle in the (u,v) coordinates of a layout plane.
struct Rect {
  double u_min = 0.0, u_max = 0.0;
  double v_min = 0.0, v_max = 0.0;

  double area() const { return width() * height(); }
  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  bool empty() const { return u_max <= u_min || v_max <= v_min; }

  Rect shifted(double du, double dv) const {
    return {u_min + du, u_max + du, v_min + dv, v_max + dv};
  }

  static Rect hull(const Rect& a, const Rect& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return {std::min(a.u_min, b.u_min), std::max(a.u_max, b.u_max),
            std::min(a.v_min, b.v_min), std::max(a.v_max, b.v_max)};
  }

  static Rect intersect(const Rect& a, const Rect& b) {
    Rect r{std::max(a.u_min, b.u_min), std::min(a.u_max, b.u_max),
           std::max(a.v_min, b.v_min), std::min(a.v_max, b.v_max)};
    if (r.empty()) return Rect{};
    return r;
  }
};

/// One axis-aligned layout plane: a single scalar offset along its normal
/// axis plus a finite extent and a facing sign (normal direction).
struct LayoutPlane {
  Axis axis = Axis::X;
  double offset = 0.0;
  int facing = +1;  // surface normal points along +axis (+1) or -axis (-1)
  Rect extent;
};

/// Sensor pose: axis-aligned position plus yaw about the gravity axis.
/// Roll and pitch are identity (gravity assumed known).
struct FramePose {
  Vec3 p = Vec3::Zero();
  double yaw = 0.0;
};

/// A finite planar fragment observed from one frame. `d` is the signed
/// offset of the supporting plane relative to the sensor position along
/// the plane axis; the extent is sensor-relative in plane (u,v) coords.
struct SegmentObservation {
  int frame_index = -1;
  Axis axis = Axis::X;
  double d = 0.0;
  int facing = +1;
  Rect extent;
  int inlier_count = 0;
  int segment_id = -1;
  int truth_plane = -1;  // simulator-only ground truth link, -1 when unknown
};

enum class EdgeKind : uint8_t { Temporal, Hypothesis };

/// Binary correspondence: assertion that two segments lie on the same plane.
struct CorrespondenceEdge {
  int segment_id_a = -1;
  int segment_id_b = -1;
  Axis axis = Axis::X;
  EdgeKind kind = EdgeKind::Temporal;
};

inline double wrap_two_pi(double yaw) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  double y = std::fmod(yaw, two_pi);
  if (y < 0) y += two_pi;
  return y;
}

inline double deg_to_rad(double deg) { return deg * (3.14159265358979323846 / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / 3.14159265358979323846); }

}  // namespace mansel
