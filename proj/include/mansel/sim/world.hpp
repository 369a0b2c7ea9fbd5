#pragma once

#include <vector>

#include "mansel/core/types.hpp"

namespace mansel::sim {

/// Axis-aligned bounding box of the world.
struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct WorldPrimitive {
  enum class Kind { Room, Block, Wall };
  Kind kind = Kind::Room;
  // Room: box interior, six planes facing inward.
  // Block: box exterior, four side planes facing outward (spans floor to
  // ceiling; no top/bottom planes).
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  // Wall: one explicit plane.
  LayoutPlane wall;
};

struct WorldSpec {
  std::vector<WorldPrimitive> primitives;
};

struct ManhattanWorld {
  std::vector<LayoutPlane> planes;
  Box bounds;
};

/// Expands primitives into layout planes, in primitive order. Rejects an
/// empty spec, degenerate extents, and contradictory planes (same axis and
/// offset, opposite facing, overlapping extent).
ManhattanWorld generate_world(const WorldSpec& spec);

/// Convenience specs used by scenarios and tests.
WorldSpec corridor_spec(double width, double length, double height = 2.5);
WorldSpec square_loop_spec(double outer, double inner, double height = 2.5);

/// World-space corner of a plane-space (u,v) point.
Vec3 plane_point(const LayoutPlane& plane, double u, double v);

}  // namespace mansel::sim
