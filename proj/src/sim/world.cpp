#include "mansel/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mansel::sim {

namespace {

Rect face_extent(Axis normal, const Vec3& lo, const Vec3& hi) {
  const auto [ua, va] = plane_axes(normal);
  return Rect{lo[axis_index(ua)], hi[axis_index(ua)], lo[axis_index(va)],
              hi[axis_index(va)]};
}

void append_room(std::vector<LayoutPlane>& out, const Vec3& lo, const Vec3& hi) {
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    const int a = axis_index(axis);
    out.push_back({axis, lo[a], +1, face_extent(axis, lo, hi)});
    out.push_back({axis, hi[a], -1, face_extent(axis, lo, hi)});
  }
}

void append_block(std::vector<LayoutPlane>& out, const Vec3& lo, const Vec3& hi) {
  for (Axis axis : {Axis::X, Axis::Y}) {
    const int a = axis_index(axis);
    out.push_back({axis, lo[a], -1, face_extent(axis, lo, hi)});
    out.push_back({axis, hi[a], +1, face_extent(axis, lo, hi)});
  }
}

void check_box(const Vec3& lo, const Vec3& hi, const char* what) {
  for (int a = 0; a < 3; ++a) {
    if (!(hi[a] > lo[a]))
      throw Error(std::string(what) + " box is degenerate along " +
                  axis_name(static_cast<Axis>(a)));
  }
}

}  // namespace

Vec3 plane_point(const LayoutPlane& plane, double u, double v) {
  const auto [ua, va] = plane_axes(plane.axis);
  Vec3 q = Vec3::Zero();
  q[axis_index(plane.axis)] = plane.offset;
  q[axis_index(ua)] = u;
  q[axis_index(va)] = v;
  return q;
}

ManhattanWorld generate_world(const WorldSpec& spec) {
  ManhattanWorld world;
  for (const auto& prim : spec.primitives) {
    switch (prim.kind) {
      case WorldPrimitive::Kind::Room:
        check_box(prim.min, prim.max, "room");
        append_room(world.planes, prim.min, prim.max);
        break;
      case WorldPrimitive::Kind::Block:
        check_box(prim.min, prim.max, "block");
        append_block(world.planes, prim.min, prim.max);
        break;
      case WorldPrimitive::Kind::Wall:
        world.planes.push_back(prim.wall);
        break;
    }
  }
  if (world.planes.empty()) throw Error("no planes");

  for (const auto& plane : world.planes) {
    if (plane.extent.empty()) throw Error("plane extent is degenerate");
    if (plane.facing != +1 && plane.facing != -1)
      throw Error("plane facing must be +1 or -1");
  }

  // Same axis + same offset + opposite facing + overlapping extent is a
  // zero-thickness double-sided wall: the spec that produced it is
  // contradictory.
  for (size_t i = 0; i < world.planes.size(); ++i) {
    for (size_t j = i + 1; j < world.planes.size(); ++j) {
      const auto& a = world.planes[i];
      const auto& b = world.planes[j];
      if (a.axis != b.axis || a.facing == b.facing) continue;
      if (std::fabs(a.offset - b.offset) > 1e-9) continue;
      if (!Rect::intersect(a.extent, b.extent).empty())
        throw Error("contradictory planes: coincident " +
                    std::string(axis_name(a.axis)) +
                    "-planes with opposite facing overlap");
    }
  }

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& plane : world.planes) {
    for (double u : {plane.extent.u_min, plane.extent.u_max}) {
      for (double v : {plane.extent.v_min, plane.extent.v_max}) {
        const Vec3 q = plane_point(plane, u, v);
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
      }
    }
  }
  world.bounds = {lo, hi};
  return world;
}

WorldSpec corridor_spec(double width, double length, double height) {
  WorldPrimitive room;
  room.kind = WorldPrimitive::Kind::Room;
  room.min = Vec3(0, 0, 0);
  room.max = Vec3(width, length, height);
  return WorldSpec{{room}};
}

WorldSpec square_loop_spec(double outer, double inner, double height) {
  if (!(inner < outer)) throw Error("square loop: inner must be smaller than outer");
  WorldPrimitive room;
  room.kind = WorldPrimitive::Kind::Room;
  room.min = Vec3(0, 0, 0);
  room.max = Vec3(outer, outer, height);

  const double margin = (outer - inner) / 2.0;
  WorldPrimitive block;
  block.kind = WorldPrimitive::Kind::Block;
  block.min = Vec3(margin, margin, 0);
  block.max = Vec3(margin + inner, margin + inner, height);
  return WorldSpec{{room, block}};
}

}  // namespace mansel::sim
