#include "mansel/frontend/correspondence.hpp"

#include <cmath>

namespace mansel::frontend {

std::vector<CorrespondenceEdge> temporal_correspondences(
    const std::vector<SegmentObservation>& prev,
    const std::vector<SegmentObservation>& curr, const Vec3& rel_motion,
    const CorrespondenceParams& params) {
  std::vector<CorrespondenceEdge> edges;
  for (const auto& a : prev) {
    for (const auto& b : curr) {
      if (a.axis != b.axis || a.facing != b.facing) continue;
      const int ax = axis_index(a.axis);
      if (std::fabs(a.d - (b.d + rel_motion[ax])) >= params.gate) continue;

      // Express b's extent relative to the prev sensor position.
      const auto [ua, va] = plane_axes(a.axis);
      const Rect b_in_a = b.extent.shifted(rel_motion[axis_index(ua)],
                                           rel_motion[axis_index(va)]);
      const double inter = Rect::intersect(a.extent, b_in_a).area();
      const double smaller = std::min(a.extent.area(), b_in_a.area());
      if (smaller <= 0 || inter / smaller < params.overlap_min) continue;

      edges.push_back({a.segment_id, b.segment_id, a.axis, EdgeKind::Temporal});
    }
  }
  return edges;
}

}  // namespace mansel::frontend
