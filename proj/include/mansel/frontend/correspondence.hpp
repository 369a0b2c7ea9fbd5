#pragma once

#include <vector>

#include "mansel/core/types.hpp"

namespace mansel::frontend {

struct CorrespondenceParams {
  double overlap_min = 0.3;  // extent overlap ratio after motion compensation
  double gate = 0.15;        // meters, offset agreement gate
};

/// Matches segments across consecutive frames: same axis and facing,
/// offsets agreeing once the interframe motion is removed, and extents
/// overlapping by at least overlap_min (ratio against the smaller extent).
/// `rel_motion` is the axis-aligned translation from the prev frame to the
/// curr frame. Segments must carry valid segment_ids.
std::vector<CorrespondenceEdge> temporal_correspondences(
    const std::vector<SegmentObservation>& prev,
    const std::vector<SegmentObservation>& curr, const Vec3& rel_motion,
    const CorrespondenceParams& params);

}  // namespace mansel::frontend
