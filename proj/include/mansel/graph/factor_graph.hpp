#pragma once

#include <string>
#include <vector>

#include "mansel/core/sparse.hpp"
#include "mansel/core/types.hpp"
#include "mansel/sim/measurements.hpp"

namespace mansel::graph {

/// One layout-plane variable: the union of all segments associated to the
/// same physical plane by temporal analysis. Indexed per axis.
struct PlaneSlot {
  Axis axis = Axis::X;
  int facing = +1;
  std::vector<int> segment_ids;  // members, ascending
};

struct RangeFactor {
  int frame = -1;
  Axis axis = Axis::X;
  int slot = -1;  // per-axis slot index
  double d = 0.0;
  int segment_id = -1;
};

struct OdometryFactor {
  int frame = -1;  // connects frame and frame+1
  Vec3 t = Vec3::Zero();
};

/// Candidate equivalence between two same-axis plane slots.
struct Hypothesis {
  Axis axis = Axis::X;
  int slot_a = -1;
  int slot_b = -1;
};

struct FactorGraph {
  int n_frames = 0;
  std::vector<PlaneSlot> slots[3];  // per axis
  std::vector<RangeFactor> range_factors;
  std::vector<OdometryFactor> odom_factors;
  std::vector<Hypothesis> hypotheses;

  int total_slots() const {
    return static_cast<int>(slots[0].size() + slots[1].size() + slots[2].size());
  }
  /// Slot index of the given segment, -1 when unknown.
  int slot_of_segment(int segment_id, Axis axis) const;
};

/// Column layout of the stacked parameter vector:
/// [p_0..p_{n-1} (3 each) | m^x slots | m^y slots | m^z slots].
class ParameterIndex {
 public:
  ParameterIndex() = default;
  ParameterIndex(int n_frames, int nx, int ny, int nz);
  static ParameterIndex from_graph(const FactorGraph& g);

  int dim() const { return dim_; }
  int n_frames() const { return n_frames_; }
  int slots(Axis a) const { return slot_counts_[axis_index(a)]; }

  int pose_col(int frame, int component) const;
  int plane_col(Axis axis, int slot) const;

  struct Entry {
    bool is_pose = false;
    int frame = -1;
    int component = -1;  // 0..2 for poses
    Axis axis = Axis::X;
    int slot = -1;
  };
  Entry lookup(int col) const;
  std::string describe(int col) const;

 private:
  int n_frames_ = 0;
  int slot_counts_[3] = {0, 0, 0};
  int dim_ = 0;
};

/// Union-find over temporal edges creates the plane slots; one range
/// factor per observation. Edges joining different axes or facings are
/// rejected.
FactorGraph build_graph(const std::vector<SegmentObservation>& segments,
                        const std::vector<CorrespondenceEdge>& temporal_edges,
                        const std::vector<sim::OdometrySample>& odometry);

}  // namespace mansel::graph
