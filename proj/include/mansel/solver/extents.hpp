#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mansel/graph/factor_graph.hpp"
#include "mansel/solver/merge.hpp"

namespace mansel::solver {

/// One reconstructed layout structure: merged plane slots sharing a single
/// optimized offset, with the union extent of their supporting segments in
/// world coordinates.
struct LayoutStructure {
  Axis axis = Axis::X;
  double offset = 0.0;
  int facing = +1;
  Rect extent;
  std::vector<int> slots;  // per-axis slot indices collapsed together
};

/// Builds the final structures from the resolved parameter vector: per
/// merged class one structure whose extent is the union of the member
/// segments' extents re-anchored to the optimized trajectory.
std::vector<LayoutStructure> model_extents(
    const Eigen::VectorXd& xi, const graph::ParameterIndex& index,
    const graph::FactorGraph& g, const MergeSet& merges,
    const std::vector<SegmentObservation>& segments);

}  // namespace mansel::solver
