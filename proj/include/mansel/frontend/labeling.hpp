#pragma once

#include <cstdint>
#include <vector>

#include "mansel/core/types.hpp"
#include "mansel/sim/depth.hpp"

namespace mansel::frontend {

// Per-pixel axis labels. Values 0/1/2 are the major axes; Unknown marks
// low-confidence pixels, NoData marks missing depth.
constexpr int8_t kLabelNoData = -2;
constexpr int8_t kLabelUnknown = -1;

struct AxisLabelImage {
  int width = 0, height = 0;
  std::vector<int8_t> labels;

  int8_t at(int v, int u) const { return labels[static_cast<size_t>(v) * width + u]; }
};

/// Depth pixels back-projected into the axis-aligned frame (sensor at the
/// origin), stored as coordinate planes; NaN where depth is missing.
struct AlignedPoints {
  int width = 0, height = 0;
  std::vector<double> x, y, z;

  const std::vector<double>& coord(Axis a) const {
    switch (a) {
      case Axis::X: return x;
      case Axis::Y: return y;
      default: return z;
    }
  }
};

AlignedPoints backproject(const sim::DepthImage& depth, double yaw);

/// Horizontal (gravity-plane) projection of the finite depth points in the
/// sensor body frame, subsampled with `stride`; compass input.
std::vector<Eigen::Vector2d> horizontal_points(const sim::DepthImage& depth,
                                               int stride = 1);

/// Labels each pixel with the major axis whose perpendicular plane through
/// the pixel's point captures the most k x k neighbors within `plane_tol`;
/// Unknown when the winning share of valid neighbors is below
/// `min_fraction`, NoData where depth is missing.
AxisLabelImage label_axis_alignment(const sim::DepthImage& depth, double yaw,
                                    int k, double min_fraction,
                                    double plane_tol = 0.03);

}  // namespace mansel::frontend
