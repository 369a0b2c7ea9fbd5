#pragma once

#include <optional>
#include <vector>

#include "mansel/core/types.hpp"

namespace mansel::frontend {

/// Yaw estimate minimizing the summed Shannon entropy of the x and y
/// histograms of the rotated 2D point set, over the grid
/// center_yaw + k*step within [center_yaw - radius, center_yaw + radius].
/// Histogram bins have fixed width `bin_width` spanning the rotated
/// bounding box. Ties break toward center_yaw. Returns nullopt when fewer
/// than 10 points are available.
std::optional<double> entropy_compass(const std::vector<Eigen::Vector2d>& points,
                                      double center_yaw, double radius,
                                      double step, double bin_width = 0.05);

/// Entropy objective at a single yaw; exposed for the exhaustive-argmin
/// property checks.
double compass_objective(const std::vector<Eigen::Vector2d>& points, double yaw,
                         double bin_width = 0.05);

/// Fuses per-frame compass estimates with odometry yaw increments:
/// a compass estimate wins whenever present, otherwise the previous yaw is
/// advanced by the odometry delta. The initial yaw comes from the first
/// available compass estimate propagated back through the deltas (0 when
/// the compass never fires).
std::vector<double> fuse_orientation(const std::vector<double>& odom_yaw_deltas,
                                     const std::vector<std::optional<double>>& compass_yaws);

}  // namespace mansel::frontend
