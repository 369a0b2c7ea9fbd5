#include "mansel/frontend/labeling.hpp"

#include <cmath>

#include "mansel/kernels/kernels.hpp"

namespace mansel::frontend {

AlignedPoints backproject(const sim::DepthImage& depth, double yaw) {
  AlignedPoints pts;
  pts.width = depth.width;
  pts.height = depth.height;
  const size_t n = depth.depth.size();
  pts.x.resize(n);
  pts.y.resize(n);
  pts.z.resize(n);

  std::vector<double> au(depth.width);
  for (int u = 0; u < depth.width; ++u) au[u] = (u - depth.cx) / depth.fx;
  const double c = std::cos(yaw), s = std::sin(yaw);

  const auto& k = kernels::ops();
  for (int v = 0; v < depth.height; ++v) {
    const size_t row = static_cast<size_t>(v) * depth.width;
    const double bv = (v - depth.cy) / depth.fy;
    k.backproject_row(depth.depth.data() + row, au.data(), bv, c, s,
                      pts.x.data() + row, pts.y.data() + row,
                      pts.z.data() + row, depth.width);
  }
  return pts;
}

std::vector<Eigen::Vector2d> horizontal_points(const sim::DepthImage& depth,
                                               int stride) {
  std::vector<Eigen::Vector2d> out;
  for (int v = 0; v < depth.height; v += stride) {
    for (int u = 0; u < depth.width; u += stride) {
      const float z = depth.at(v, u);
      if (!std::isfinite(z)) continue;
      const double au = (u - depth.cx) / depth.fx;
      // Body frame: x forward (= camera z), y left (= -camera x).
      out.emplace_back(static_cast<double>(z), -au * static_cast<double>(z));
    }
  }
  return out;
}

AxisLabelImage label_axis_alignment(const sim::DepthImage& depth, double yaw,
                                    int k, double min_fraction,
                                    double plane_tol) {
  if (k < 3 || k % 2 == 0) throw Error("labeling: k must be odd and >= 3");

  const AlignedPoints pts = backproject(depth, yaw);
  const int W = depth.width, H = depth.height;
  const size_t n = static_cast<size_t>(W) * H;
  const int half = k / 2;

  std::vector<int32_t> counts[3];
  for (auto& c : counts) c.assign(n, 0);
  std::vector<int32_t> valid(n, 0);

  const auto& ops = kernels::ops();
  // For each window offset, one shifted compare-accumulate pass over the
  // whole image; boundaries handled by shrinking the row interval.
  for (int dy = -half; dy <= half; ++dy) {
    const int r0 = std::max(0, -dy);
    const int r1 = H - std::max(0, dy);
    for (int dx = -half; dx <= half; ++dx) {
      const int c0 = std::max(0, -dx);
      const int c1 = W - std::max(0, dx);
      if (c1 <= c0) continue;
      const size_t len = static_cast<size_t>(c1 - c0);
      for (int r = r0; r < r1; ++r) {
        const size_t center = static_cast<size_t>(r) * W + c0;
        const size_t nbr = static_cast<size_t>(r + dy) * W + (c0 + dx);
        for (int a = 0; a < 3; ++a) {
          const auto& coord = pts.coord(static_cast<Axis>(a));
          ops.count_close(coord.data() + center, coord.data() + nbr, plane_tol,
                          counts[a].data() + center, len);
        }
        ops.count_finite(pts.x.data() + nbr, valid.data() + center, len);
      }
    }
  }

  AxisLabelImage img;
  img.width = W;
  img.height = H;
  img.labels.assign(n, kLabelNoData);
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(depth.depth[i])) continue;  // stays NoData
    int best_axis = 0;
    int32_t best = counts[0][i];
    for (int a = 1; a < 3; ++a) {
      if (counts[a][i] > best) {
        best = counts[a][i];
        best_axis = a;
      }
    }
    const double fraction = valid[i] > 0 ? static_cast<double>(best) / valid[i] : 0.0;
    img.labels[i] = fraction < min_fraction ? kLabelUnknown
                                            : static_cast<int8_t>(best_axis);
  }
  return img;
}

}  // namespace mansel::frontend
