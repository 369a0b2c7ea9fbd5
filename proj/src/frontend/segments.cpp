#include "mansel/frontend/segments.hpp"

#include <algorithm>
#include <cmath>

namespace mansel::frontend {

namespace {

double median_of(std::vector<double>& v) {
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    m = 0.5 * (lower + m);
  }
  return m;
}

}  // namespace

std::vector<SegmentObservation> extract_segments(const AxisLabelImage& labels,
                                                 const sim::DepthImage& depth,
                                                 double yaw,
                                                 const SegmentParams& params,
                                                 Rng rng) {
  if (labels.width != depth.width || labels.height != depth.height)
    throw Error("extract_segments: label/depth dimensions differ");

  const AlignedPoints pts = backproject(depth, yaw);
  const int W = labels.width, H = labels.height;
  const size_t n = static_cast<size_t>(W) * H;

  std::vector<int32_t> component(n, -1);
  std::vector<size_t> stack;
  std::vector<std::vector<size_t>> members;

  // 4-connected components over equal axis labels, row-major seed order.
  for (size_t seed = 0; seed < n; ++seed) {
    const int8_t label = labels.labels[seed];
    if (label < 0 || component[seed] >= 0) continue;
    const int32_t id = static_cast<int32_t>(members.size());
    members.emplace_back();
    component[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      members[id].push_back(p);
      const int v = static_cast<int>(p) / W;
      const int u = static_cast<int>(p) % W;
      const int dv[4] = {-1, 1, 0, 0};
      const int du[4] = {0, 0, -1, 1};
      for (int nb = 0; nb < 4; ++nb) {
        const int vv = v + dv[nb];
        const int uu = u + du[nb];
        if (vv < 0 || vv >= H || uu < 0 || uu >= W) continue;
        const size_t q = static_cast<size_t>(vv) * W + uu;
        if (labels.labels[q] != label || component[q] >= 0) continue;
        component[q] = id;
        stack.push_back(q);
      }
    }
  }

  std::vector<SegmentObservation> out;
  std::vector<double> coords, inlier_coords;
  for (const auto& px : members) {
    if (static_cast<int>(px.size()) < params.min_inliers) continue;
    const Axis axis = static_cast<Axis>(labels.labels[px[0]]);
    const auto& coord = pts.coord(axis);

    coords.clear();
    for (size_t p : px) coords.push_back(coord[p]);

    // One-parameter RANSAC: a sampled point fixes the offset outright.
    int best_count = -1;
    double best_offset = 0.0;
    for (int it = 0; it < params.ransac_iters; ++it) {
      const double cand = coords[rng.uniform_index(coords.size())];
      int count = 0;
      for (double c : coords)
        if (std::fabs(c - cand) <= params.ransac_tol) ++count;
      if (count > best_count) {
        best_count = count;
        best_offset = cand;
      }
    }

    inlier_coords.clear();
    for (double c : coords)
      if (std::fabs(c - best_offset) <= params.ransac_tol)
        inlier_coords.push_back(c);
    if (inlier_coords.empty()) continue;
    const double offset = median_of(inlier_coords);

    // Re-collect against the refitted offset for the final support set.
    SegmentObservation obs;
    obs.frame_index = depth.frame_index;
    obs.axis = axis;
    obs.d = offset;
    obs.facing = offset > 0 ? -1 : +1;
    obs.inlier_count = 0;
    const auto [ua, va] = plane_axes(axis);
    const auto& cu = pts.coord(ua);
    const auto& cv = pts.coord(va);
    bool first = true;
    for (size_t p : px) {
      if (std::fabs(coord[p] - offset) > params.ransac_tol) continue;
      obs.inlier_count++;
      if (first) {
        obs.extent = {cu[p], cu[p], cv[p], cv[p]};
        first = false;
      } else {
        obs.extent.u_min = std::min(obs.extent.u_min, cu[p]);
        obs.extent.u_max = std::max(obs.extent.u_max, cu[p]);
        obs.extent.v_min = std::min(obs.extent.v_min, cv[p]);
        obs.extent.v_max = std::max(obs.extent.v_max, cv[p]);
      }
    }

    if (obs.inlier_count < params.min_inliers) continue;
    if (obs.extent.area() < params.min_extent) continue;
    out.push_back(obs);
  }
  return out;
}

}  // namespace mansel::frontend
