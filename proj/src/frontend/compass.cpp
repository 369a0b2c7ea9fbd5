#include "mansel/frontend/compass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mansel/kernels/kernels.hpp"

namespace mansel::frontend {

namespace {

double histogram_entropy(const std::vector<double>& coords, double bin_width,
                         std::vector<int>& scratch) {
  const auto [lo_it, hi_it] = std::minmax_element(coords.begin(), coords.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  const int bins = std::max(1, static_cast<int>(std::ceil(span / bin_width)) + 1);
  scratch.assign(bins, 0);
  const double inv = 1.0 / bin_width;
  for (double c : coords) {
    int b = static_cast<int>((c - lo) * inv);
    b = std::clamp(b, 0, bins - 1);
    scratch[b]++;
  }
  const double n = static_cast<double>(coords.size());
  double h = 0.0;
  for (int count : scratch) {
    if (count == 0) continue;
    const double p = count / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double compass_objective(const std::vector<Eigen::Vector2d>& points, double yaw,
                         double bin_width) {
  const size_t n = points.size();
  std::vector<double> xs(n), ys(n), xr(n), yr(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = points[i].x();
    ys[i] = points[i].y();
  }
  kernels::ops().rotate2d(xs.data(), ys.data(), std::cos(yaw), std::sin(yaw),
                          xr.data(), yr.data(), n);
  std::vector<int> scratch;
  return histogram_entropy(xr, bin_width, scratch) +
         histogram_entropy(yr, bin_width, scratch);
}

std::optional<double> entropy_compass(const std::vector<Eigen::Vector2d>& points,
                                      double center_yaw, double radius,
                                      double step, double bin_width) {
  if (!(step > 0)) throw Error("entropy compass: step must be positive");
  if (points.size() < 10) return std::nullopt;

  const size_t n = points.size();
  std::vector<double> xs(n), ys(n), xr(n), yr(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = points[i].x();
    ys[i] = points[i].y();
  }

  const int half = static_cast<int>(std::floor(radius / step + 1e-12));
  double best_yaw = center_yaw;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> scratch;
  for (int k = -half; k <= half; ++k) {
    const double yaw = center_yaw + k * step;
    kernels::ops().rotate2d(xs.data(), ys.data(), std::cos(yaw), std::sin(yaw),
                            xr.data(), yr.data(), n);
    const double obj = histogram_entropy(xr, bin_width, scratch) +
                       histogram_entropy(yr, bin_width, scratch);
    const bool better =
        obj < best_obj ||
        (obj == best_obj &&
         std::fabs(yaw - center_yaw) < std::fabs(best_yaw - center_yaw));
    if (better) {
      best_obj = obj;
      best_yaw = yaw;
    }
  }
  return best_yaw;
}

std::vector<double> fuse_orientation(
    const std::vector<double>& odom_yaw_deltas,
    const std::vector<std::optional<double>>& compass_yaws) {
  const size_t n = compass_yaws.size();
  if (n == 0) return {};
  if (odom_yaw_deltas.size() + 1 != n)
    throw Error("fuse_orientation: need n-1 yaw deltas for n frames");

  std::vector<double> yaw(n, 0.0);

  // Seed from the first compass fix, walked back through the deltas.
  size_t first = n;
  for (size_t i = 0; i < n; ++i) {
    if (compass_yaws[i]) {
      first = i;
      break;
    }
  }
  if (first < n) {
    double y = *compass_yaws[first];
    for (size_t i = first; i-- > 0;) y -= odom_yaw_deltas[i];
    yaw[0] = y;
  }

  for (size_t i = 1; i < n; ++i) {
    if (compass_yaws[i])
      yaw[i] = *compass_yaws[i];
    else
      yaw[i] = yaw[i - 1] + odom_yaw_deltas[i - 1];
  }
  if (compass_yaws[0]) yaw[0] = *compass_yaws[0];
  return yaw;
}

}  // namespace mansel::frontend
