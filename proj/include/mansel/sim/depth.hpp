#pragma once

#include <string>
#include <vector>

#include "mansel/core/rng.hpp"
#include "mansel/sim/measurements.hpp"
#include "mansel/sim/world.hpp"

namespace mansel::sim {

struct Intrinsics {
  int width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
};

Intrinsics intrinsics_from_fov(int width, int height, double fov_h_deg,
                               double fov_v_deg);

/// Row-major optical-axis depth in meters; NaN marks no return.
struct DepthImage {
  int width = 0, height = 0;
  std::vector<float> depth;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int frame_index = 0;

  float at(int v, int u) const { return depth[static_cast<size_t>(v) * width + u]; }
};

/// Ground-truth per-pixel hit used by the front-end fidelity checks:
/// axis label (-1 where no hit) and world plane index.
struct TruthImage {
  int width = 0, height = 0;
  std::vector<int8_t> axis;
  std::vector<int32_t> plane;
};

struct RenderOptions {
  double max_range = 6.0;
  double noise_rel = 0.0;  // per-pixel sigma as a fraction of range
};

/// Pinhole ray cast against every plane extent, honoring facing and
/// occlusion; radial range cutoff. Optionally fills `truth`.
DepthImage render_depth_frame(const ManhattanWorld& world, const FramePose& pose,
                              const Intrinsics& intrin, const RenderOptions& opts,
                              Rng rng, TruthImage* truth = nullptr);

// Portable little-endian binary: "MSDF" magic, u32 version/width/height/
// frame_index, f64 fx/fy/cx/cy, then width*height f32 depths.
void write_depth_binary(const std::string& path, const DepthImage& img);
DepthImage read_depth_binary(const std::string& path);

/// 16-bit PGM for eyeballing; depth scaled onto [0, max_range].
void write_depth_pgm(const std::string& path, const DepthImage& img,
                     double max_range = 6.0);

}  // namespace mansel::sim
