#include "mansel/sim/depth.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace mansel::sim {

Intrinsics intrinsics_from_fov(int width, int height, double fov_h_deg,
                               double fov_v_deg) {
  if (width < 2 || height < 2) throw Error("intrinsics: image too small");
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.fx = (width / 2.0) / std::tan(deg_to_rad(fov_h_deg / 2.0));
  k.fy = (height / 2.0) / std::tan(deg_to_rad(fov_v_deg / 2.0));
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  return k;
}

DepthImage render_depth_frame(const ManhattanWorld& world, const FramePose& pose,
                              const Intrinsics& intrin, const RenderOptions& opts,
                              Rng rng, TruthImage* truth) {
  if (!(intrin.fx > 0) || !(intrin.fy > 0)) throw Error("invalid intrinsics");

  DepthImage img;
  img.width = intrin.width;
  img.height = intrin.height;
  img.fx = intrin.fx;
  img.fy = intrin.fy;
  img.cx = intrin.cx;
  img.cy = intrin.cy;
  img.depth.assign(static_cast<size_t>(intrin.width) * intrin.height,
                   std::numeric_limits<float>::quiet_NaN());
  if (truth) {
    truth->width = intrin.width;
    truth->height = intrin.height;
    truth->axis.assign(img.depth.size(), -1);
    truth->plane.assign(img.depth.size(), -1);
  }

  const double cy = std::cos(pose.yaw), sy = std::sin(pose.yaw);

  for (int v = 0; v < intrin.height; ++v) {
    const double bv = (v - intrin.cy) / intrin.fy;
    for (int u = 0; u < intrin.width; ++u) {
      const double au = (u - intrin.cx) / intrin.fx;
      // Camera ray (au, bv, 1) -> body (1, -au, -bv) -> world via yaw.
      const Vec3 dir(cy - sy * (-au), sy + cy * (-au), -bv);
      const double ray_scale = std::sqrt(1.0 + au * au + bv * bv);

      double best_s = std::numeric_limits<double>::infinity();
      int best_plane = -1;
      for (size_t pl = 0; pl < world.planes.size(); ++pl) {
        const auto& plane = world.planes[pl];
        const int a = axis_index(plane.axis);
        const double denom = dir[a];
        if (std::fabs(denom) < 1e-12) continue;
        // Front-side hits only: ray travels against the surface normal.
        if (plane.facing * denom >= 0) continue;
        const double s = (plane.offset - pose.p[a]) / denom;
        if (s <= 1e-9 || s >= best_s) continue;
        const Vec3 q = pose.p + s * dir;
        const auto [ua, va] = plane_axes(plane.axis);
        const double qu = q[axis_index(ua)];
        const double qv = q[axis_index(va)];
        if (qu < plane.extent.u_min || qu > plane.extent.u_max) continue;
        if (qv < plane.extent.v_min || qv > plane.extent.v_max) continue;
        best_s = s;
        best_plane = static_cast<int>(pl);
      }

      if (best_plane < 0 || best_s * ray_scale > opts.max_range) continue;
      double depth = best_s;
      if (opts.noise_rel > 0) depth += depth * opts.noise_rel * rng.normal();
      const size_t idx = static_cast<size_t>(v) * intrin.width + u;
      img.depth[idx] = static_cast<float>(depth);
      if (truth) {
        truth->axis[idx] = static_cast<int8_t>(axis_index(world.planes[best_plane].axis));
        truth->plane[idx] = best_plane;
      }
    }
  }
  return img;
}

namespace {
constexpr char kMagic[4] = {'M', 'S', 'D', 'F'};

template <typename T>
void put(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}
}  // namespace

void write_depth_binary(const std::string& path, const DepthImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  put<uint32_t>(os, 1);
  put<uint32_t>(os, static_cast<uint32_t>(img.width));
  put<uint32_t>(os, static_cast<uint32_t>(img.height));
  put<uint32_t>(os, static_cast<uint32_t>(img.frame_index));
  put<double>(os, img.fx);
  put<double>(os, img.fy);
  put<double>(os, img.cx);
  put<double>(os, img.cy);
  os.write(reinterpret_cast<const char*>(img.depth.data()),
           static_cast<std::streamsize>(img.depth.size() * sizeof(float)));
  if (!os) throw Error("short write to '" + path + "'");
}

DepthImage read_depth_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error("'" + path + "' is not a depth binary (bad magic)");
  const auto version = get<uint32_t>(is);
  if (version != 1) throw Error("unsupported depth binary version");
  DepthImage img;
  img.width = static_cast<int>(get<uint32_t>(is));
  img.height = static_cast<int>(get<uint32_t>(is));
  img.frame_index = static_cast<int>(get<uint32_t>(is));
  img.fx = get<double>(is);
  img.fy = get<double>(is);
  img.cx = get<double>(is);
  img.cy = get<double>(is);
  if (img.width <= 0 || img.height <= 0 || img.width > 1 << 16 ||
      img.height > 1 << 16)
    throw Error("depth binary header corrupt");
  img.depth.resize(static_cast<size_t>(img.width) * img.height);
  is.read(reinterpret_cast<char*>(img.depth.data()),
          static_cast<std::streamsize>(img.depth.size() * sizeof(float)));
  if (!is) throw Error("depth binary truncated");
  return img;
}

void write_depth_pgm(const std::string& path, const DepthImage& img,
                     double max_range) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (float d : img.depth) {
    uint16_t v = 0;
    if (std::isfinite(d) && d > 0)
      v = static_cast<uint16_t>(
          std::min(65535.0, 65535.0 * std::min<double>(d, max_range) / max_range));
    const uint8_t hi = static_cast<uint8_t>(v >> 8);
    const uint8_t lo = static_cast<uint8_t>(v & 0xff);
    os.put(static_cast<char>(hi));
    os.put(static_cast<char>(lo));
  }
}

}  // namespace mansel::sim
