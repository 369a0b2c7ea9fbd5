#include "mansel/pipeline/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mansel::pipeline {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw Error("scenario config: key '" + key + "' " + why);
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path.empty() ? key : path + "." + key, "is missing");
  return j.at(key);
}

double number_at(const json& j, const std::string& path, const char* key,
                 std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "is missing");
  }
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "must be a number");
  return v.get<double>();
}

int int_at(const json& j, const std::string& path, const char* key,
           std::optional<int> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "is missing");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
  return v.get<int>();
}

bool bool_at(const json& j, const std::string& path, const char* key,
             bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "must be a boolean");
  return v.get<bool>();
}

Vec3 vec3_at(const json& j, const std::string& path, const char* key,
             std::optional<Vec3> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "is missing");
  }
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number())
    fail(path + "." + key, "must be a [x,y,z] number triple");
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Rect rect_at(const json& j, const std::string& path) {
  Rect r;
  r.u_min = number_at(j, path, "u_min");
  r.u_max = number_at(j, path, "u_max");
  r.v_min = number_at(j, path, "v_min");
  r.v_max = number_at(j, path, "v_max");
  return r;
}

sim::WorldSpec parse_world(const json& jw) {
  const json& prims = require(jw, "world", "primitives");
  if (!prims.is_array() || prims.empty())
    fail("world.primitives", "must be a non-empty array");

  sim::WorldSpec spec;
  for (size_t i = 0; i < prims.size(); ++i) {
    const std::string path = "world.primitives[" + std::to_string(i) + "]";
    const json& p = prims[i];
    const json& kind_j = require(p, path, "kind");
    const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : "";

    if (kind == "room" || kind == "block") {
      sim::WorldPrimitive prim;
      prim.kind = kind == "room" ? sim::WorldPrimitive::Kind::Room
                                 : sim::WorldPrimitive::Kind::Block;
      prim.min = vec3_at(p, path, "min");
      prim.max = vec3_at(p, path, "max");
      spec.primitives.push_back(prim);
    } else if (kind == "corridor") {
      const double w = number_at(p, path, "width");
      const double l = number_at(p, path, "length");
      const double h = number_at(p, path, "height", 2.5);
      const auto sub = sim::corridor_spec(w, l, h);
      spec.primitives.insert(spec.primitives.end(), sub.primitives.begin(),
                             sub.primitives.end());
    } else if (kind == "square_loop") {
      const double outer = number_at(p, path, "outer");
      const double inner = number_at(p, path, "inner");
      const double h = number_at(p, path, "height", 2.5);
      const auto sub = sim::square_loop_spec(outer, inner, h);
      spec.primitives.insert(spec.primitives.end(), sub.primitives.begin(),
                             sub.primitives.end());
    } else if (kind == "wall") {
      sim::WorldPrimitive prim;
      prim.kind = sim::WorldPrimitive::Kind::Wall;
      const json& ax = require(p, path, "axis");
      if (!ax.is_string()) fail(path + ".axis", "must be \"x\", \"y\", or \"z\"");
      prim.wall.axis = axis_from_name(ax.get<std::string>());
      prim.wall.offset = number_at(p, path, "offset");
      const int facing = int_at(p, path, "facing");
      if (facing != 1 && facing != -1) fail(path + ".facing", "must be +1 or -1");
      prim.wall.facing = facing;
      prim.wall.extent = rect_at(require(p, path, "extent"), path + ".extent");
      spec.primitives.push_back(prim);
    } else {
      fail(path + ".kind", "must be one of room, block, wall, corridor, square_loop");
    }
  }
  return spec;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("scenario config " + origin + ": " + e.what());
  }

  const int version = int_at(j, "", "version");
  if (version != 1)
    fail("version", "must be 1 (unsupported schema version " +
                        std::to_string(version) + ")");

  Scenario sc;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail("name", "must be a string");
    sc.name = j.at("name").get<std::string>();
  }
  sc.seed = static_cast<uint64_t>(int_at(j, "", "seed", 0));

  sc.world = parse_world(require(j, "", "world"));

  {
    const json& jt = require(j, "", "trajectory");
    const json& wps = require(jt, "trajectory", "waypoints");
    if (!wps.is_array() || wps.size() < 2)
      fail("trajectory.waypoints", "must list at least two points");
    for (size_t i = 0; i < wps.size(); ++i) {
      const json& w = wps[i];
      if (!w.is_array() || w.size() != 3)
        fail("trajectory.waypoints[" + std::to_string(i) + "]",
             "must be a [x,y,z] triple");
      sc.trajectory.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>(),
                                           w[2].get<double>());
    }
    sc.trajectory.step = number_at(jt, "trajectory", "step", 0.2);
    if (!(sc.trajectory.step > 0)) fail("trajectory.step", "must be positive");
    sc.trajectory.closed = bool_at(jt, "trajectory", "closed", false);
    if (jt.contains("yaw")) {
      const json& y = jt.at("yaw");
      if (y.is_string() && y.get<std::string>() == "tangent") {
        sc.trajectory.yaw_mode = sim::TrajectorySpec::YawMode::Tangent;
      } else if (y.is_number()) {
        sc.trajectory.yaw_mode = sim::TrajectorySpec::YawMode::Fixed;
        sc.trajectory.fixed_yaw = y.get<double>();
      } else {
        fail("trajectory.yaw", "must be \"tangent\" or a fixed angle in radians");
      }
    }
    sc.laps = int_at(jt, "trajectory", "laps", 1);
    if (sc.laps < 1) fail("trajectory.laps", "must be >= 1");
    if (sc.laps > 1 && !sc.trajectory.closed)
      fail("trajectory.laps", "requires trajectory.closed = true");
  }

  {
    const json& jn = require(j, "", "noise");
    sc.noise.odom_sigma = number_at(jn, "noise", "odom_sigma", 0.0);
    sc.noise.odom_bias = vec3_at(jn, "noise", "odom_bias", Vec3::Zero().eval());
    sc.noise.range_sigma = number_at(jn, "noise", "range_sigma", 0.0);
    sc.noise.yaw_sigma = number_at(jn, "noise", "yaw_sigma", 0.0);
    if (sc.noise.odom_sigma < 0 || sc.noise.range_sigma < 0 || sc.noise.yaw_sigma < 0)
      fail("noise", "sigmas must be non-negative");
    sc.noise.seed = sc.seed;
  }

  {
    const json& js = require(j, "", "sensor");
    const json& mode = require(js, "sensor", "mode");
    const std::string m = mode.is_string() ? mode.get<std::string>() : "";
    if (m == "direct")
      sc.mode = SensorMode::Direct;
    else if (m == "depth")
      sc.mode = SensorMode::Depth;
    else
      fail("sensor.mode", "must be \"direct\" or \"depth\"");
    sc.sensor.max_range = number_at(js, "sensor", "max_range", 6.0);
    if (js.contains("fov_deg")) {
      const json& f = js.at("fov_deg");
      if (!f.is_array() || f.size() != 2)
        fail("sensor.fov_deg", "must be [horizontal, vertical] degrees");
      sc.sensor.fov_h_deg = f[0].get<double>();
      sc.sensor.fov_v_deg = f[1].get<double>();
    }
    if (js.contains("image")) {
      const json& im = js.at("image");
      if (!im.is_array() || im.size() != 2)
        fail("sensor.image", "must be [width, height] pixels");
      sc.image_width = im[0].get<int>();
      sc.image_height = im[1].get<int>();
    }
    sc.depth_noise_rel = number_at(js, "sensor", "depth_noise_rel", 0.005);
  }

  if (j.contains("frontend")) {
    const json& jf = j.at("frontend");
    auto& sp = sc.segment_params;
    sp.k = int_at(jf, "frontend", "k", 5);
    sp.min_fraction = number_at(jf, "frontend", "min_fraction", 0.6);
    sp.plane_tol = number_at(jf, "frontend", "plane_tol", 0.03);
    sp.min_inliers = int_at(jf, "frontend", "min_inliers", 50);
    sp.min_extent = number_at(jf, "frontend", "min_extent", 0.25);
    sp.ransac_tol = number_at(jf, "frontend", "ransac_tol", 0.03);
    sp.ransac_iters = int_at(jf, "frontend", "ransac_iters", 100);
    sc.correspondence.overlap_min = number_at(jf, "frontend", "overlap_min", 0.3);
    sc.correspondence.gate = number_at(jf, "frontend", "gate", 0.15);
    sc.compass.bin_width = number_at(jf, "frontend", "compass_bin_width", 0.05);
    sc.compass.radius_deg = number_at(jf, "frontend", "compass_radius_deg", 0.3);
    sc.compass.step_deg = number_at(jf, "frontend", "compass_step_deg", 0.05);
    sc.compass.first_radius_deg =
        number_at(jf, "frontend", "compass_first_radius_deg", 45.0);
    sc.compass.first_step_deg =
        number_at(jf, "frontend", "compass_first_step_deg", 1.0);
    sc.compass.stride = int_at(jf, "frontend", "compass_stride", 2);
  }

  if (j.contains("solver")) {
    const json& jv = j.at("solver");
    sc.solver.epsilon = number_at(jv, "solver", "epsilon", 0.02);
    sc.solver.mu = number_at(jv, "solver", "mu", 0.3);
    sc.solver.max_gap = number_at(jv, "solver", "max_gap", 1.0);
    sc.solver.anchor_weight = number_at(jv, "solver", "anchor_weight", 1e3);
    sc.solver.max_iters = int_at(jv, "solver", "max_iters", 20000);
    if (jv.contains("weighting")) {
      const std::string w = jv.at("weighting").is_string()
                                ? jv.at("weighting").get<std::string>()
                                : "";
      if (w == "unit")
        sc.solver.weighting = graph::AssemblyOptions::Weighting::Unit;
      else if (w == "sigma")
        sc.solver.weighting = graph::AssemblyOptions::Weighting::Sigma;
      else
        fail("solver.weighting", "must be \"unit\" or \"sigma\"");
    }
    if (jv.contains("residual_norm")) {
      const std::string n = jv.at("residual_norm").is_string()
                                ? jv.at("residual_norm").get<std::string>()
                                : "";
      if (n != "l2")
        fail("solver.residual_norm",
             "only \"l2\" is supported (\"l1\"/\"linf\" are out of scope)");
    }
    if (sc.solver.epsilon < 0) fail("solver.epsilon", "must be >= 0");
    if (!(sc.solver.mu > 0)) fail("solver.mu", "must be positive");
    if (!(sc.solver.max_gap > 0)) fail("solver.max_gap", "must be positive");
  }

  if (j.contains("evaluation")) {
    const json& je = j.at("evaluation");
    sc.loop_closed = bool_at(je, "evaluation", "loop_closed", false);
    if (je.contains("surface_pairs")) {
      const json& sp = je.at("surface_pairs");
      if (!sp.is_array()) fail("evaluation.surface_pairs", "must be an array");
      for (size_t i = 0; i < sp.size(); ++i) {
        const json& p = sp[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
            !p[1].is_number_integer())
          fail("evaluation.surface_pairs[" + std::to_string(i) + "]",
               "must be a pair of world plane indices");
        sc.surface_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
    }
  }

  if (sc.loop_closed && !sc.trajectory.closed)
    fail("evaluation.loop_closed", "requires trajectory.closed = true");

  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open scenario config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), "'" + path + "'");
}

}  // namespace mansel::pipeline
