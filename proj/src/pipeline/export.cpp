#include "mansel/pipeline/export.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace mansel::pipeline {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json rect_to_json(const Rect& r) {
  return ordered_json{{"u_min", r.u_min}, {"u_max", r.u_max},
                      {"v_min", r.v_min}, {"v_max", r.v_max}};
}

Rect rect_from_json(const nlohmann::json& j) {
  return Rect{j.at("u_min").get<double>(), j.at("u_max").get<double>(),
              j.at("v_min").get<double>(), j.at("v_max").get<double>()};
}

ordered_json optional_to_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw Error("short write to '" + path + "'");
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string report_json(const PipelineResult& R) {
  const ReconstructionReport& rep = R.report;
  ordered_json j;
  j["scenario"] = rep.scenario;
  j["seed"] = rep.seed;
  j["stage"] = stage_name(rep.stage);
  j["loop_closed"] = rep.loop_closed;
  j["drift"] = ordered_json{{"raw", optional_to_json(rep.drift_raw)},
                            {"compass", optional_to_json(rep.drift_compass)},
                            {"least_squares", optional_to_json(rep.drift_ls)},
                            {"convex", optional_to_json(rep.drift_convex)}};
  j["hypotheses"] = ordered_json{{"considered", rep.hypotheses_considered},
                                 {"accepted", rep.hypotheses_accepted}};
  j["initial_segments"] = rep.initial_segments;
  j["final_structures"] = rep.final_structures;
  j["complexity_reduction_pct"] = optional_to_json(rep.complexity_reduction_pct);
  j["path_length_m"] = rep.path_length_m;
  j["surface_mean_rel_error"] = optional_to_json(rep.surface_mean_rel_error);
  ordered_json table = ordered_json::array();
  for (const auto& row : R.surface_table)
    table.push_back(ordered_json{{"plane_a", row.plane_a},
                                 {"plane_b", row.plane_b},
                                 {"ground_truth", row.ground_truth},
                                 {"model", row.model},
                                 {"delta", row.delta}});
  j["surface_table"] = std::move(table);
  j["convex_drift_exceeded_ls"] = rep.convex_drift_exceeded_ls;
  return j.dump(2) + "\n";
}

std::string segments_json(const PipelineResult& R) {
  ordered_json segs = ordered_json::array();
  for (const auto& s : R.segments) {
    segs.push_back(ordered_json{{"id", s.segment_id},
                                {"frame", s.frame_index},
                                {"axis", axis_name(s.axis)},
                                {"d", s.d},
                                {"facing", s.facing},
                                {"extent", rect_to_json(s.extent)},
                                {"inliers", s.inlier_count},
                                {"truth_plane", s.truth_plane}});
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : R.temporal_edges) {
    edges.push_back(ordered_json{
        {"a", e.segment_id_a},
        {"b", e.segment_id_b},
        {"axis", axis_name(e.axis)},
        {"kind", e.kind == EdgeKind::Temporal ? "temporal" : "hypothesis"}});
  }
  ordered_json j;
  j["segments"] = std::move(segs);
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

std::string system_json(const PipelineResult& R) {
  auto triplets = [](const TripletMatrix& m) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : m.entries)
      arr.push_back(ordered_json::array({e.row, e.col, e.value}));
    return ordered_json{{"rows", m.rows}, {"cols", m.cols}, {"entries", arr}};
  };
  ordered_json j;
  j["A"] = triplets(R.system.A);
  j["b"] = R.system.b;
  j["weights"] = R.system.weights;
  j["E"] = triplets(R.system.E);
  j["D"] = triplets(R.system.D);
  ordered_json index;
  index["n_frames"] = R.index.n_frames();
  index["slots"] = ordered_json{{"x", R.index.slots(Axis::X)},
                                {"y", R.index.slots(Axis::Y)},
                                {"z", R.index.slots(Axis::Z)}};
  ordered_json columns = ordered_json::array();
  for (int c = 0; c < R.index.dim(); ++c) columns.push_back(R.index.describe(c));
  index["columns"] = std::move(columns);
  j["index"] = std::move(index);
  return j.dump(2) + "\n";
}

std::string solution_json(const PipelineResult& R, bool with_timing) {
  ordered_json j;
  ordered_json xi = ordered_json::array();
  for (Eigen::Index i = 0; i < R.xi_final.size(); ++i) xi.push_back(R.xi_final[i]);
  j["xi"] = std::move(xi);
  j["objective"] = R.convex.objective;
  j["residual"] = R.convex.residual;
  j["max_ineq_violation"] = R.convex.max_ineq_violation;
  j["iterations"] = R.convex.iterations;
  j["converged"] = R.convex.converged;
  j["delta"] = R.convex.delta_used;
  j["delta_raised"] = R.convex.delta_raised;
  j["kkt"] = ordered_json{
      {"stationarity", R.convex.kkt.stationarity},
      {"l1_complementarity", R.convex.kkt.l1_complementarity},
      {"ball_complementarity", R.convex.kkt.ball_complementarity},
      {"ineq_complementarity", R.convex.kkt.ineq_complementarity},
      {"ball_violation", R.convex.kkt.ball_violation},
      {"ineq_violation", R.convex.kkt.ineq_violation},
      {"passed", R.convex.kkt.passed}};
  j["accepted_hypotheses"] = R.merges.accepted;
  ordered_json classes = ordered_json::array();
  for (const auto& cls : R.merges.classes) {
    ordered_json members = ordered_json::array();
    for (int c : cls) members.push_back(R.index.describe(c));
    classes.push_back(std::move(members));
  }
  j["classes"] = std::move(classes);
  if (with_timing) j["timing_s"] = R.report.optimization_wall_time_s;
  return j.dump(2) + "\n";
}

std::string map_json(const PipelineResult& R) {
  ordered_json planes = ordered_json::array();
  for (const auto& s : R.structures) {
    ordered_json slots = ordered_json::array();
    for (int sl : s.slots) slots.push_back(sl);
    planes.push_back(ordered_json{{"axis", axis_name(s.axis)},
                                  {"offset", s.offset},
                                  {"facing", s.facing},
                                  {"extent", rect_to_json(s.extent)},
                                  {"slots", std::move(slots)}});
  }
  ordered_json traj = ordered_json::array();
  const std::vector<Vec3> poses = [&] {
    std::vector<Vec3> out;
    const Eigen::VectorXd& xi =
        R.xi_final.size() > 0 ? R.xi_final
                              : (R.xi_ls.size() > 0 ? R.xi_ls : Eigen::VectorXd());
    if (xi.size() >= 3 * R.index.n_frames() && R.index.n_frames() > 0) {
      for (int i = 0; i < R.index.n_frames(); ++i)
        out.emplace_back(xi[R.index.pose_col(i, 0)], xi[R.index.pose_col(i, 1)],
                         xi[R.index.pose_col(i, 2)]);
    } else {
      out = R.traj_compass;
    }
    return out;
  }();
  for (const auto& p : poses)
    traj.push_back(ordered_json::array({p.x(), p.y(), p.z()}));
  ordered_json j;
  j["planes"] = std::move(planes);
  j["trajectory"] = std::move(traj);
  return j.dump(2) + "\n";
}

MapModel read_map_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  MapModel m;
  for (const auto& p : j.at("planes")) {
    solver::LayoutStructure s;
    s.axis = axis_from_name(p.at("axis").get<std::string>());
    s.offset = p.at("offset").get<double>();
    s.facing = p.at("facing").get<int>();
    s.extent = rect_from_json(p.at("extent"));
    for (const auto& sl : p.at("slots")) s.slots.push_back(sl.get<int>());
    m.structures.push_back(std::move(s));
  }
  for (const auto& q : j.at("trajectory"))
    m.trajectory.emplace_back(q[0].get<double>(), q[1].get<double>(),
                              q[2].get<double>());
  return m;
}

std::string map_svg(const PipelineResult& R) {
  // Birds-eye view: x-aligned planes red, y-aligned planes green,
  // trajectory black. z planes are face-on and omitted. Everything is in
  // the reconstruction's own gauge (first pose at the origin), so the
  // canvas is sized from the drawn content.
  const MapModel m = read_map_json(map_json(R));
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool first = true;
  auto grow = [&](double x, double y) {
    if (first) {
      x_lo = x_hi = x;
      y_lo = y_hi = y;
      first = false;
      return;
    }
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  };
  for (const auto& p : m.trajectory) grow(p.x(), p.y());
  for (const auto& s : m.structures) {
    if (s.axis == Axis::X) {
      grow(s.offset, s.extent.u_min);
      grow(s.offset, s.extent.u_max);
    } else if (s.axis == Axis::Y) {
      grow(s.extent.u_min, s.offset);
      grow(s.extent.u_max, s.offset);
    }
  }

  const double margin = 0.5;
  const double scale = 100.0;  // px per meter
  const double w = (x_hi - x_lo + 2 * margin) * scale;
  const double h = (y_hi - y_lo + 2 * margin) * scale;
  auto X = [&](double x) { return fmt2((x - x_lo + margin) * scale); };
  auto Y = [&](double y) { return fmt2((y_hi - y + margin) * scale); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(w) +
         "\" height=\"" + fmt2(h) + "\" viewBox=\"0 0 " + fmt2(w) + " " + fmt2(h) +
         "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& s : m.structures) {
    if (s.axis == Axis::Z) continue;
    const char* color = s.axis == Axis::X ? "#cc2222" : "#22aa22";
    std::string x1, y1, x2, y2;
    if (s.axis == Axis::X) {
      // Extent u is the y direction for x-aligned planes.
      x1 = x2 = X(s.offset);
      y1 = Y(s.extent.u_min);
      y2 = Y(s.extent.u_max);
    } else {
      y1 = y2 = Y(s.offset);
      x1 = X(s.extent.u_min);
      x2 = X(s.extent.u_max);
    }
    svg += "  <line x1=\"" + x1 + "\" y1=\"" + y1 + "\" x2=\"" + x2 + "\" y2=\"" +
           y2 + "\" stroke=\"" + color + "\" stroke-width=\"4\"/>\n";
  }

  if (!m.trajectory.empty()) {
    svg += "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < m.trajectory.size(); ++i) {
      if (i) svg += " ";
      svg += X(m.trajectory[i].x()) + "," + Y(m.trajectory[i].y());
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string export_map(const PipelineResult& R, const std::string& format) {
  if (format == "svg") return map_svg(R);
  if (format == "json") return map_json(R);
  throw Error("unknown map format '" + format + "' (expected svg or json)");
}

void write_outputs(const PipelineResult& R, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  write_file(path("report.json"), report_json(R));
  write_file(path("segments.json"), segments_json(R));
  write_file(path("system.json"), system_json(R));
  write_file(path("solution.json"), solution_json(R));
  write_file(path("map.json"), map_json(R));
  write_file(path("map.svg"), map_svg(R));
  ordered_json t;
  t["optimization_wall_time_s"] = R.report.optimization_wall_time_s;
  write_file(path("timings.json"), t.dump(2) + "\n");
}

}  // namespace mansel::pipeline
