#include "mansel/pipeline/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "mansel/core/log.hpp"
#include "mansel/core/parallel.hpp"
#include "mansel/frontend/compass.hpp"
#include "mansel/pipeline/export.hpp"
#include "mansel/solver/least_squares.hpp"

namespace mansel::pipeline {

Stage stage_from_name(const std::string& name) {
  if (name == "reg") return Stage::Registration;
  if (name == "ls") return Stage::LeastSquares;
  if (name == "convex") return Stage::Convex;
  throw Error("unknown stage '" + name + "' (expected reg, ls, or convex)");
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Registration: return "reg";
    case Stage::LeastSquares: return "ls";
    default: return "convex";
  }
}

double compute_drift(const std::vector<Vec3>& positions) {
  if (positions.size() < 2) return 0.0;
  return (positions.back() - positions.front()).norm();
}

std::vector<SurfaceDistanceRow> surface_distance_check(
    const std::vector<solver::LayoutStructure>& structures,
    const sim::ManhattanWorld& world,
    const std::vector<std::pair<int, int>>& pairs) {
  auto nearest_structure = [&](const LayoutPlane& plane) -> const solver::LayoutStructure* {
    const solver::LayoutStructure* best = nullptr;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& s : structures) {
      if (s.axis != plane.axis || s.facing != plane.facing) continue;
      const double gap = std::fabs(s.offset - plane.offset);
      if (gap < best_gap) {
        best_gap = gap;
        best = &s;
      }
    }
    return best;
  };

  std::vector<SurfaceDistanceRow> table;
  for (const auto& [ia, ib] : pairs) {
    if (ia < 0 || ib < 0 || ia >= static_cast<int>(world.planes.size()) ||
        ib >= static_cast<int>(world.planes.size()))
      throw Error("surface pair references unknown world plane");
    const auto& pa = world.planes[ia];
    const auto& pb = world.planes[ib];
    if (pa.axis != pb.axis)
      throw Error("surface pair (" + std::to_string(ia) + "," + std::to_string(ib) +
                  ") crosses axes");
    const auto* sa = nearest_structure(pa);
    const auto* sb = nearest_structure(pb);
    if (!sa || !sb)
      throw Error("surface pair (" + std::to_string(ia) + "," + std::to_string(ib) +
                  ") has no reconstructed counterpart");
    SurfaceDistanceRow row;
    row.plane_a = ia;
    row.plane_b = ib;
    row.ground_truth = std::fabs(pa.offset - pb.offset);
    row.model = std::fabs(sa->offset - sb->offset);
    row.delta = std::fabs(row.model - row.ground_truth);
    table.push_back(row);
  }
  return table;
}

namespace {

Vec3 rotate_z(double yaw, const Vec3& v) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return Vec3(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
}

/// Simulation + front-end: fills segments, edges, fused yaws and the
/// dead-reckoned comparison trajectories.
void run_frontend(PipelineResult& R) {
  const Scenario& sc = R.scenario;
  const size_t n_frames = R.truth.poses.size();

  std::vector<std::optional<double>> compass(n_frames, std::nullopt);
  std::vector<double> dyaw;
  for (const auto& o : R.odometry) dyaw.push_back(o.dyaw);

  if (sc.mode == SensorMode::Direct) {
    R.segments = simulate_range_measurements(R.world, R.truth, sc.noise, sc.sensor);
    for (size_t i = 0; i < R.segments.size(); ++i)
      R.segments[i].segment_id = static_cast<int>(i);
  } else {
    const sim::Intrinsics intrin = sim::intrinsics_from_fov(
        sc.image_width, sc.image_height, sc.sensor.fov_h_deg, sc.sensor.fov_v_deg);
    const Rng base(sc.seed);

    std::vector<sim::DepthImage> frames(n_frames);
    parallel_for(n_frames, [&](size_t i) {
      sim::RenderOptions opts;
      opts.max_range = sc.sensor.max_range;
      opts.noise_rel = sc.depth_noise_rel;
      frames[i] = sim::render_depth_frame(R.world, R.truth.poses[i], intrin, opts,
                                          base.stream("depth", i));
      frames[i].frame_index = static_cast<int>(i);
    });

    // Compass runs sequentially: each frame's search window is centered on
    // the previous fused estimate advanced by odometry.
    double predicted = 0.0;
    bool have_prev = false;
    for (size_t i = 0; i < n_frames; ++i) {
      const auto points = frontend::horizontal_points(frames[i], sc.compass.stride);
      std::optional<double> est;
      if (!have_prev) {
        est = frontend::entropy_compass(points, 0.0,
                                        deg_to_rad(sc.compass.first_radius_deg),
                                        deg_to_rad(sc.compass.first_step_deg),
                                        sc.compass.bin_width);
        if (est)
          est = frontend::entropy_compass(points, *est, deg_to_rad(1.0),
                                          deg_to_rad(sc.compass.step_deg),
                                          sc.compass.bin_width);
      } else {
        est = frontend::entropy_compass(points, predicted,
                                        deg_to_rad(sc.compass.radius_deg),
                                        deg_to_rad(sc.compass.step_deg),
                                        sc.compass.bin_width);
      }
      compass[i] = est;
      if (est) {
        predicted = *est;
        have_prev = true;
      }
      if (i + 1 < n_frames) predicted += dyaw[i];
    }

    R.fused_yaws = frontend::fuse_orientation(dyaw, compass);

    const Rng ransac_base = base.stream("ransac");
    std::vector<std::vector<SegmentObservation>> per_frame(n_frames);
    parallel_for(n_frames, [&](size_t i) {
      const auto labels = frontend::label_axis_alignment(
          frames[i], R.fused_yaws[i], sc.segment_params.k,
          sc.segment_params.min_fraction, sc.segment_params.plane_tol);
      per_frame[i] = frontend::extract_segments(labels, frames[i], R.fused_yaws[i],
                                                sc.segment_params,
                                                ransac_base.stream("frame", i));
    });
    for (size_t i = 0; i < n_frames; ++i)
      for (auto& s : per_frame[i]) {
        s.segment_id = static_cast<int>(R.segments.size());
        R.segments.push_back(s);
      }
  }

  if (R.fused_yaws.empty()) R.fused_yaws = frontend::fuse_orientation(dyaw, compass);

  // In depth mode the axis-aligned translation comes from the estimated
  // orientation; in direct mode the simulator already supplied it.
  if (sc.mode == SensorMode::Depth) {
    for (size_t i = 0; i + 1 < n_frames; ++i)
      R.odometry[i].t_axis = rotate_z(R.fused_yaws[i], R.odometry[i].t_sensor);
  }

  // Temporal correspondences between consecutive frames.
  std::vector<std::vector<const SegmentObservation*>> by_frame(n_frames);
  for (const auto& s : R.segments)
    by_frame[s.frame_index].push_back(&s);
  for (size_t i = 0; i + 1 < n_frames; ++i) {
    std::vector<SegmentObservation> prev, curr;
    for (const auto* s : by_frame[i]) prev.push_back(*s);
    for (const auto* s : by_frame[i + 1]) curr.push_back(*s);
    const auto edges = frontend::temporal_correspondences(
        prev, curr, R.odometry[i].t_axis, sc.correspondence);
    R.temporal_edges.insert(R.temporal_edges.end(), edges.begin(), edges.end());
  }

  // Dead-reckoned comparison trajectories: raw integrates the sensor-frame
  // odometry under dead-reckoned yaw; the compass column uses fused yaws.
  R.traj_raw.assign(1, Vec3::Zero());
  R.traj_compass.assign(1, Vec3::Zero());
  double raw_yaw = R.fused_yaws.empty() ? 0.0 : R.fused_yaws[0];
  for (size_t i = 0; i + 1 < n_frames; ++i) {
    R.traj_raw.push_back(R.traj_raw.back() + rotate_z(raw_yaw, R.odometry[i].t_sensor));
    raw_yaw += R.odometry[i].dyaw;
    R.traj_compass.push_back(R.traj_compass.back() +
                             rotate_z(R.fused_yaws[i], R.odometry[i].t_sensor));
  }
}

std::vector<Vec3> poses_from_xi(const Eigen::VectorXd& xi,
                                const graph::ParameterIndex& index) {
  std::vector<Vec3> out;
  out.reserve(index.n_frames());
  for (int i = 0; i < index.n_frames(); ++i)
    out.emplace_back(xi[index.pose_col(i, 0)], xi[index.pose_col(i, 1)],
                     xi[index.pose_col(i, 2)]);
  return out;
}

}  // namespace

namespace {
/// Runs one pipeline stage, tagging any failure with the stage name.
template <typename Fn>
void stage_step(const char* tag, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(std::string("stage ") + tag + ": " + e.what());
  }
}
}  // namespace

PipelineResult run_pipeline(const Scenario& scenario, Stage stage) {
  PipelineResult R;
  R.scenario = scenario;
  R.scenario.noise.seed = scenario.seed;

  R.report.scenario = scenario.name;
  R.report.seed = scenario.seed;
  R.report.stage = stage;
  R.report.loop_closed = scenario.loop_closed;

  // --- simulate ---------------------------------------------------------
  stage_step("simulate", [&] {
    R.world = sim::generate_world(scenario.world);
    sim::TrajectorySpec tspec = scenario.trajectory;
    if (scenario.laps > 1) {
      tspec.waypoints.clear();
      for (int lap = 0; lap < scenario.laps; ++lap)
        tspec.waypoints.insert(tspec.waypoints.end(),
                               scenario.trajectory.waypoints.begin(),
                               scenario.trajectory.waypoints.end());
    }
    R.truth = sim::build_trajectory(tspec);
    R.odometry = sim::simulate_odometry(R.truth, R.scenario.noise);
  });

  double path_length = 0.0;
  for (size_t i = 0; i + 1 < R.truth.poses.size(); ++i)
    path_length += (R.truth.poses[i + 1].p - R.truth.poses[i].p).norm();
  R.report.path_length_m = path_length;

  // --- front-end --------------------------------------------------------
  stage_step("frontend", [&] { run_frontend(R); });

  // --- graph ------------------------------------------------------------
  stage_step("graph", [&] {
    R.fgraph = graph::build_graph(R.segments, R.temporal_edges, R.odometry);
    R.index = graph::ParameterIndex::from_graph(R.fgraph);
    graph::AssemblyOptions aopts;
    aopts.anchor_weight = scenario.solver.anchor_weight;
    aopts.weighting = scenario.solver.weighting;
    aopts.range_sigma = scenario.noise.range_sigma;
    aopts.odom_sigma = scenario.noise.odom_sigma;
    R.system = assemble_measurement_system(R.fgraph, R.index, aopts);
  });
  R.report.initial_segments = R.fgraph.total_slots();

  if (R.report.loop_closed) {
    R.report.drift_raw = compute_drift(R.traj_raw);
    R.report.drift_compass = compute_drift(R.traj_compass);
  }

  if (stage == Stage::Registration) return R;

  // --- least squares ------------------------------------------------------
  const auto t0 = std::chrono::steady_clock::now();
  auto namer = [index = R.index](int col) { return index.describe(col); };

  TripletMatrix Aw;
  std::vector<double> bw;
  graph::apply_row_weights(R.system, Aw, bw);
  stage_step("least-squares", [&] {
    R.xi_ls = solver::solve_least_squares(Aw, bw, namer);
    const Eigen::VectorXd r =
        solver::to_eigen(Aw) * R.xi_ls - solver::to_eigen(bw);
    R.residual_ls = r.norm();
  });
  if (R.report.loop_closed)
    R.report.drift_ls = compute_drift(poses_from_xi(R.xi_ls, R.index));

  if (stage == Stage::LeastSquares) {
    R.report.optimization_wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return R;
  }

  // --- convex model selection --------------------------------------------
  stage_step("convex", [&] {
    std::vector<double> xi_ls_std(R.xi_ls.data(), R.xi_ls.data() + R.xi_ls.size());
    R.hypotheses =
        generate_hypotheses(R.fgraph, R.index, xi_ls_std, scenario.solver.max_gap);
    R.system.E = build_equivalence_matrix(R.hypotheses, R.index);
    R.system.D = build_topology_constraints(R.fgraph, R.index);
    R.report.hypotheses_considered = static_cast<int>(R.hypotheses.size());

    R.delta = solver::compute_delta(R.residual_ls, scenario.solver.epsilon);

    solver::ConvexOptions copts;
    copts.max_iters = scenario.solver.max_iters;
    copts.epsilon = scenario.solver.epsilon;
    R.convex = solver::solve_sparse_selection(R.system.E, Aw, bw, R.delta,
                                              R.system.D, copts);
    if (!R.convex.converged)
      log::warn("pipeline: convex stage did not converge (scenario '" +
                scenario.name + "')");

    R.merges = solver::threshold_equivalences(R.system.E, R.convex.xi,
                                              scenario.solver.mu);
    R.report.hypotheses_accepted = static_cast<int>(R.merges.accepted.size());

    const solver::ResolveResult resolved =
        solver::collapse_and_resolve(R.fgraph, R.index, R.system, R.merges);
    R.xi_final = resolved.xi;

    R.structures =
        solver::model_extents(R.xi_final, R.index, R.fgraph, R.merges, R.segments);
  });
  R.report.final_structures = static_cast<int>(R.structures.size());
  if (R.report.initial_segments > 0)
    R.report.complexity_reduction_pct =
        100.0 * (1.0 - static_cast<double>(R.report.final_structures) /
                           R.report.initial_segments);

  R.report.optimization_wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (R.report.loop_closed) {
    R.report.drift_convex = compute_drift(poses_from_xi(R.xi_final, R.index));
    if (R.report.drift_ls && R.report.drift_convex &&
        *R.report.drift_convex > *R.report.drift_ls) {
      R.report.convex_drift_exceeded_ls = true;
      log::warn("pipeline: convex drift " + std::to_string(*R.report.drift_convex) +
                " exceeds least-squares drift " + std::to_string(*R.report.drift_ls) +
                " (possible false merge, scenario '" + scenario.name + "')");
    }
  }

  if (!scenario.surface_pairs.empty()) {
    R.surface_table =
        surface_distance_check(R.structures, R.world, scenario.surface_pairs);
    double rel_sum = 0.0;
    int counted = 0;
    for (const auto& row : R.surface_table) {
      if (row.ground_truth <= 0) continue;
      rel_sum += row.delta / row.ground_truth;
      ++counted;
    }
    if (counted > 0) R.report.surface_mean_rel_error = rel_sum / counted;
  }

  return R;
}

PipelineResult run_pipeline_to(const Scenario& scenario, const std::string& out_dir,
                               Stage stage) {
  PipelineResult R = run_pipeline(scenario, stage);
  write_outputs(R, out_dir);
  return R;
}

}  // namespace mansel::pipeline
