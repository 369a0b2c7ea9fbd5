#pragma once

#include <optional>
#include <string>

#include "mansel/graph/assemble.hpp"
#include "mansel/pipeline/scenario.hpp"
#include "mansel/solver/extents.hpp"
#include "mansel/solver/l1_selection.hpp"

namespace mansel::pipeline {

enum class Stage { Registration, LeastSquares, Convex };

Stage stage_from_name(const std::string& name);
const char* stage_name(Stage s);

/// Evaluation summary: endpoint drift per optimization stage, hypothesis
/// and structure counts, complexity reduction, and surface-distance
/// accuracy.
struct ReconstructionReport {
  std::string scenario;
  uint64_t seed = 0;
  Stage stage = Stage::Convex;
  bool loop_closed = false;
  // Endpoint drift per stage; absent when the stage did not run or the
  // scenario is not loop-closed.
  std::optional<double> drift_raw, drift_compass, drift_ls, drift_convex;
  int hypotheses_considered = 0;
  int hypotheses_accepted = 0;
  int initial_segments = 0;  // plane slots entering the optimization
  int final_structures = 0;
  std::optional<double> complexity_reduction_pct;
  double path_length_m = 0.0;
  std::optional<double> surface_mean_rel_error;
  bool convex_drift_exceeded_ls = false;
  double optimization_wall_time_s = 0.0;  // reported via timings.json
};

struct SurfaceDistanceRow {
  int plane_a = 0, plane_b = 0;
  double ground_truth = 0.0;
  double model = 0.0;
  double delta = 0.0;
};

/// Everything a pipeline run produces, kept for export and tests.
struct PipelineResult {
  Scenario scenario;
  sim::ManhattanWorld world;
  sim::GroundTruthTrajectory truth;
  std::vector<sim::OdometrySample> odometry;
  std::vector<SegmentObservation> segments;
  std::vector<CorrespondenceEdge> temporal_edges;
  std::vector<double> fused_yaws;

  graph::FactorGraph fgraph;
  graph::ParameterIndex index;
  graph::SparseSystem system;
  std::vector<graph::Hypothesis> hypotheses;

  // Dead-reckoned comparison trajectories.
  std::vector<Vec3> traj_raw, traj_compass;
  Eigen::VectorXd xi_ls;
  double residual_ls = 0.0;
  double delta = 0.0;
  solver::ConvexSolution convex;
  solver::MergeSet merges;
  Eigen::VectorXd xi_final;
  std::vector<solver::LayoutStructure> structures;
  std::vector<SurfaceDistanceRow> surface_table;

  ReconstructionReport report;
};

/// Runs simulate -> front-end -> graph -> solve for the requested stage
/// depth and fills the report. Deterministic given scenario + seed.
PipelineResult run_pipeline(const Scenario& scenario, Stage stage = Stage::Convex);

/// run_pipeline plus all file outputs (report.json, map.svg, map.json,
/// segments.json, system.json, solution.json, timings.json) under out_dir.
PipelineResult run_pipeline_to(const Scenario& scenario, const std::string& out_dir,
                               Stage stage = Stage::Convex);

/// Euclidean start-to-end distance of an estimated trajectory; the drift
/// measure for scenarios whose ground truth returns to the start.
double compute_drift(const std::vector<Vec3>& positions);

std::vector<SurfaceDistanceRow> surface_distance_check(
    const std::vector<solver::LayoutStructure>& structures,
    const sim::ManhattanWorld& world,
    const std::vector<std::pair<int, int>>& pairs);

}  // namespace mansel::pipeline
