#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mansel/frontend/correspondence.hpp"
#include "mansel/frontend/segments.hpp"
#include "mansel/graph/assemble.hpp"
#include "mansel/sim/depth.hpp"
#include "mansel/sim/measurements.hpp"
#include "mansel/sim/trajectory.hpp"
#include "mansel/sim/world.hpp"

namespace mansel::pipeline {

enum class SensorMode { Direct, Depth };

struct CompassParams {
  double bin_width = 0.05;
  double radius_deg = 0.3;      // tracking search radius around the prediction
  double step_deg = 0.05;
  double first_radius_deg = 45.0;  // bootstrap search for frame 0
  double first_step_deg = 1.0;
  int stride = 2;               // pixel subsampling for the 2D point set
};

struct SolverParams {
  double epsilon = 0.02;
  double mu = 0.3;
  double max_gap = 1.0;
  double anchor_weight = 1e3;
  graph::AssemblyOptions::Weighting weighting =
      graph::AssemblyOptions::Weighting::Unit;
  int max_iters = 20000;
};

struct Scenario {
  std::string name = "scenario";
  uint64_t seed = 0;
  sim::WorldSpec world;
  sim::TrajectorySpec trajectory;
  int laps = 1;
  sim::NoiseSpec noise;
  SensorMode mode = SensorMode::Direct;
  sim::SensorModel sensor;
  int image_width = 160, image_height = 120;
  double depth_noise_rel = 0.005;
  frontend::SegmentParams segment_params;
  frontend::CorrespondenceParams correspondence;
  CompassParams compass;
  SolverParams solver;
  bool loop_closed = false;
  std::vector<std::pair<int, int>> surface_pairs;  // world plane index pairs
};

/// Parses and validates a versioned scenario config; errors name the
/// offending key. See docs in the repository README for the schema.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin);

}  // namespace mansel::pipeline
