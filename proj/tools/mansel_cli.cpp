#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mansel/core/log.hpp"
#include "mansel/pipeline/export.hpp"
#include "mansel/pipeline/pipeline.hpp"
#include "mansel/sim/depth.hpp"
#include "mansel/sim/odometry_io.hpp"

namespace {

using namespace mansel;

struct CommonArgs {
  std::string config;
  std::string out = "out";
  int64_t seed = -1;
  std::string stage = "convex";
  double epsilon = -1, mu = -1, max_gap = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_solver_flags) {
  cmd->add_option("--config", args.config, "scenario config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "override the scenario seed");
  if (with_solver_flags) {
    cmd->add_option("--stage", args.stage, "pipeline depth: reg | ls | convex");
    cmd->add_option("--epsilon", args.epsilon, "residual slack for the delta ball");
    cmd->add_option("--mu", args.mu, "equivalence acceptance threshold (m)");
    cmd->add_option("--max-gap", args.max_gap, "hypothesis distance cutoff (m)");
  }
}

pipeline::Scenario load_with_overrides(const CommonArgs& args) {
  pipeline::Scenario sc = pipeline::load_scenario(args.config);
  if (args.seed >= 0) sc.seed = static_cast<uint64_t>(args.seed);
  if (args.epsilon >= 0) sc.solver.epsilon = args.epsilon;
  if (args.mu >= 0) sc.solver.mu = args.mu;
  if (args.max_gap >= 0) sc.solver.max_gap = args.max_gap;
  return sc;
}

void write_one(const std::string& dir, const char* name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream os(std::filesystem::path(dir) / name, std::ios::binary);
  os << text;
}

void print_report(const pipeline::PipelineResult& R) {
  const auto& rep = R.report;
  auto drift = [](const std::optional<double>& d) {
    return d ? std::to_string(*d) : std::string("n/a");
  };
  std::printf("scenario: %s (seed %llu, stage %s)\n", rep.scenario.c_str(),
              static_cast<unsigned long long>(rep.seed), stage_name(rep.stage));
  std::printf("endpoint drift [m]: raw %s | compass %s | least-squares %s | convex %s\n",
              drift(rep.drift_raw).c_str(), drift(rep.drift_compass).c_str(),
              drift(rep.drift_ls).c_str(), drift(rep.drift_convex).c_str());
  std::printf("hypotheses: %d considered, %d accepted\n", rep.hypotheses_considered,
              rep.hypotheses_accepted);
  std::printf("layout: %d initial segments -> %d structures", rep.initial_segments,
              rep.final_structures);
  if (rep.complexity_reduction_pct)
    std::printf(" (%.1f%% reduction)", *rep.complexity_reduction_pct);
  std::printf("\npath length: %.2f m, optimization time: %.3f s\n",
              rep.path_length_m, rep.optimization_wall_time_s);
  if (rep.surface_mean_rel_error)
    std::printf("surface distances: mean relative error %.3f%%\n",
                *rep.surface_mean_rel_error * 100.0);
  if (rep.convex_drift_exceeded_ls)
    std::printf("warning: convex drift exceeded the least-squares drift "
                "(possible false merge)\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manhattan layout reconstruction via sparse convex model selection"};
  app.require_subcommand(1);

  CommonArgs args;
  bool dump_frames = false;

  auto* sim_cmd = app.add_subcommand("simulate",
                                     "generate the synthetic world, trajectory, "
                                     "odometry, and segment observations");
  add_common(sim_cmd, args, false);
  sim_cmd->add_flag("--dump-frames", dump_frames,
                    "also write rendered depth frames (depth mode)");

  auto* solve_cmd =
      app.add_subcommand("solve", "run the reconstruction and write the model");
  add_common(solve_cmd, args, true);

  auto* eval_cmd = app.add_subcommand(
      "evaluate", "run the full pipeline and report drift/complexity metrics");
  add_common(eval_cmd, args, true);

  auto* plot_cmd = app.add_subcommand("plot", "write the birds-eye SVG map");
  add_common(plot_cmd, args, true);

  auto* all_cmd = app.add_subcommand("all", "run everything and write all outputs");
  add_common(all_cmd, args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const pipeline::Scenario sc = load_with_overrides(args);

    if (sim_cmd->parsed()) {
      const auto R = pipeline::run_pipeline(sc, pipeline::Stage::Registration);
      write_one(args.out, "segments.json", pipeline::segments_json(R));
      std::filesystem::create_directories(args.out);
      sim::write_odometry_csv(
          (std::filesystem::path(args.out) / "odometry.csv").string(), R.odometry);
      if (dump_frames && sc.mode == pipeline::SensorMode::Depth) {
        const auto intrin = sim::intrinsics_from_fov(
            sc.image_width, sc.image_height, sc.sensor.fov_h_deg, sc.sensor.fov_v_deg);
        const Rng base(sc.seed);
        const std::string frame_dir =
            (std::filesystem::path(args.out) / "frames").string();
        std::filesystem::create_directories(frame_dir);
        for (size_t i = 0; i < R.truth.poses.size(); ++i) {
          sim::RenderOptions opts;
          opts.max_range = sc.sensor.max_range;
          opts.noise_rel = sc.depth_noise_rel;
          auto img = sim::render_depth_frame(R.world, R.truth.poses[i], intrin, opts,
                                             base.stream("depth", i));
          img.frame_index = static_cast<int>(i);
          char name[64];
          std::snprintf(name, sizeof(name), "frame_%05zu", i);
          sim::write_depth_binary(frame_dir + "/" + name + ".msdf", img);
          if (i == 0) sim::write_depth_pgm(frame_dir + "/" + name + ".pgm", img);
        }
      }
      std::printf("wrote %s/segments.json (%zu observations, %zu temporal edges)\n",
                  args.out.c_str(), R.segments.size(), R.temporal_edges.size());
      return 0;
    }

    const pipeline::Stage stage = pipeline::stage_from_name(args.stage);

    if (solve_cmd->parsed()) {
      const auto R = pipeline::run_pipeline(sc, stage);
      write_one(args.out, "system.json", pipeline::system_json(R));
      write_one(args.out, "solution.json", pipeline::solution_json(R));
      write_one(args.out, "map.json", pipeline::map_json(R));
      write_one(args.out, "map.svg", pipeline::map_svg(R));
      std::printf("wrote model with %d structures to %s\n",
                  R.report.final_structures, args.out.c_str());
      return 0;
    }
    if (eval_cmd->parsed() || all_cmd->parsed()) {
      const auto R = pipeline::run_pipeline_to(sc, args.out, stage);
      print_report(R);
      return 0;
    }
    if (plot_cmd->parsed()) {
      const auto R = pipeline::run_pipeline(sc, stage);
      write_one(args.out, "map.json", pipeline::map_json(R));
      write_one(args.out, "map.svg", pipeline::map_svg(R));
      std::printf("wrote %s/map.svg\n", args.out.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    mansel::log::error(e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
