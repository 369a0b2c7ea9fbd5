#pragma once

#include <string>

#include "mansel/pipeline/pipeline.hpp"

namespace mansel::pipeline {

/// Writes the full output set under out_dir (created if needed):
/// report.json, map.svg, map.json, segments.json, system.json,
/// solution.json, timings.json. All files except timings.json (and the
/// timing field inside solution.json) are byte-stable for a fixed
/// scenario + seed.
void write_outputs(const PipelineResult& result, const std::string& out_dir);

std::string report_json(const PipelineResult& result);
std::string segments_json(const PipelineResult& result);
std::string system_json(const PipelineResult& result);
std::string solution_json(const PipelineResult& result, bool with_timing = true);
std::string map_json(const PipelineResult& result);
std::string map_svg(const PipelineResult& result);

/// Map export by format name: "svg" or "json"; anything else is an error.
std::string export_map(const PipelineResult& result, const std::string& format);

/// Reads back a map.json written by write_outputs; round-trips exactly.
struct MapModel {
  std::vector<solver::LayoutStructure> structures;
  std::vector<Vec3> trajectory;
};
MapModel read_map_json(const std::string& text);

}  // namespace mansel::pipeline
