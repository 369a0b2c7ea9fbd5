#pragma once

#include <string>
#include <vector>

#include "mansel/sim/measurements.hpp"

namespace mansel::sim {

// Odometry CSV: header line, then one row per step
//   step,tx,ty,tz,sx,sy,sz,dyaw
// with t* the axis-aligned translation, s* the sensor-frame translation,
// and dyaw the yaw increment (radians). Doubles are written with
// round-trip precision.
void write_odometry_csv(const std::string& path,
                        const std::vector<OdometrySample>& odometry);
std::vector<OdometrySample> read_odometry_csv(const std::string& path);

}  // namespace mansel::sim
