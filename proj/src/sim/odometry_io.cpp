#include "mansel/sim/odometry_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mansel::sim {

void write_odometry_csv(const std::string& path,
                        const std::vector<OdometrySample>& odometry) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "step,tx,ty,tz,sx,sy,sz,dyaw\n";
  char line[256];
  for (size_t i = 0; i < odometry.size(); ++i) {
    const auto& s = odometry[i];
    std::snprintf(line, sizeof(line),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                  s.t_axis.x(), s.t_axis.y(), s.t_axis.z(), s.t_sensor.x(),
                  s.t_sensor.y(), s.t_sensor.z(), s.dyaw);
    os << line;
  }
  if (!os) throw Error("short write to '" + path + "'");
}

std::vector<OdometrySample> read_odometry_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line.rfind("step,", 0) != 0)
    throw Error("'" + path + "' is not an odometry CSV (bad header)");

  std::vector<OdometrySample> out;
  size_t expect = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    OdometrySample s;
    size_t step = 0;
    const int got = std::sscanf(line.c_str(),
                                "%zu,%lg,%lg,%lg,%lg,%lg,%lg,%lg", &step,
                                &s.t_axis.x(), &s.t_axis.y(), &s.t_axis.z(),
                                &s.t_sensor.x(), &s.t_sensor.y(),
                                &s.t_sensor.z(), &s.dyaw);
    if (got != 8 || step != expect)
      throw Error("'" + path + "' row " + std::to_string(expect) + " malformed");
    out.push_back(s);
    ++expect;
  }
  return out;
}

}  // namespace mansel::sim
