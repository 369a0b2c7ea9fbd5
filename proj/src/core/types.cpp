#include "mansel/core/types.hpp"

namespace mansel {

Axis axis_from_name(const std::string& name) {
  if (name == "x" || name == "X") return Axis::X;
  if (name == "y" || name == "Y") return Axis::Y;
  if (name == "z" || name == "Z") return Axis::Z;
  throw Error("unknown axis name '" + name + "' (expected x, y, or z)");
}

}  // namespace mansel
