#pragma once

namespace onfarm {

// A planar location in the rotated field frame: x across farming
// operations, y along the direction of travel, both in meters.
struct Location {
  double x = 0.0;
  double y = 0.0;
};

enum class Axis { X, Y };

inline const char* axis_name(Axis a) { return a == Axis::X ? "x" : "y"; }

}  // namespace onfarm
