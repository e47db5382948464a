#pragma once

namespace scatter3d {

/// A point of T^3 = R^3 / 2*pi*Z^3 (coordinates are not reduced).
struct TorusPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

}  // namespace scatter3d
