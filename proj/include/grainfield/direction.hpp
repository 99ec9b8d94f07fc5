#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "grainfield/errors.hpp"

namespace grainfield {

inline constexpr double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

// A direction on the unit sphere. Azimuth counterclockwise from the front
// (positive = left), elevation positive upwards. Always stored canonically:
// azimuth in [-180, 180), and 0 at the poles.
class Direction {
 public:
  Direction() = default;
  Direction(double azimuth_deg, double elevation_deg) {
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg)) {
      throw ParameterError("direction angles must be finite");
    }
    if (elevation_deg < -90.0 || elevation_deg > 90.0) {
      throw ParameterError("elevation must lie in [-90, 90] degrees");
    }
    double az = std::fmod(azimuth_deg + 180.0, 360.0);
    if (az < 0.0) az += 360.0;
    az -= 180.0;
    if (az >= 180.0) az -= 360.0;
    if (std::abs(elevation_deg) == 90.0) az = 0.0;
    if (az == 0.0) az = 0.0;  // drop negative zero
    azimuth_ = az;
    elevation_ = elevation_deg;
  }

  double azimuth_deg() const noexcept { return azimuth_; }
  double elevation_deg() const noexcept { return elevation_; }

  // x front, y left, z up.
  std::array<double, 3> unit_vector() const {
    const double az = deg_to_rad(azimuth_), el = deg_to_rad(elevation_);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
  }

  bool operator==(const Direction&) const = default;

 private:
  double azimuth_ = 0.0;
  double elevation_ = 0.0;
};

// Great-circle angle in radians (spherical law of cosines, clamped).
inline std::string direction_label(const Direction& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "az%+.1f_el%+.1f", d.azimuth_deg(), d.elevation_deg());
  return buf;
}

inline double great_circle_rad(const Direction& a, const Direction& b) {
  if (a == b) return 0.0;
  const double p1 = deg_to_rad(a.elevation_deg()), p2 = deg_to_rad(b.elevation_deg());
  const double dl = deg_to_rad(a.azimuth_deg() - b.azimuth_deg());
  const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline double great_circle_deg(const Direction& a, const Direction& b) {
  return rad_to_deg(great_circle_rad(a, b));
}

// Index of the closest direction; ties resolve to the lowest index.
inline std::size_t nearest_direction(std::span<const Direction> set, const Direction& target) {
  if (set.empty()) throw ParameterError("nearest_direction: empty direction set");
  std::size_t best = 0;
  double best_angle = great_circle_rad(set[0], target);
  for (std::size_t i = 1; i < set.size(); ++i) {
    const double a = great_circle_rad(set[i], target);
    if (a < best_angle) {
      best_angle = a;
      best = i;
    }
  }
  return best;
}

}  // namespace grainfield
