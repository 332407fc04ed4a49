#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vlcsim {

// Speed of light used for propagation delays [m/s].
inline constexpr double kSpeedOfLight = 3.0e8;

// Azimuths of the four diagonal branch directions shared by the
// angle-diversity transmitter units and the receiver.
inline constexpr std::array<double, 4> kBranchAzimuthsDeg = {45.0, 135.0, 225.0, 315.0};

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

struct Vec3 {
  double x{0}, y{0}, z{0};

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }

  friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

  constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  constexpr double norm2() const { return x * x + y * y + z * z; }

  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }
};

inline constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double distance(const Vec3& a, const Vec3& b) { return (b - a).norm(); }

// Pointing direction described by an azimuth/elevation pair.
// Azimuth is measured in the x-y plane from +x toward +y, in [0, 360).
// Elevation is measured from the horizontal plane, up positive, in [-90, 90].
struct Orientation {
  double azimuth_deg{0};
  double elevation_deg{0};

  Orientation() = default;
  Orientation(double az_deg, double el_deg) : azimuth_deg(az_deg), elevation_deg(el_deg) {
    if (!(az_deg >= 0.0 && az_deg < 360.0))
      throw std::invalid_argument("Orientation: azimuth " + std::to_string(az_deg) +
                                  " outside [0, 360)");
    if (!(el_deg >= -90.0 && el_deg <= 90.0))
      throw std::invalid_argument("Orientation: elevation " + std::to_string(el_deg) +
                                  " outside [-90, 90]");
  }
};

// Unit vector for an azimuth/elevation pair:
//   (cos El cos Az, cos El sin Az, sin El).
// Positive elevation points toward +z.
inline Vec3 direction_from_az_el(const Orientation& o) {
  const double az = deg_to_rad(o.azimuth_deg);
  const double el = deg_to_rad(o.elevation_deg);
  const double ce = std::cos(el);
  return {ce * std::cos(az), ce * std::sin(az), std::sin(el)};
}

// Recovers the azimuth/elevation pair of a unit direction. At the poles the
// azimuth is reported as 0.
inline Orientation az_el_from_direction(const Vec3& dir) {
  const double el = rad_to_deg(std::asin(std::clamp(dir.z, -1.0, 1.0)));
  double az = rad_to_deg(std::atan2(dir.y, dir.x));
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az = 0.0;
  return Orientation(az, el);
}

}  // namespace vlcsim
