#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evline::core {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OrderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.141592653589793;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Nearest integer, ties toward positive infinity. Used for every pixel/bin
// rounding so the iterative and recompute paths agree bit for bit.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }
inline std::int64_t round_half_up_i64(double v) {
  return static_cast<std::int64_t>(std::floor(v + 0.5));
}

// Normalize an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  else if (a > kPi) a -= 2.0 * kPi;
  return a;
}

struct Event {
  std::int64_t t = 0;  // microseconds
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::uint8_t p = 0;  // 1 = brightness increase, 0 = decrease

  friend bool operator==(const Event&, const Event&) = default;
};

struct CameraIntrinsics {
  int width = 240;
  int height = 180;
  double alpha_x = 225.68717584155982;  // 56 deg horizontal field of view
  double alpha_y = 225.68717584155982;
  double u0 = 120.0;
  double v0 = 90.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  void validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("sensor size must be positive");
    if (alpha_x <= 0.0 || alpha_y <= 0.0) throw ConfigError("focal length must be positive");
    if (u0 < 0.0 || u0 >= width) throw ConfigError("u0 outside sensor");
  }
};

struct Pose2 {
  std::int64_t t = 0;  // microseconds
  double x = 0.0;      // meters
  double y = 0.0;
  double theta = 0.0;  // radians, in (-pi, pi]
};

using PoseLog = std::vector<Pose2>;

}  // namespace evline::core
