#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "evline/types.hpp"

namespace evline::core {

// Per-pixel remap table; target x < 0 marks pixels whose rectified position
// falls outside the frame.
struct UndistortionLUT {
  int width = 0;
  int height = 0;
  struct Target {
    std::int16_t x = -1;
    std::int16_t y = -1;
  };
  std::vector<Target> map;

  const Target& at(int x, int y) const { return map[std::size_t(y) * width + x]; }
};

// Radial-tangential forward model on normalized coordinates.
std::pair<double, double> distort_normalized(double x, double y,
                                             const CameraIntrinsics& intr);
// Inverse of the forward model by fixed-point iteration.
std::pair<double, double> undistort_normalized(double xd, double yd,
                                               const CameraIntrinsics& intr);

UndistortionLUT build_undistortion_lut(const CameraIntrinsics& intr);

std::optional<Event> undistort_event(const Event& e, const UndistortionLUT& lut);

}  // namespace evline::core
